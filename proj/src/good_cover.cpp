#include "nervecraft/good_cover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nervecraft {

namespace {

double growth_constant(int n) { return std::pow(10.0, 4.0 * (n + 3)); }
double volume_constant(int n) { return std::pow(10.0, 2.0 * n + 6); }

bool sorted_intersects(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j]) ++i; else ++j;
    }
    return false;
}

} // namespace

std::vector<VertexId> CoverBall::sub_ball(double fraction) const {
    std::vector<VertexId> out;
    const double r = radius * fraction;
    for (size_t i = 0; i < members.size(); ++i)
        if (member_dist[i] <= r) out.push_back(members[i]);
    return out;
}

void GoodCover::build_index(int vertex_count) {
    containing.assign(vertex_count, {});
    for (int bi = 0; bi < size(); ++bi)
        for (VertexId v : balls[bi].members) containing[v].push_back(bi);
}

GoodBallVerdict is_good_ball(const DiscreteManifold& m, VertexId p, double radius, double v1) {
    if (!(radius > 0.0)) throw InputError("good-ball radius must be positive");
    if (!(v1 > 0.0)) throw InputError("V(1) must be positive");
    GoodBallVerdict v;
    v.outer_volume = ball_volume(m, p, 100.0 * radius);
    v.inner_volume = ball_volume(m, p, radius / 100.0);
    v.growth_bound = growth_constant(m.n) * v.inner_volume;
    v.reasonable_growth = v.outer_volume <= v.growth_bound;
    v.ball_volume = ball_volume(m, p, radius);
    v.volume_bound_rhs = volume_constant(m.n) * v1 * std::pow(radius, m.n + 3);
    v.volume_bound = v.ball_volume <= v.volume_bound_rhs;
    v.small_radius = radius <= 0.01;
    v.below_resolution = radius < 5.0 * m.resolution_h;
    return v;
}

LadderTrace find_good_ball(const DiscreteManifold& m, VertexId p, double v1) {
    if (!m.valid_vertex(p)) throw InputError("invalid vertex id");
    if (!(v1 > 0.0)) throw InputError("V(1) must be positive");
    LadderTrace trace;
    trace.vertex = p;
    for (int s = 0;; ++s) {
        const double r = std::pow(10.0, -4.0 * s - 2.0);
        if (5.0 * r < m.resolution_h) {
            std::ostringstream msg;
            msg << "radius ladder exhausted at vertex " << p << ": rung " << r
                << " is below the mesh resolution guard (h = " << m.resolution_h << ")";
            throw ResolutionExhausted(msg.str());
        }
        LadderRung rung;
        rung.s = s;
        rung.radius = r;
        rung.outer_volume = ball_volume(m, p, 100.0 * r);
        rung.inner_volume = ball_volume(m, p, r / 100.0);
        rung.outer_density = rung.outer_volume / std::pow(100.0 * r, m.n);
        rung.inner_density = rung.inner_volume / std::pow(r / 100.0, m.n);
        rung.reasonable_growth = rung.outer_volume <= growth_constant(m.n) * rung.inner_volume;
        trace.rungs.push_back(rung);
        if (rung.reasonable_growth) {
            trace.chosen_radius = r;
            return trace;
        }
    }
}

GoodCover build_good_cover(const DiscreteManifold& m) {
    return build_good_cover(m, max_ball_volume(m, 1.0), nullptr);
}

GoodCover build_good_cover(const DiscreteManifold& m, double v1,
                           std::vector<LadderTrace>* traces) {
    GoodCover cover;
    cover.v1 = v1;
    const int nv = m.vertex_count();
    std::vector<double> radius_at(nv, 0.0);
    for (VertexId p = 0; p < nv; ++p) {
        LadderTrace t = find_good_ball(m, p, v1);
        radius_at[p] = t.chosen_radius;
        if (traces) traces->push_back(std::move(t));
    }
    // Greedy selection over the sixth-balls: largest radius first, center id
    // breaking ties, keep a candidate iff its sixth-ball avoids every vertex
    // already claimed.
    std::vector<VertexId> order(nv);
    for (VertexId p = 0; p < nv; ++p) order[p] = p;
    std::stable_sort(order.begin(), order.end(), [&radius_at](VertexId a, VertexId b) {
        if (radius_at[a] != radius_at[b]) return radius_at[a] > radius_at[b];
        return a < b;
    });
    std::vector<char> claimed(nv, 0);
    for (VertexId p : order) {
        Ball sixth = ball(m, p, radius_at[p] / 6.0);
        bool free = true;
        for (VertexId v : sixth.members)
            if (claimed[v]) { free = false; break; }
        if (!free) continue;
        for (VertexId v : sixth.members) claimed[v] = 1;
        Ball full = ball(m, p, radius_at[p]);
        CoverBall cb;
        cb.center = p;
        cb.radius = radius_at[p];
        cb.members = std::move(full.members);
        cb.member_dist = std::move(full.member_dist);
        cover.balls.push_back(std::move(cb));
    }
    // deterministic ball order: by (radius desc, center asc), as selected
    cover.build_index(nv);
    CoverReport rep = validate_cover(m, cover);
    cover.half_cover_ok = true;
    cover.sixth_disjoint_ok = true;
    for (const auto& viol : rep.violations) {
        if (viol.condition == "half_cover") cover.half_cover_ok = false;
        if (viol.condition == "sixth_disjoint") cover.sixth_disjoint_ok = false;
    }
    if (!rep.pass)
        throw InvariantViolation("good-cover construction postcondition failed: " +
                                 rep.violations.front().condition);
    return cover;
}

CoverReport validate_cover(const DiscreteManifold& m, const GoodCover& cover) {
    CoverReport rep;
    // condition 1: every ball is good
    for (int bi = 0; bi < cover.size(); ++bi) {
        const CoverBall& b = cover.balls[bi];
        GoodBallVerdict v = is_good_ball(m, b.center, b.radius, cover.v1);
        if (!v.good()) {
            CoverViolation viol;
            viol.condition = "good_ball";
            viol.ball_a = bi;
            viol.detail = v.reasonable_growth ? (v.volume_bound ? "small_radius" : "volume_bound")
                                              : "reasonable_growth";
            rep.violations.push_back(viol);
        }
    }
    // condition 2: half-balls cover every vertex
    std::vector<char> covered(m.vertex_count(), 0);
    for (const CoverBall& b : cover.balls)
        for (VertexId v : b.sub_ball(0.5)) covered[v] = 1;
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        if (!covered[v]) {
            CoverViolation viol;
            viol.condition = "half_cover";
            viol.witness = v;
            viol.detail = "vertex not covered by any half-ball";
            rep.violations.push_back(viol);
            break;
        }
    // condition 3: sixth-balls pairwise disjoint as vertex sets
    std::vector<int> owner(m.vertex_count(), -1);
    bool disjoint = true;
    for (int bi = 0; bi < cover.size() && disjoint; ++bi) {
        for (VertexId v : cover.balls[bi].sub_ball(1.0 / 6.0)) {
            if (owner[v] >= 0) {
                CoverViolation viol;
                viol.condition = "sixth_disjoint";
                viol.ball_a = owner[v];
                viol.ball_b = bi;
                viol.witness = v;
                viol.detail = "vertex shared by two sixth-balls";
                rep.violations.push_back(viol);
                disjoint = false;
                break;
            }
            owner[v] = bi;
        }
    }
    rep.pass = rep.violations.empty();
    return rep;
}

int count_scale_neighbors(const DiscreteManifold& m, const GoodCover& cover, const Ball& probe) {
    (void)m;
    const double s = probe.radius;
    int count = 0;
    for (const CoverBall& b : cover.balls) {
        if (b.radius < s / 2.0 || b.radius > 2.0 * s) continue;
        if (sorted_intersects(b.members, probe.members)) ++count;
    }
    return count;
}

std::string cover_to_json(const GoodCover& cover) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CoverBall& b : cover.balls)
        arr.push_back({{"center_id", b.center}, {"radius", b.radius}});
    return arr.dump(2);
}

GoodCover cover_from_json(const DiscreteManifold& m, const std::string& json_text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad cover JSON: ") + e.what());
    }
    if (!arr.is_array()) throw InputError("cover JSON must be an array");
    GoodCover cover;
    cover.v1 = max_ball_volume(m, 1.0);
    for (const auto& item : arr) {
        VertexId c = item.at("center_id").get<VertexId>();
        double r = item.at("radius").get<double>();
        if (!m.valid_vertex(c)) throw InputError("cover JSON references missing vertex");
        if (!(r > 0.0)) throw InputError("cover JSON has nonpositive radius");
        Ball full = ball(m, c, r);
        CoverBall cb;
        cb.center = c;
        cb.radius = r;
        cb.members = std::move(full.members);
        cb.member_dist = std::move(full.member_dist);
        cover.balls.push_back(std::move(cb));
    }
    cover.build_index(m.vertex_count());
    return cover;
}

} // namespace nervecraft
