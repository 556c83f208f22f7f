#include "nervecraft/nerve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace nervecraft {

namespace {

bool sorted_subset(const std::vector<int>& a, const std::vector<int>& b) {
    size_t j = 0;
    for (int x : a) {
        while (j < b.size() && b[j] < x) ++j;
        if (j == b.size() || b[j] != x) return false;
        ++j;
    }
    return true;
}

std::vector<int> sorted_insert(const std::vector<int>& v, int x) {
    std::vector<int> out;
    out.reserve(v.size() + 1);
    auto it = std::lower_bound(v.begin(), v.end(), x);
    out.insert(out.end(), v.begin(), it);
    out.push_back(x);
    out.insert(out.end(), it, v.end());
    return out;
}

std::vector<int> sorted_erase(const std::vector<int>& v, int x) {
    std::vector<int> out;
    out.reserve(v.size() - 1);
    for (int y : v)
        if (y != x) out.push_back(y);
    return out;
}

std::vector<VertexId> intersect_sorted(const std::vector<VertexId>& a,
                                       const std::vector<VertexId>& b) {
    std::vector<VertexId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace

std::string FaceKey::to_string() const {
    std::ostringstream out;
    out << "I1{";
    for (size_t i = 0; i < i1.size(); ++i) out << (i ? "," : "") << i1[i];
    out << "}I01{";
    for (size_t i = 0; i < i01.size(); ++i) out << (i ? "," : "") << i01[i];
    out << "}";
    return out.str();
}

bool in_closure(const FaceKey& f, const FaceKey& g) {
    if (!sorted_subset(f.i01, g.i01)) return false;
    if (!sorted_subset(g.i1, f.i1)) return false;
    // pinned-at-top coordinates of f beyond g's must come from g's free set
    for (int x : f.i1) {
        if (std::binary_search(g.i1.begin(), g.i1.end(), x)) continue;
        if (!std::binary_search(g.i01.begin(), g.i01.end(), x)) return false;
    }
    return true;
}

int RectangularNerve::face_id(const FaceKey& key) const {
    auto it = std::lower_bound(faces.begin(), faces.end(), key,
                               [](const RectFace& f, const FaceKey& k) { return f.key < k; });
    if (it == faces.end() || !(it->key == key)) return -1;
    return static_cast<int>(it - faces.begin());
}

std::vector<RectangularNerve::Facet> RectangularNerve::boundary(int face) const {
    std::vector<Facet> out;
    const FaceKey& k = faces[face].key;
    for (size_t a = 0; a < k.i01.size(); ++a) {
        int idx = k.i01[a];
        int sign = (a % 2 == 0) ? 1 : -1;
        Facet top;
        top.key.i1 = sorted_insert(k.i1, idx);
        top.key.i01 = sorted_erase(k.i01, idx);
        top.sign = sign;
        out.push_back(std::move(top));
        Facet bottom;
        bottom.key.i1 = k.i1;
        bottom.key.i01 = sorted_erase(k.i01, idx);
        bottom.sign = -sign;
        out.push_back(std::move(bottom));
    }
    return out;
}

std::vector<int> RectangularNerve::closure_ids(int face) const {
    std::vector<int> out;
    std::vector<char> seen(size(), 0);
    std::deque<int> queue{face};
    seen[face] = 1;
    while (!queue.empty()) {
        int f = queue.front();
        queue.pop_front();
        out.push_back(f);
        for (const Facet& facet : boundary(f)) {
            int id = face_id(facet.key);
            if (id >= 0 && !seen[id]) {
                seen[id] = 1;
                queue.push_back(id);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> RectangularNerve::star_ids(int face) const {
    std::vector<int> out;
    for (int g = 0; g < size(); ++g)
        if (in_closure(faces[face].key, faces[g].key)) out.push_back(g);
    return out;
}

namespace {

// Shared assembly: sorted face table with dimensions filled in.
RectangularNerve assemble(std::vector<double> radii,
                          std::unordered_map<FaceKey, std::pair<bool, double>, FaceKeyHash>&& found) {
    RectangularNerve nerve;
    nerve.radii = std::move(radii);
    nerve.faces.reserve(found.size());
    for (auto& [key, info] : found) {
        RectFace f;
        f.key = key;
        f.dim = static_cast<int>(key.i01.size());
        for (int idx : key.i01) f.r_sorted.push_back(nerve.radii[idx]);
        std::sort(f.r_sorted.begin(), f.r_sorted.end());
        f.volume = 1.0;
        for (double r : f.r_sorted) f.volume *= r;
        if (f.dim >= 1) {
            f.r1 = f.r_sorted.front();
        } else {
            f.r1 = std::numeric_limits<double>::infinity();
            for (int idx : key.i1) f.r1 = std::min(f.r1, nerve.radii[idx]);
        }
        f.realized = info.first;
        f.point_mass = info.second;
        nerve.faces.push_back(std::move(f));
    }
    std::sort(nerve.faces.begin(), nerve.faces.end(),
              [](const RectFace& a, const RectFace& b) { return a.key < b.key; });
    nerve.dim_max = 0;
    for (const RectFace& f : nerve.faces) nerve.dim_max = std::max(nerve.dim_max, f.dim);
    return nerve;
}

void close_under_boundary(std::unordered_map<FaceKey, std::pair<bool, double>, FaceKeyHash>& found,
                          std::deque<FaceKey>& queue, size_t budget) {
    while (!queue.empty()) {
        FaceKey key = std::move(queue.front());
        queue.pop_front();
        for (size_t a = 0; a < key.i01.size(); ++a) {
            int idx = key.i01[a];
            FaceKey top{sorted_insert(key.i1, idx), sorted_erase(key.i01, idx)};
            FaceKey bottom{key.i1, top.i01};
            for (FaceKey* cand : {&top, &bottom}) {
                if (found.emplace(*cand, std::make_pair(false, 0.0)).second) {
                    if (found.size() > budget)
                        throw InvariantViolation("nerve face budget exceeded");
                    queue.push_back(*cand);
                }
            }
        }
    }
}

} // namespace

double phi_coordinate(const DiscreteManifold& m, const GoodCover& cover, int ball_index,
                      VertexId x) {
    const CoverBall& b = cover.balls[ball_index];
    const double d = distance(m, b.center, x);
    if (d >= b.radius) return 0.0;
    if (d <= b.radius / 2.0) return b.radius;
    return 2.0 * (b.radius - d);
}

FaceKey face_of_point(const DiscreteManifold& m, const GoodCover& cover, VertexId x) {
    FaceKey key;
    for (int bi : cover.containing[x]) {
        const CoverBall& b = cover.balls[bi];
        const double d = distance(m, b.center, x);
        if (d >= b.radius) continue;
        if (d <= b.radius / 2.0)
            key.i1.push_back(bi);
        else
            key.i01.push_back(bi);
    }
    std::sort(key.i1.begin(), key.i1.end());
    std::sort(key.i01.begin(), key.i01.end());
    if (key.i1.empty())
        throw InvariantViolation("image coordinate has no pinned index; half-balls do not cover");
    return key;
}

RectangularNerve build_nerve(const DiscreteManifold& m, const GoodCover& cover,
                             size_t face_budget) {
    MultiplicityProfile mult = multiplicity_function(m, cover);
    std::vector<double> radii(cover.size());
    for (int bi = 0; bi < cover.size(); ++bi) radii[bi] = cover.balls[bi].radius;

    std::unordered_map<FaceKey, std::pair<bool, double>, FaceKeyHash> found;
    std::vector<FaceKey> realized;
    for (VertexId x = 0; x < m.vertex_count(); ++x) {
        FaceKey key = face_of_point(m, cover, x);
        auto [it, fresh] = found.emplace(key, std::make_pair(true, 0.0));
        it->second.first = true;
        it->second.second +=
            m.weight[x] * std::pow(2.0 * std::sqrt(static_cast<double>(mult.m[x])), m.n);
        if (fresh) realized.push_back(key);
    }
    std::sort(realized.begin(), realized.end());

    // star completion: single-index promotions from the point-realized faces,
    // kept only when the enlarged index family still shares a vertex
    std::deque<FaceKey> queue;
    for (const FaceKey& g : realized) queue.push_back(g);
    for (const FaceKey& g : realized) {
        std::vector<VertexId> support;
        bool first = true;
        for (int idx : g.i1) {
            support = first ? cover.balls[idx].members
                            : intersect_sorted(support, cover.balls[idx].members);
            first = false;
        }
        for (int idx : g.i01) support = intersect_sorted(support, cover.balls[idx].members);
        std::vector<char> in_family(cover.size(), 0);
        for (int idx : g.i1) in_family[idx] = 1;
        for (int idx : g.i01) in_family[idx] = 1;
        std::vector<int> candidates;
        for (VertexId v : support)
            for (int bi : cover.containing[v])
                if (!in_family[bi]) candidates.push_back(bi);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        for (int bi : candidates) {
            FaceKey promoted{g.i1, sorted_insert(g.i01, bi)};
            if (found.emplace(promoted, std::make_pair(false, 0.0)).second) {
                if (found.size() > face_budget)
                    throw InvariantViolation("nerve face budget exceeded");
                queue.push_back(std::move(promoted));
            }
        }
    }
    close_under_boundary(found, queue, face_budget);
    return assemble(std::move(radii), std::move(found));
}

RectangularNerve RectangularNerve::from_faces(std::vector<double> radii,
                                              const std::vector<FaceKey>& top_faces) {
    std::unordered_map<FaceKey, std::pair<bool, double>, FaceKeyHash> found;
    std::deque<FaceKey> queue;
    for (const FaceKey& key : top_faces) {
        if (key.i1.empty()) throw InputError("face must pin at least one coordinate");
        if (found.emplace(key, std::make_pair(false, 0.0)).second) queue.push_back(key);
    }
    close_under_boundary(found, queue, 1'000'000);
    return assemble(std::move(radii), std::move(found));
}

PhiImageEstimate compute_image_estimates(const DiscreteManifold& m, const GoodCover& cover,
                                         const RectangularNerve& nerve) {
    (void)m;
    (void)cover;
    PhiImageEstimate est;
    est.method_tag = "lipschitz-jacobian (2 sqrt m)^n scattered over face closures";
    est.per_face.assign(nerve.size(), 0.0);
    for (int f = 0; f < nerve.size(); ++f) {
        if (!nerve.faces[f].realized) continue;
        const double mass = nerve.faces[f].point_mass;
        est.total += mass;
        for (int g : nerve.closure_ids(f)) est.per_face[g] += mass;
    }
    return est;
}

double star_preimage_volume(const DiscreteManifold& m, const GoodCover& cover,
                            const RectangularNerve& nerve, int face) {
    const FaceKey& key = nerve.faces[face].key;
    MultiplicityProfile mult = multiplicity_function(m, cover);
    // smallest participating ball
    int smallest = -1;
    for (int idx : key.i1)
        if (smallest < 0 || cover.balls[idx].radius < cover.balls[smallest].radius) smallest = idx;
    for (int idx : key.i01)
        if (smallest < 0 || cover.balls[idx].radius < cover.balls[smallest].radius) smallest = idx;
    double vol = 0.0;
    for (VertexId x = 0; x < m.vertex_count(); ++x) {
        bool inside = true;
        for (int idx : key.i01) {
            double phi = phi_coordinate(m, cover, idx, x);
            if (!(phi > 0.0 && phi < cover.balls[idx].radius)) { inside = false; break; }
        }
        if (inside)
            for (int idx : key.i1)
                if (!(phi_coordinate(m, cover, idx, x) > 0.0)) { inside = false; break; }
        if (inside)
            for (int idx = 0; idx < cover.size() && inside; ++idx) {
                if (std::binary_search(key.i1.begin(), key.i1.end(), idx)) continue;
                if (std::binary_search(key.i01.begin(), key.i01.end(), idx)) continue;
                if (!(phi_coordinate(m, cover, idx, x) < cover.balls[idx].radius)) inside = false;
            }
        if (!inside) continue;
        if (smallest >= 0 &&
            !std::binary_search(cover.balls[smallest].members.begin(),
                                cover.balls[smallest].members.end(), x))
            throw InvariantViolation("star preimage escapes the smallest participating ball");
        vol += m.weight[x] * std::pow(2.0 * std::sqrt(static_cast<double>(mult.m[x])), m.n);
    }
    return vol;
}

FaceRadiusAudit face_radius_audit(const RectangularNerve& nerve, const ConstantsTable& constants) {
    FaceRadiusAudit audit;
    audit.worst_margin = std::numeric_limits<double>::infinity();
    for (int f = 0; f < nerve.size(); ++f) {
        const RectFace& face = nerve.faces[f];
        if (face.dim < 1) continue;
        double bound = constants.r1_prefactor * std::exp(-constants.beta * face.dim);
        double margin = bound - face.r1;
        if (margin < audit.worst_margin) {
            audit.worst_margin = margin;
            audit.worst_face = f;
        }
        if (face.r1 > bound) {
            audit.pass = false;
            audit.violations.push_back(f);
        }
    }
    if (!std::isfinite(audit.worst_margin)) audit.worst_margin = 0.0;
    return audit;
}

std::string nerve_to_json(const RectangularNerve& nerve) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RectFace& f : nerve.faces)
        arr.push_back({{"I_1", f.key.i1}, {"I_01", f.key.i01}, {"r_sorted", f.r_sorted}});
    return arr.dump();
}

std::string estimates_csv(const RectangularNerve& nerve, const PhiImageEstimate& est,
                          const ConstantsTable& constants, double v1) {
    std::ostringstream out;
    out.precision(17);
    out << "face_key,d,r1,star_volume_bound,image_bound_rhs,margin\n";
    for (int f = 0; f < nerve.size(); ++f) {
        const RectFace& face = nerve.faces[f];
        double rhs = constants.image_prefactor * v1 * std::pow(face.r1, constants.n + 1) *
                     std::exp(-constants.beta * face.dim);
        out << face.key.to_string() << ',' << face.dim << ',' << face.r1 << ',' << est.per_face[f]
            << ',' << rhs << ',' << rhs - est.per_face[f] << '\n';
    }
    return out.str();
}

} // namespace nervecraft
