#include "nervecraft/multiplicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace nervecraft {

namespace {

bool sorted_intersects(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j]) ++i; else ++j;
    }
    return false;
}

// Pairwise ball intersections through vertex co-occurrence.
std::vector<std::vector<int>> intersection_lists(const GoodCover& cover, int vertex_count) {
    std::unordered_set<int64_t> pairs;
    for (VertexId v = 0; v < vertex_count; ++v) {
        const auto& bs = cover.containing[v];
        for (size_t i = 0; i < bs.size(); ++i)
            for (size_t j = i + 1; j < bs.size(); ++j)
                pairs.insert(static_cast<int64_t>(bs[i]) * cover.size() + bs[j]);
    }
    std::vector<std::vector<int>> out(cover.size());
    for (int64_t key : pairs) {
        int a = static_cast<int>(key / cover.size());
        int b = static_cast<int>(key % cover.size());
        out[a].push_back(b);
        out[b].push_back(a);
    }
    for (auto& lst : out) std::sort(lst.begin(), lst.end());
    return out;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const size_t k = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < k; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

} // namespace

int MultiplicityProfile::max_multiplicity() const {
    int mm = 0;
    for (int v : m) mm = std::max(mm, v);
    return mm;
}

MultiplicityProfile multiplicity_function(const DiscreteManifold& m, const GoodCover& cover) {
    MultiplicityProfile profile;
    profile.m.assign(m.vertex_count(), 0);
    for (const CoverBall& b : cover.balls)
        for (VertexId v : b.members) ++profile.m[v];
    return profile;
}

LayerDecomposition build_layers(const GoodCover& cover, const std::vector<VertexId>& region) {
    if (region.empty()) throw InputError("layer region must be nonempty");
    LayerDecomposition ld;
    ld.layer_of.assign(cover.size(), -1);
    std::vector<VertexId> sorted_region = region;
    std::sort(sorted_region.begin(), sorted_region.end());
    for (int bi = 0; bi < cover.size(); ++bi)
        if (sorted_intersects(cover.balls[bi].members, sorted_region))
            ld.participating.push_back(bi);
    // largest radius first, center id breaking ties
    std::vector<int> order = ld.participating;
    std::stable_sort(order.begin(), order.end(), [&cover](int a, int b) {
        if (cover.balls[a].radius != cover.balls[b].radius)
            return cover.balls[a].radius > cover.balls[b].radius;
        return cover.balls[a].center < cover.balls[b].center;
    });
    std::vector<char> placed(cover.size(), 0);
    size_t remaining = order.size();
    while (remaining > 0) {
        std::vector<int> layer;
        std::vector<char> occupied;   // vertices claimed by this layer
        for (int bi : order) {
            if (placed[bi]) continue;
            const auto& mem = cover.balls[bi].members;
            bool free = true;
            if (!occupied.empty())
                for (VertexId v : mem)
                    if (occupied[v]) { free = false; break; }
            if (!free) continue;
            if (occupied.empty()) occupied.assign(cover.containing.size(), 0);
            for (VertexId v : mem) occupied[v] = 1;
            placed[bi] = 1;
            ld.layer_of[bi] = ld.layer_count();
            layer.push_back(bi);
            --remaining;
        }
        ld.layers.push_back(std::move(layer));
    }
    return ld;
}

void compute_order_and_cores(const DiscreteManifold& m, const GoodCover& cover,
                             LayerDecomposition& ld) {
    auto inter = intersection_lists(cover, m.vertex_count());
    for (int k = 0; k < cover.size(); ++k) {
        int dk = ld.layer_of[k];
        if (dk < 0) continue;
        const double rk = cover.balls[k].radius;
        const auto& nbrs = inter[k];
        for (size_t a = 0; a < nbrs.size(); ++a) {
            int i = nbrs[a];
            if (ld.layer_of[i] < 0 || ld.layer_of[i] >= dk) continue;
            if (!(2.0 * cover.balls[i].radius <= rk)) continue;
            for (size_t b = 0; b < nbrs.size(); ++b) {
                int j = nbrs[b];
                if (j == i || ld.layer_of[j] != ld.layer_of[i]) continue;
                if (!(rk <= cover.balls[j].radius)) continue;
                if (!(2.0 * cover.balls[i].radius <= cover.balls[j].radius))
                    throw InvariantViolation("order edge without strict radius doubling");
                ld.order_edges.emplace_back(i, j, k);
            }
        }
    }
    // A ball is maximal iff it has no outgoing generated relation; the
    // transitive closure adds no new maximal elements because radii strictly
    // double along every edge (acyclicity for free).
    std::vector<char> has_out(cover.size(), 0);
    for (const auto& [i, j, k] : ld.order_edges) {
        (void)j; (void)k;
        has_out[i] = 1;
    }
    ld.max_of_layer.assign(ld.layer_count(), {});
    ld.core_of_layer.assign(ld.layer_count(), {});
    for (int d = 0; d < ld.layer_count(); ++d) {
        for (int bi : ld.layers[d])
            if (!has_out[bi]) ld.max_of_layer[d].push_back(bi);
        std::vector<VertexId> core;
        for (int bi : ld.max_of_layer[d]) {
            auto tenth = cover.balls[bi].sub_ball(0.1);
            core.insert(core.end(), tenth.begin(), tenth.end());
        }
        std::sort(core.begin(), core.end());
        core.erase(std::unique(core.begin(), core.end()), core.end());
        ld.core_of_layer[d] = std::move(core);
    }
    ld.cores_computed = true;
}

double neighborhood_volume(const DiscreteManifold& m, const std::vector<VertexId>& region,
                           double w) {
    if (region.size() == static_cast<size_t>(m.vertex_count())) return m.total_volume;
    if (m.mode == MetricMode::ExactClosedForm) {
        double vol = 0.0;
        for (VertexId y = 0; y < m.vertex_count(); ++y) {
            for (VertexId u : region)
                if (distance(m, y, u) < w) {
                    vol += m.weight[y];
                    break;
                }
        }
        return vol;
    }
    // multi-source Dijkstra with cutoff
    std::vector<double> dist(m.vertex_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (VertexId u : region) {
        dist[u] = 0.0;
        heap.push({0.0, u});
    }
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u] || d >= w) continue;
        for (const auto& [v, len] : m.adj[u]) {
            if (d + len < dist[v]) {
                dist[v] = d + len;
                heap.push({d + len, v});
            }
        }
    }
    double vol = 0.0;
    for (VertexId y = 0; y < m.vertex_count(); ++y)
        if (dist[y] < w) vol += m.weight[y];
    return vol;
}

MultiplicityProfile high_multiplicity_tail(const DiscreteManifold& m, const GoodCover& cover,
                                           const std::vector<VertexId>& region, double w) {
    if (!(w > 0.0) || !(w < 0.01)) throw InputError("neighborhood width must lie in (0, 1/100)");
    MultiplicityProfile profile = multiplicity_function(m, cover);
    profile.region = region;
    profile.w = w;
    profile.neighborhood_volume = neighborhood_volume(m, region, w);

    LayerDecomposition ld = build_layers(cover, region);
    compute_order_and_cores(m, cover, ld);
    const ConstantsTable constants = derive_multiplicity_constants(m.n);

    std::vector<char> in_region(m.vertex_count(), 0);
    for (VertexId v : region) in_region[v] = 1;
    const int mmax = profile.max_multiplicity();
    profile.tail.assign(mmax + 2, 0.0);
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        if (in_region[v] && profile.m[v] >= 1) profile.tail[profile.m[v]] += m.weight[v];
    for (int lam = mmax - 1; lam >= 1; --lam) profile.tail[lam] += profile.tail[lam + 1];

    // layer-count profile per vertex: how many layers with index >= lambda hold x
    const int lc = ld.layer_count();
    profile.lmu.assign(lc, std::vector<double>(lc + 2, 0.0));
    for (VertexId v = 0; v < m.vertex_count(); ++v) {
        std::vector<int> ds;
        for (int bi : cover.containing[v])
            if (ld.layer_of[bi] >= 0) ds.push_back(ld.layer_of[bi]);
        std::sort(ds.begin(), ds.end());
        ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
        if (ds.empty()) continue;
        // lambda is 1-based layer index; layer_of is 0-based
        for (int lam = 1; lam <= lc; ++lam) {
            auto it = std::lower_bound(ds.begin(), ds.end(), lam - 1);
            int cnt = static_cast<int>(ds.end() - it);
            for (int mu = 1; mu <= cnt; ++mu) profile.lmu[mu - 1][lam] += m.weight[v];
        }
    }
    profile.f.assign(lc + 2, 0.0);
    for (int lam = 1; lam <= lc; ++lam) {
        double sum = 0.0;
        for (int mu = 0; mu < lc; ++mu) sum += profile.lmu[mu][lam];
        profile.f[lam] = sum / constants.eta;
    }

    // decay inequality margin with the derived constants
    const double threshold = constants.gamma * std::log(1.0 / w);
    profile.decay_margin = std::numeric_limits<double>::infinity();
    for (int lam = 1; lam <= mmax + 1; ++lam) {
        double t = threshold + lam;
        double lhs = 0.0;
        if (t <= mmax) lhs = profile.tail[static_cast<int>(std::ceil(t))];
        double rhs = std::exp(-constants.alpha * lam) * profile.neighborhood_volume;
        profile.decay_margin = std::min(profile.decay_margin, rhs - lhs);
    }

    // decay-rate fit over ln|M_U|; the derived threshold exceeds any finite
    // instance's multiplicity, so fall back to the observed tail when empty
    int lam_hi = mmax;
    int lam_lo;
    if (std::ceil(threshold) + 1.0 > static_cast<double>(lam_hi)) {
        profile.fit_used_observed_range = true;
        lam_lo = 1;
    } else {
        lam_lo = static_cast<int>(std::ceil(threshold)) + 1;
    }
    std::vector<double> xs, ys;
    for (int lam = std::max(1, lam_lo); lam <= lam_hi; ++lam)
        if (profile.tail[lam] > 0.0) {
            xs.push_back(lam);
            ys.push_back(std::log(profile.tail[lam]));
        }
    if (xs.size() >= 3) {
        profile.fitted_alpha = -fit_slope(xs, ys);
        profile.fit_vacuous = false;
    }
    return profile;
}

ConstantsTable derive_multiplicity_constants(int n) {
    if (n < 1) throw InputError("dimension must be positive");
    ConstantsTable t;
    t.n = n;
    auto log10v = [](double x) { return std::log(10.0) * x; };
    std::ostringstream step;
    step.precision(6);

    // eta: balls containing a common point with radii within a factor 2 (or
    // meeting a ball of comparable radius) have disjoint sixth-balls inside a
    // comparison ball that reasonable growth prices at 10^{4(n+3)}.
    t.eta = std::pow(10.0, 4.0 * (n + 3));
    step.str("");
    step << "eta = 10^(4(n+3)) = " << t.eta
         << "  [sixth-balls disjoint; each has >= 10^-(4(n+3)) of the enclosing "
            "comparison ball by reasonable growth; comparison radius stays within "
            "the 100x growth window for radius ratios in [1/15, 2]]";
    t.derivation_log.push_back(step.str());

    // gamma: a ball in layer d meets a larger ball in every earlier layer;
    // larger radii up to 1/100 span at most ln(1/r)/ln 2 + 1 octaves, eta per
    // octave, and the additive slack is absorbed using ln(1/r) >= ln 100.
    t.gamma = t.eta * (1.0 / std::log(2.0) + 2.0 / std::log(100.0));
    step.str("");
    step << "gamma = eta*(1/ln2 + 2/ln100) = " << t.gamma
         << "  [depth <= 1 + eta*(ln(1/r)/ln2 + 1) <= gamma*ln(1/r) for r <= 1/100]";
    t.derivation_log.push_back(step.str());

    // c': F(l) - F(l+1) >= (1/eta)|Core(l)|, |L(l)| <= eta|Core(l)|,
    // |L^1(l)| <= eta|L(l)|, F(l) <= |L^1(l)|  =>  loss >= eta^-3 F(l).
    t.c_prime = std::pow(t.eta, -3.0);
    t.alpha = -std::log1p(-t.c_prime);
    t.sandwich_constant = t.eta;
    step.str("");
    step << "c' = eta^-3 = " << t.c_prime << ", alpha = -ln(1-c') = " << t.alpha
         << "  [core insulation 1/eta, core sandwich eta, triple-ball envelope eta]";
    t.derivation_log.push_back(step.str());

    // beta: d balls sharing a point occupy at least d/eta octaves below 1/100,
    // so the smallest radius obeys r1 <= (1/100)*2^(1 - d/eta).
    t.beta = std::log(2.0) / t.eta;
    t.r1_prefactor = 0.02;
    step.str("");
    step << "beta = ln2/eta = " << t.beta << ", r1 prefactor = 2/100"
         << "  [octave counting: r1(F) <= (1/100)*2^(1-d/eta) = 0.02*exp(-beta d)]";
    t.derivation_log.push_back(step.str());

    // Image prefactor. With lambda0 = 2*gamma*ln(1/r):
    //   integral of (2 sqrt(m))^n over a radius-r good ball
    //     <= |B| * [ (4 lambda0)^{n/2}
    //               + eta*2^{3n/2}*(lambda0^{n/2}/alpha + e^alpha Gamma(n/2+1)/alpha^{n/2+1}) ]
    // and r * (that bracket) <= C_sup uniformly for r <= 1/100 via
    // (ln u)^{n/2} <= n^{n/2} sqrt(u).
    const double ln_gamma_fn = std::lgamma(n / 2.0 + 1.0);
    const double log_alpha = std::log(t.alpha);
    // log of the three summands of C_sup
    const double l1 = (n / 2.0) * std::log(8.0 * t.gamma * n) - std::log(10.0);
    const double l2 = std::log(t.eta) + (3.0 * n / 2.0) * std::log(2.0) +
                      (n / 2.0) * std::log(2.0 * t.gamma * n) - std::log(10.0) - log_alpha;
    const double l3 = std::log(t.eta) + (3.0 * n / 2.0) * std::log(2.0) + t.alpha + ln_gamma_fn -
                      std::log(100.0) - (n / 2.0 + 1.0) * log_alpha;
    double lmax = std::max({l1, l2, l3});
    const double log_c_sup =
        lmax + std::log(std::exp(l1 - lmax) + std::exp(l2 - lmax) + std::exp(l3 - lmax));
    t.log_image_prefactor = log10v(2.0 * n + 6) - std::log(50.0) + log_c_sup;
    t.image_prefactor = std::exp(t.log_image_prefactor);
    step.str("");
    step << "image prefactor C = 10^(2n+6)/50 * C_sup, ln C = " << t.log_image_prefactor
         << "  [|B| <= 10^(2n+6) V(1) r^(n+3); Jacobian (2 sqrt m)^n integrated "
            "against the multiplicity decay; spare r^2 converted with "
            "r <= 0.02 exp(-beta d)]";
    t.derivation_log.push_back(step.str());

    // Total image bound: same integral over all of M with lambda0' = 2*gamma*ln(100).
    const double lam0 = 2.0 * t.gamma * std::log(100.0);
    const double g1 = (n / 2.0) * std::log(4.0 * lam0);
    const double g2 = (3.0 * n / 2.0) * std::log(2.0) + (n / 2.0) * std::log(lam0) - log_alpha;
    const double g3 = (3.0 * n / 2.0) * std::log(2.0) + t.alpha + ln_gamma_fn -
                      (n / 2.0 + 1.0) * log_alpha;
    lmax = std::max({g1, g2, g3});
    t.log_image_total_prefactor =
        lmax + std::log(std::exp(g1 - lmax) + std::exp(g2 - lmax) + std::exp(g3 - lmax));
    t.image_total_prefactor = std::exp(t.log_image_total_prefactor);
    step.str("");
    step << "total image prefactor, ln = " << t.log_image_total_prefactor
         << "  [multiplicity decay over all of M at width 1/100]";
    t.derivation_log.push_back(step.str());
    return t;
}

std::string tail_profile_csv(const MultiplicityProfile& profile) {
    std::ostringstream out;
    out.precision(17);
    out << "lambda,volume_MU,volume_L1,F\n";
    const size_t lmax = profile.tail.empty() ? 0 : profile.tail.size() - 1;
    for (size_t lam = 1; lam <= lmax; ++lam) {
        double l1 = (!profile.lmu.empty() && lam < profile.lmu[0].size()) ? profile.lmu[0][lam] : 0.0;
        double f = lam < profile.f.size() ? profile.f[lam] : 0.0;
        out << lam << ',' << profile.tail[lam] << ',' << l1 << ',' << f << '\n';
    }
    return out.str();
}

std::string constants_to_json(const ConstantsTable& t) {
    nlohmann::json j;
    j["n"] = t.n;
    j["eta"] = t.eta;
    j["gamma"] = t.gamma;
    j["c_prime"] = t.c_prime;
    j["alpha"] = t.alpha;
    j["beta"] = t.beta;
    j["r1_prefactor"] = t.r1_prefactor;
    j["image_prefactor"] = t.image_prefactor;
    j["log_image_prefactor"] = t.log_image_prefactor;
    j["image_total_prefactor"] = t.image_total_prefactor;
    j["log_image_total_prefactor"] = t.log_image_total_prefactor;
    j["sandwich_constant"] = t.sandwich_constant;
    j["derivation_log"] = t.derivation_log;
    return j.dump(2);
}

} // namespace nervecraft
