#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "nervecraft/good_cover.hpp"

namespace nervecraft {

/// Layered Vitali decomposition of the cover balls meeting a region, with the
/// partial order, the maximal balls of each layer, and their cores.
struct LayerDecomposition {
    std::vector<int> participating;            // cover ball ids meeting U
    std::vector<int> layer_of;                 // per cover ball; -1 if absent; 0-based layer index
    std::vector<std::vector<int>> layers;      // layers[d] = ball ids of Layer(d+1)
    // order_edges: (i, j, k) meaning ball i < ball j, generated by the
    // lower-layer ball k meeting both with 2 r_i <= r_k <= r_j.
    std::vector<std::tuple<int, int, int>> order_edges;
    std::vector<std::vector<int>> max_of_layer;
    std::vector<std::vector<VertexId>> core_of_layer;   // vertex sets, sorted
    bool cores_computed = false;

    int layer_count() const { return static_cast<int>(layers.size()); }
};

struct MultiplicityProfile {
    std::vector<int> m;                        // per-vertex multiplicity
    std::vector<VertexId> region;              // U
    double w = 0.0;
    double neighborhood_volume = 0.0;          // |N_w(U)|
    std::vector<double> tail;                  // tail[lambda] = |M_U(lambda)|, index 0 unused
    std::vector<std::vector<double>> lmu;      // lmu[mu-1][lambda] = |L^mu(lambda)|
    std::vector<double> f;                     // F(lambda), averaged over mu = 1..eta
    double fitted_alpha = 0.0;
    bool fit_vacuous = true;
    bool fit_used_observed_range = false;
    double decay_margin = 0.0;                 // min over lambda of RHS - LHS

    int max_multiplicity() const;
};

/// Every constant in the quantitative chain, produced by explicit arithmetic
/// over the cover conditions; each step is appended to derivation_log.
struct ConstantsTable {
    int n = 0;
    double eta = 0.0;           // count bound for equal-scale balls meeting a ball
    double gamma = 0.0;         // layer-depth coefficient: depth <= gamma * ln(1/r)
    double c_prime = 0.0;       // per-step loss of F: F(l+1) <= (1 - c') F(l)
    double alpha = 0.0;         // decay exponent, -ln(1 - c')
    double beta = 0.0;          // face-radius decay: r1(F) <= r1_prefactor * exp(-beta d)
    double r1_prefactor = 0.0;
    double image_prefactor = 0.0;        // star-image bound prefactor
    double log_image_prefactor = 0.0;
    double image_total_prefactor = 0.0;  // total-image bound prefactor
    double log_image_total_prefactor = 0.0;
    double sandwich_constant = 0.0;      // |L(d)| <= C |Core(d)|
    std::vector<std::string> derivation_log;
};

MultiplicityProfile multiplicity_function(const DiscreteManifold& m, const GoodCover& cover);

LayerDecomposition build_layers(const GoodCover& cover, const std::vector<VertexId>& region);

void compute_order_and_cores(const DiscreteManifold& m, const GoodCover& cover,
                             LayerDecomposition& layers);

MultiplicityProfile high_multiplicity_tail(const DiscreteManifold& m, const GoodCover& cover,
                                           const std::vector<VertexId>& region, double w);

ConstantsTable derive_multiplicity_constants(int n);

// |N_w(U)|: total weight of vertices with dist(y, U) < w.
double neighborhood_volume(const DiscreteManifold& m, const std::vector<VertexId>& region,
                           double w);

std::string tail_profile_csv(const MultiplicityProfile& profile);
std::string constants_to_json(const ConstantsTable& table);

} // namespace nervecraft
