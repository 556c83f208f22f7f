#pragma once

#include <string>
#include <vector>

#include "nervecraft/manifold.hpp"

namespace nervecraft {

// All lengths here are in scaled units: the caller has already divided by the
// target radius, so the literal thresholds (1/100, 10^{4(n+3)}, 10^{2n+6})
// apply as written.

struct GoodBallVerdict {
    bool reasonable_growth = false;   // condition A
    double outer_volume = 0.0;        // |B(p, 100R)|
    double inner_volume = 0.0;        // |B(p, R/100)|
    double growth_bound = 0.0;        // 10^{4(n+3)} * inner_volume
    bool volume_bound = false;        // condition B
    double ball_volume = 0.0;         // |B(p, R)|
    double volume_bound_rhs = 0.0;    // 10^{2n+6} * V1 * R^{n+3}
    bool small_radius = false;        // condition C: R <= 1/100
    bool below_resolution = false;

    bool good() const { return reasonable_growth && volume_bound && small_radius; }
};

// One rung of the radius ladder R = 10^{-4s-2}.
struct LadderRung {
    int s = 0;
    double radius = 0.0;
    double inner_volume = 0.0;        // |B(p, R/100)|
    double outer_volume = 0.0;        // |B(p, 100R)|
    double inner_density = 0.0;       // inner_volume / (R/100)^n
    double outer_density = 0.0;       // outer_volume / (100R)^n
    bool reasonable_growth = false;
};

struct LadderTrace {
    VertexId vertex = -1;
    std::vector<LadderRung> rungs;
    double chosen_radius = 0.0;
};

struct CoverBall {
    VertexId center = -1;
    double radius = 0.0;
    std::vector<VertexId> members;      // closed ball, sorted by id
    std::vector<double> member_dist;    // aligned

    // members within radius * fraction
    std::vector<VertexId> sub_ball(double fraction) const;
};

struct GoodCover {
    std::vector<CoverBall> balls;
    double v1 = 0.0;                    // cached V(1), shared by condition B
    bool half_cover_ok = false;
    bool sixth_disjoint_ok = false;

    // inverted index: vertex -> ids of balls containing it
    std::vector<std::vector<int>> containing;

    int size() const { return static_cast<int>(balls.size()); }
    void build_index(int vertex_count);
};

struct CoverViolation {
    std::string condition;              // "good_ball" | "half_cover" | "sixth_disjoint"
    int ball_a = -1;
    int ball_b = -1;
    VertexId witness = -1;
    std::string detail;
};

struct CoverReport {
    bool pass = true;
    std::vector<CoverViolation> violations;
};

GoodBallVerdict is_good_ball(const DiscreteManifold& m, VertexId p, double radius, double v1);

/// Walks radii 10^-2, 10^-6, 10^-10, ... and returns the first rung whose
/// ball has reasonable growth. Throws ResolutionExhausted when the next rung
/// falls below what the mesh resolves (5R < h).
LadderTrace find_good_ball(const DiscreteManifold& m, VertexId p, double v1);

GoodCover build_good_cover(const DiscreteManifold& m);

GoodCover build_good_cover(const DiscreteManifold& m, double v1,
                           std::vector<LadderTrace>* traces);

CoverReport validate_cover(const DiscreteManifold& m, const GoodCover& cover);

/// Number of cover balls with radius in [s/2, 2s] whose vertex set meets the
/// probe ball's vertex set.
int count_scale_neighbors(const DiscreteManifold& m, const GoodCover& cover, const Ball& probe);

std::string cover_to_json(const GoodCover& cover);
GoodCover cover_from_json(const DiscreteManifold& m, const std::string& json_text);

} // namespace nervecraft
