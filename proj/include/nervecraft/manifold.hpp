#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nervecraft/errors.hpp"

namespace nervecraft {

using VertexId = int32_t;

enum class MetricMode { GraphGeodesic, ExactClosedForm };

// Closed-form metrics the synthetic generators can emit.
enum class ExactMetric { None, FlatTorus, RoundSphere };

struct Edge {
    VertexId u = 0;
    VertexId v = 0;
    double length = 0.0;
};

/// A finite weighted metric space standing in for a closed Riemannian
/// n-manifold: vertices with volume weights, exact or graph-geodesic
/// distances, and a declared intrinsic dimension.
struct DiscreteManifold {
    int n = 2;                       // intrinsic dimension
    double scale = 1.0;              // global length multiplier applied so far
    MetricMode mode = MetricMode::GraphGeodesic;
    ExactMetric exact = ExactMetric::None;

    std::vector<double> weight;               // per-vertex volume share, > 0
    std::vector<Eigen::Vector3d> pos;         // torus: (x,y,0); sphere: unit vector
    std::vector<Edge> edges;
    std::vector<std::vector<std::pair<VertexId, double>>> adj;

    // closed-form parameters
    double torus_lx = 0.0, torus_ly = 0.0;
    double sphere_radius = 0.0;

    double total_volume = 0.0;
    double resolution_h = 0.0;       // max edge length
    std::string tag;                 // human-readable provenance

    int vertex_count() const { return static_cast<int>(weight.size()); }
    bool valid_vertex(VertexId v) const { return v >= 0 && v < vertex_count(); }

    // Exact diameter for closed-form metrics, +inf otherwise.
    double diameter_upper_bound() const;

    // Checks weights, edge lengths, connectivity; throws InputError.
    void validate() const;

    void finalize();                 // fills adj, total_volume, resolution_h
};

struct Ball {
    VertexId center = -1;
    double radius = 0.0;
    std::vector<VertexId> members;        // sorted by id
    std::vector<double> member_dist;      // aligned with members
    double volume = 0.0;
    bool below_resolution = false;        // radius < 5h warning flag
};

struct VolumeProfile {
    std::vector<double> radii;                        // ascending
    std::vector<VertexId> centers;
    std::vector<std::vector<double>> per_center;      // [center][radius]
    std::vector<double> v_of_r;                       // max over centers
};

double distance(const DiscreteManifold& m, VertexId u, VertexId v);

Ball ball(const DiscreteManifold& m, VertexId p, double radius);

// Volume of the closed ball without materializing members.
double ball_volume(const DiscreteManifold& m, VertexId p, double radius);

VolumeProfile volume_profile(const DiscreteManifold& m,
                             const std::vector<VertexId>& centers,
                             const std::vector<double>& radii);

/// Largest volume of any metric ball of the given radius, centers at vertices.
double max_ball_volume(const DiscreteManifold& m, double radius);

// Returns a copy with every length multiplied by lambda and every weight by
// lambda^n. Member sets of balls are preserved under (radius * lambda).
DiscreteManifold rescaled(const DiscreteManifold& m, double lambda);

DiscreteManifold load_off_mesh(const std::string& path, int n);

DiscreteManifold make_flat_torus(double side, int resolution);
DiscreteManifold make_round_sphere(double radius, int resolution);
DiscreteManifold make_thin_cylinder(double circumference, double length, int resolution);
DiscreteManifold make_dumbbell(double neck_width, int resolution);

// Shape descriptor: {"shape": "flat_torus", "side": 1.0, "resolution": 100}, etc.
DiscreteManifold generate_synthetic(const std::string& shape_json);

std::string volume_profile_csv(const VolumeProfile& profile);

} // namespace nervecraft
