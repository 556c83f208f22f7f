#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nervecraft/good_cover.hpp"
#include "nervecraft/multiplicity.hpp"

namespace nervecraft {

/// A face of the rectangle prod_i [0, r_i]: coordinates pinned at the top
/// (I_1), free coordinates (I_01), everything else implicitly pinned at 0.
struct FaceKey {
    std::vector<int> i1;    // sorted
    std::vector<int> i01;   // sorted

    bool operator==(const FaceKey& o) const { return i1 == o.i1 && i01 == o.i01; }
    bool operator<(const FaceKey& o) const {
        if (i1 != o.i1) return i1 < o.i1;
        return i01 < o.i01;
    }
    std::string to_string() const;
};

struct FaceKeyHash {
    size_t operator()(const FaceKey& k) const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t x) {
            h ^= x + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        };
        for (int v : k.i1) mix(static_cast<uint64_t>(v) + 1);
        mix(0xffffffffull);
        for (int v : k.i01) mix(static_cast<uint64_t>(v) + 1);
        return static_cast<size_t>(h);
    }
};

struct RectFace {
    FaceKey key;
    int dim = 0;                       // |I_01|
    std::vector<double> r_sorted;      // free-coordinate lengths, ascending
    double volume = 1.0;               // product of r_sorted (1 for vertices)
    double r1 = 0.0;                   // min free length; min I_1 length for vertices
    bool realized = false;             // hit by some vertex image
    double point_mass = 0.0;           // sum of w(x)(2 sqrt m(x))^n over realizing x
};

/// F in closure(G): F arises from G by pinning some free coordinates.
bool in_closure(const FaceKey& f, const FaceKey& g);

struct RectangularNerve {
    std::vector<double> radii;         // ambient rectangle dimensions, by ball id
    std::vector<RectFace> faces;       // sorted by key
    int dim_max = 0;
    int ambient_dim() const { return static_cast<int>(radii.size()); }
    int size() const { return static_cast<int>(faces.size()); }

    int face_id(const FaceKey& key) const;          // -1 if absent
    std::vector<int> closure_ids(int face) const;   // all faces in cl(face), incl. itself
    std::vector<int> star_ids(int face) const;      // all G with face in cl(G), incl. itself

    // Boundary facets of a face: for the a-th free coordinate, the two pinned
    // faces with the cubical sign (-1)^(a-1) * (top - bottom).
    struct Facet {
        FaceKey key;
        int sign = 1;
    };
    std::vector<Facet> boundary(int face) const;

    /// Abstract complex from explicit top faces, closed under boundary.
    static RectangularNerve from_faces(std::vector<double> radii,
                                       const std::vector<FaceKey>& top_faces);
};

double phi_coordinate(const DiscreteManifold& m, const GoodCover& cover, int ball_index,
                      VertexId x);

FaceKey face_of_point(const DiscreteManifold& m, const GoodCover& cover, VertexId x);

RectangularNerve build_nerve(const DiscreteManifold& m, const GoodCover& cover,
                             size_t face_budget = 2'000'000);

struct PhiImageEstimate {
    std::vector<double> per_face;      // aligned with nerve.faces
    double total = 0.0;
    std::string method_tag;
};

/// Upper bound on the image volume inside each star: the pointwise Lipschitz
/// Jacobian (2 sqrt m)^n integrated over the star preimage, aggregated from
/// the per-vertex image faces.
PhiImageEstimate compute_image_estimates(const DiscreteManifold& m, const GoodCover& cover,
                                         const RectangularNerve& nerve);

/// Same quantity for a single face, summed directly from the star-membership
/// predicate; also verifies the predicate set lies inside the smallest
/// participating ball.
double star_preimage_volume(const DiscreteManifold& m, const GoodCover& cover,
                            const RectangularNerve& nerve, int face);

struct FaceRadiusAudit {
    bool pass = true;
    double worst_margin = 0.0;         // min over faces of bound - r1
    int worst_face = -1;
    std::vector<int> violations;
};

FaceRadiusAudit face_radius_audit(const RectangularNerve& nerve, const ConstantsTable& constants);

std::string nerve_to_json(const RectangularNerve& nerve);
std::string estimates_csv(const RectangularNerve& nerve, const PhiImageEstimate& est,
                          const ConstantsTable& constants, double v1);

} // namespace nervecraft
