#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nervecraft/nerve.hpp"

namespace nervecraft {

/// Volume of the Euclidean unit n-ball.
double unit_ball_volume(int n);

/// Clamp-and-stretch map on [0, r]: [0, dr] -> 0, [r - dr, r] -> r, linear in
/// between. Lipschitz constant exactly 1/(1 - 2 delta).
double basic_interval_map(double r, double delta, double t);

/// ln of prod_{l >= n+1} (1 - 2 delta(l))^{-n} with
/// delta(l) = (2 epsilon e^{-beta l} / omega_n)^{1/n}.
/// Returns +inf when some delta(l) >= 1/2.
double log_retraction_product(int n, double beta, double epsilon);

/// Largest epsilon (to 1e-9 relative) with product < 2 and all delta(l) < 1/2.
double epsilon_threshold(int n, double beta);

double delta_schedule(int n, double beta, double epsilon, int k);

enum class LedgerMode { ThinOnly, ThickThin };

struct DeformationSchedule {
    int n = 0;
    double beta = 0.0;
    double epsilon = 0.0;
    double omega = 0.0;             // unit n-ball volume
    double log_product = 0.0;       // ln of the full retraction product
    double product_bound = 0.0;
    // thick/thin extras
    LedgerMode mode = LedgerMode::ThinOnly;
    double v0 = 0.0;
    double c1 = 0.0;                // thin/thick threshold prefactor
    double thick_dim_bound = 0.0;   // thick faces only occur at dim <= this

    double delta(int k) const { return delta_schedule(n, beta, epsilon, k); }
    // Federer-Fleming stretch for pushing a chain out of a d-face.
    double stretch_factor(int d) const { return 2.0 * d * std::pow(3.0, d); }
    double log_stretch_cap() const;
};

DeformationSchedule make_thin_schedule(int n, double beta, double epsilon);
DeformationSchedule make_thick_thin_schedule(int n, double beta, double epsilon, double v0,
                                             double c1);

struct ChainLedger {
    std::vector<double> u;          // per-face mass bound, aligned with nerve.faces
    double total_mass = 0.0;        // bound on the full cycle mass |z_D|
    int k_current = 0;
    LedgerMode mode = LedgerMode::ThinOnly;
    struct Step {
        int k = 0;
        std::string kind;           // "surgery" | "retraction"
        double factor = 1.0;
    };
    std::vector<Step> history;
};

ChainLedger init_ledger(const RectangularNerve& nerve, const PhiImageEstimate& estimates,
                        LedgerMode mode);

struct Certificate {
    enum class Kind { NerveNull, NormBound, HypothesisFailed };
    Kind kind = Kind::NerveNull;
    // nerve_null: final top-dimension masses
    struct FaceMass {
        std::string face;
        double mass = 0.0;
        double volume = 0.0;
    };
    std::vector<FaceMass> final_masses;
    // norm_bound
    double coefficient_sum = 0.0;   // sum |c_i|
    std::vector<FaceMass> coefficients;
    // hypothesis_failed
    std::string violating_face;
    double violating_mass = 0.0;
    double violating_bound = 0.0;
};

struct TraceRecord {
    int k = 0;
    std::string step;
    double factor = 1.0;
    std::string worst_face;
    double worst_margin = 0.0;
    double pruning_delta = 0.0;     // s(F)/r1(F) for surgery steps
};

struct DeformationTrace {
    std::vector<TraceRecord> records;
    double cumulative_factor = 1.0;
    double log_initial_mass = 0.0;
    double log_final_mass_bound = 0.0;
    int thick_faces_seen = 0;
    int max_thick_dim = -1;

    std::string to_jsonl() const;
};

struct DeformationResult {
    Certificate certificate;
    DeformationTrace trace;
};

DeformationResult run_thin_deformation(const RectangularNerve& nerve, ChainLedger ledger,
                                       const DeformationSchedule& schedule);

DeformationResult run_thick_thin_deformation(const RectangularNerve& nerve, ChainLedger ledger,
                                             const DeformationSchedule& schedule);

std::string certificate_to_json(const Certificate& cert);

} // namespace nervecraft
