#include "nervecraft/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nervecraft {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double unit_ball_volume(int n) {
    if (n < 1) throw InputError("dimension must be positive");
    return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double basic_interval_map(double r, double delta, double t) {
    if (!(delta >= 0.0) || delta >= 0.5) throw InputError("delta must lie in [0, 1/2)");
    if (t < 0.0 || t > r) throw InputError("argument outside [0, r]");
    if (t <= delta * r) return 0.0;
    if (t >= r - delta * r) return r;
    return (t - delta * r) / (1.0 - 2.0 * delta);
}

double log_retraction_product(int n, double beta, double epsilon) {
    if (n < 1) throw InputError("dimension must be positive");
    if (!(beta > 0.0)) throw InputError("beta must be positive");
    if (epsilon < 0.0) throw InputError("epsilon must be nonnegative");
    if (epsilon == 0.0) return 0.0;
    const double omega = unit_ball_volume(n);
    const double delta0 =
        std::pow(2.0 * epsilon * std::exp(-beta * (n + 1)) / omega, 1.0 / n);
    if (delta0 >= 0.5) return kInf;
    const double rate = beta / n;          // delta(l+1)/delta(l) = e^{-rate}
    if (rate >= 1e-4) {
        // explicit walk down the schedule; geometric bound prices the dropped tail
        double acc = 0.0;
        double d = delta0;
        const double q = std::exp(-rate);
        for (int guard = 0; guard < 50'000'000; ++guard) {
            acc += -static_cast<double>(n) * std::log1p(-2.0 * d);
            double next = d * q;
            double tail = n * 2.0 * next / ((1.0 - 2.0 * next) * (1.0 - q));
            if (tail < 1e-15) return acc;
            d = next;
        }
        throw InvariantViolation("retraction product walk failed to converge");
    }
    // Flat schedules: sum the expanded logarithm instead,
    //   -sum_j ln(1 - 2 d0 q^j) = sum_m (2 d0)^m / (m (1 - q^m)).
    double acc = 0.0;
    double pw = 1.0;
    for (int m = 1; m < 1'000'000; ++m) {
        pw *= 2.0 * delta0;
        double term = pw / (m * (-std::expm1(-m * rate)));
        acc += term;
        if (term < 1e-18 * acc) return n * acc;
    }
    throw InvariantViolation("retraction product series failed to converge");
}

double epsilon_threshold(int n, double beta) {
    const double omega = unit_ball_volume(n);
    auto admissible = [n, beta](double eps) {
        return log_retraction_product(n, beta, eps) < std::log(2.0);
    };
    // delta(n+1) = 1/2 exactly at this epsilon; certainly inadmissible
    double hi = omega * std::pow(0.5, n) * std::exp(beta * (n + 1)) / 2.0;
    double lo = hi * 1e-8;
    while (!admissible(lo)) lo *= 1e-4;
    while (hi / lo > 1.0 + 1e-9) {
        double mid = std::sqrt(hi * lo);
        if (admissible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double delta_schedule(int n, double beta, double epsilon, int k) {
    if (k < n + 1) throw InputError("schedule index must be at least n+1");
    if (epsilon < 0.0) throw InputError("epsilon must be nonnegative");
    double d = std::pow(2.0 * epsilon * std::exp(-beta * k) / unit_ball_volume(n), 1.0 / n);
    if (d >= 0.5) throw InputError("schedule delta reached 1/2; epsilon too large for this k");
    return d;
}

double DeformationSchedule::log_stretch_cap() const {
    if (thick_dim_bound < 1.0) return 0.0;
    return std::log(2.0 * thick_dim_bound) + thick_dim_bound * std::log(3.0);
}

DeformationSchedule make_thin_schedule(int n, double beta, double epsilon) {
    DeformationSchedule s;
    s.n = n;
    s.beta = beta;
    s.epsilon = epsilon;
    s.omega = unit_ball_volume(n);
    s.log_product = log_retraction_product(n, beta, epsilon);
    s.product_bound = std::exp(s.log_product);
    s.mode = LedgerMode::ThinOnly;
    return s;
}

DeformationSchedule make_thick_thin_schedule(int n, double beta, double epsilon, double v0,
                                             double c1) {
    if (!(v0 > 0.0)) throw InputError("V0 must be positive");
    if (!(c1 > 0.0)) throw InputError("thin/thick prefactor must be positive");
    DeformationSchedule s = make_thin_schedule(n, beta, epsilon);
    s.mode = LedgerMode::ThickThin;
    s.v0 = v0;
    s.c1 = c1;
    // thick means r1(F) >= eps/(C1 V0); r1(F) <= 0.02 e^{-beta d} caps the dim
    double arg = 0.02 * c1 * v0 / epsilon;
    s.thick_dim_bound = arg >= 1.0 ? std::floor(std::log(arg) / beta) : -1.0;
    return s;
}

ChainLedger init_ledger(const RectangularNerve& nerve, const PhiImageEstimate& estimates,
                        LedgerMode mode) {
    if (estimates.per_face.size() != static_cast<size_t>(nerve.size()))
        throw InputError("estimates do not cover the nerve faces");
    for (double v : estimates.per_face)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("estimate must be finite and nonnegative");
    ChainLedger ledger;
    ledger.u = estimates.per_face;
    ledger.total_mass = estimates.total;
    ledger.k_current = nerve.dim_max;
    ledger.mode = mode;
    return ledger;
}

namespace {

double entry_bound(const DeformationSchedule& s, const RectFace& f) {
    return s.epsilon * std::pow(f.r1, s.n) * std::exp(-s.beta * f.dim);
}

Certificate hypothesis_failed(const RectangularNerve& nerve, int face, double mass, double bound) {
    Certificate cert;
    cert.kind = Certificate::Kind::HypothesisFailed;
    cert.violating_face = nerve.faces[face].key.to_string();
    cert.violating_mass = mass;
    cert.violating_bound = bound;
    return cert;
}

// worst margin against the running 2*eps bound; also audits it
int audit_running_bound(const RectangularNerve& nerve, const ChainLedger& ledger,
                        const DeformationSchedule& schedule, const std::vector<char>* thin_mask,
                        double* margin_out) {
    int worst = -1;
    double worst_margin = kInf;
    for (int f = 0; f < nerve.size(); ++f) {
        if (thin_mask && !(*thin_mask)[f]) continue;
        double bound = 2.0 * entry_bound(schedule, nerve.faces[f]);
        double margin = bound - ledger.u[f];
        if (margin < worst_margin) {
            worst_margin = margin;
            worst = f;
        }
        if (!(ledger.u[f] < bound))
            throw InvariantViolation("running mass bound violated at face " +
                                     nerve.faces[f].key.to_string() +
                                     "; epsilon is not admissible");
    }
    if (margin_out) *margin_out = worst == -1 ? 0.0 : worst_margin;
    return worst;
}

DeformationResult run_ledger(const RectangularNerve& nerve, ChainLedger ledger,
                             const DeformationSchedule& schedule) {
    const bool thick_mode = schedule.mode == LedgerMode::ThickThin;
    DeformationResult result;
    DeformationTrace& trace = result.trace;
    trace.log_initial_mass = std::log(ledger.total_mass);
    double log_z = trace.log_initial_mass;

    std::vector<char> thin(nerve.size(), 1);
    if (thick_mode)
        for (int f = 0; f < nerve.size(); ++f)
            thin[f] = schedule.c1 * schedule.v0 * nerve.faces[f].r1 < schedule.epsilon ? 1 : 0;

    // entry estimate; in thick/thin mode only thin faces carry it
    for (int f = 0; f < nerve.size(); ++f) {
        if (!thin[f]) continue;
        double bound = entry_bound(schedule, nerve.faces[f]);
        if (!(ledger.u[f] < bound)) {
            result.certificate = hypothesis_failed(nerve, f, ledger.u[f], bound);
            return result;
        }
    }
    if (thick_mode)
        for (int f = 0; f < nerve.size(); ++f)
            if (!thin[f]) {
                ++trace.thick_faces_seen;
                trace.max_thick_dim = std::max(trace.max_thick_dim, nerve.faces[f].dim);
                if (nerve.faces[f].dim > schedule.thick_dim_bound)
                    throw InvariantViolation("thick face above the dimension bound: " +
                                             nerve.faces[f].key.to_string());
            }

    for (int k = nerve.dim_max; k >= schedule.n + 1; --k) {
        const double delta = schedule.delta(k);
        // surgery over the k-faces: thin masses do not increase; thick ones
        // pay the push-to-boundary stretch
        TraceRecord surgery;
        surgery.k = k;
        surgery.step = "surgery";
        surgery.factor = 1.0;
        surgery.pruning_delta = delta;
        double worst_ratio = -kInf;
        bool stretched = false;
        for (int f = 0; f < nerve.size(); ++f) {
            if (nerve.faces[f].dim != k) continue;
            const RectFace& face = nerve.faces[f];
            // pruning radius for the minimal replacement inside this face
            double s_over_r1 =
                std::pow(2.0 * schedule.epsilon * std::exp(-schedule.beta * k) / schedule.omega,
                         1.0 / schedule.n);
            if (std::abs(s_over_r1 - delta) > 1e-12 * std::max(delta, 1e-300))
                throw InvariantViolation("pruning radius disagrees with the schedule");
            if (thick_mode && !thin[f]) {
                double g = schedule.stretch_factor(k);
                ledger.u[f] *= g;
                surgery.factor = g;
                stretched = true;
            }
            double ratio = ledger.u[f] / std::max(face.volume, 1e-300);
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                surgery.worst_face = face.key.to_string();
                surgery.worst_margin = face.volume - ledger.u[f];
            }
        }
        if (stretched) log_z += std::log(surgery.factor);
        ledger.history.push_back({k, "surgery", surgery.factor});
        trace.records.push_back(surgery);

        // retraction: every star mass inflates by the same clamp-stretch power
        double factor = std::pow(1.0 - 2.0 * delta, -static_cast<double>(schedule.n));
        for (double& u : ledger.u) u *= factor;
        trace.cumulative_factor *= factor;
        log_z += std::log(factor);
        TraceRecord retraction;
        retraction.k = k;
        retraction.step = "retraction";
        retraction.factor = factor;
        double margin = 0.0;
        int worst = audit_running_bound(nerve, ledger, schedule, thick_mode ? &thin : nullptr,
                                        &margin);
        if (worst >= 0) retraction.worst_face = nerve.faces[worst].key.to_string();
        retraction.worst_margin = margin;
        ledger.history.push_back({k, "retraction", factor});
        trace.records.push_back(retraction);
        ledger.k_current = k - 1;
    }
    trace.log_final_mass_bound = log_z;

    if (!thick_mode && !(trace.cumulative_factor < 2.0))
        throw InvariantViolation("cumulative retraction factor reached 2");

    Certificate cert;
    if (!thick_mode) {
        cert.kind = Certificate::Kind::NerveNull;
        for (int f = 0; f < nerve.size(); ++f) {
            const RectFace& face = nerve.faces[f];
            if (face.dim != schedule.n) continue;
            if (!(ledger.u[f] < face.volume))
                throw InvariantViolation("final mass does not clear the face volume");
            cert.final_masses.push_back({face.key.to_string(), ledger.u[f], face.volume});
        }
    } else {
        cert.kind = Certificate::Kind::NormBound;
        for (int f = 0; f < nerve.size(); ++f) {
            const RectFace& face = nerve.faces[f];
            if (face.dim != schedule.n) continue;
            if (thin[f]) {
                if (!(ledger.u[f] < face.volume))
                    throw InvariantViolation("thin face kept a nonzero coefficient");
                continue;   // coefficient 0
            }
            double ci = ledger.u[f] / face.volume;
            cert.coefficient_sum += ci;
            cert.coefficients.push_back({face.key.to_string(), ci, face.volume});
        }
        // |z_n| <= 4 G^{d0} |z_D| in logs
        double rhs = std::log(4.0) + std::max(0.0, schedule.thick_dim_bound) *
                                         std::max(0.0, schedule.log_stretch_cap()) +
                     trace.log_initial_mass;
        if (std::isfinite(trace.log_initial_mass) && !(trace.log_final_mass_bound <= rhs))
            throw InvariantViolation("final mass exceeds the stretch-capped budget");
    }
    result.certificate = cert;
    return result;
}

} // namespace

DeformationResult run_thin_deformation(const RectangularNerve& nerve, ChainLedger ledger,
                                       const DeformationSchedule& schedule) {
    if (schedule.mode != LedgerMode::ThinOnly || ledger.mode != LedgerMode::ThinOnly)
        throw InputError("thin run requires a thin schedule and ledger");
    return run_ledger(nerve, std::move(ledger), schedule);
}

DeformationResult run_thick_thin_deformation(const RectangularNerve& nerve, ChainLedger ledger,
                                             const DeformationSchedule& schedule) {
    if (schedule.mode != LedgerMode::ThickThin || ledger.mode != LedgerMode::ThickThin)
        throw InputError("thick/thin run requires a thick/thin schedule and ledger");
    return run_ledger(nerve, std::move(ledger), schedule);
}

std::string DeformationTrace::to_jsonl() const {
    std::ostringstream out;
    for (const TraceRecord& rec : records) {
        nlohmann::json j;
        j["k"] = rec.k;
        j["step"] = rec.step;
        j["factor"] = rec.factor;
        j["worst_face"] = rec.worst_face;
        j["worst_margin"] = rec.worst_margin;
        if (rec.step == "surgery") j["pruning_delta"] = rec.pruning_delta;
        out << j.dump() << '\n';
    }
    return out.str();
}

std::string certificate_to_json(const Certificate& cert) {
    nlohmann::json j;
    switch (cert.kind) {
    case Certificate::Kind::NerveNull: {
        j["kind"] = "nerve_null";
        nlohmann::json masses = nlohmann::json::array();
        for (const auto& fm : cert.final_masses)
            masses.push_back({{"face", fm.face}, {"mass", fm.mass}, {"volume", fm.volume}});
        j["witness"] = {{"final_top_masses", masses}};
        break;
    }
    case Certificate::Kind::NormBound: {
        j["kind"] = "norm_bound";
        nlohmann::json coeffs = nlohmann::json::array();
        for (const auto& fm : cert.coefficients)
            coeffs.push_back({{"face", fm.face}, {"coefficient", fm.mass}, {"volume", fm.volume}});
        j["witness"] = {{"coefficient_sum", cert.coefficient_sum}, {"coefficients", coeffs}};
        break;
    }
    case Certificate::Kind::HypothesisFailed:
        j["kind"] = "hypothesis_failed";
        j["witness"] = {{"face", cert.violating_face},
                        {"mass", cert.violating_mass},
                        {"bound", cert.violating_bound}};
        break;
    }
    return j.dump(2);
}

} // namespace nervecraft
