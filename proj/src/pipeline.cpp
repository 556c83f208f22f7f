#include "nervecraft/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nervecraft {

namespace {

using nlohmann::json;

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad ") + what + ": " + e.what());
    }
}

// Deterministic sampling for spot checks.
struct Lcg {
    uint64_t state;
    explicit Lcg(uint64_t seed) : state(seed * 6364136223846793005ull + 1442695040888963407ull) {}
    uint64_t next() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return state >> 11;
    }
    int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
};

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j = parse_json(text, "experiment config");
    ExperimentConfig c;
    if (j.contains("input"))
        c.input_json = j["input"].dump();
    else
        throw InputError("config missing 'input'");
    c.target_radius = j.value("target_radius", 1.0);
    if (!(c.target_radius > 0.0)) throw InputError("target_radius must be positive");
    c.mode = j.value("mode", std::string());
    if (j.contains("beta") && !j["beta"].is_null()) c.beta_override = j["beta"].get<double>();
    if (j.contains("epsilon") && !j["epsilon"].is_null())
        c.epsilon_override = j["epsilon"].get<double>();
    if (j.contains("v0") && !j["v0"].is_null()) c.v0 = j["v0"].get<double>();
    if (j.contains("validate_cover") && !j["validate_cover"].is_null())
        c.validate_cover_path = j["validate_cover"].get<std::string>();
    c.seed = j.value("seed", 0ull);
    c.output_dir = j.value("output_dir", std::string());
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

DiscreteManifold build_input(const ExperimentConfig& config) {
    json j = parse_json(config.input_json, "input descriptor");
    if (j.contains("mesh")) {
        int n = j.value("n", 2);
        return load_off_mesh(j["mesh"].get<std::string>(), n);
    }
    return generate_synthetic(config.input_json);
}

void write_text_file(const std::string& dir, const std::string& name, const std::string& body) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw InputError("cannot write output file " + name + " in " + dir);
    out << body;
}

// ---------------------------------------------------------------------------
// constants

ConstantsBundle cmd_constants(int n, std::optional<double> beta_override) {
    ConstantsBundle bundle;
    bundle.table = derive_multiplicity_constants(n);
    if (beta_override) {
        bundle.table.beta = *beta_override;
        bundle.beta_overridden = true;
        bundle.table.derivation_log.push_back("beta overridden by configuration");
    }
    bundle.epsilon = epsilon_threshold(n, bundle.table.beta);
    // The hypothesis threshold converts the star-image bound
    //   C * V(1) * r1^{n+1} e^{-beta d}  into  eps * r1^n e^{-beta d}
    // using r1 <= 1/100: it suffices that C * V(1) / 100 <= eps.
    bundle.log_delta_n =
        std::log(100.0) + std::log(bundle.epsilon) - bundle.table.log_image_prefactor;
    bundle.delta_n = 100.0 * bundle.epsilon / bundle.table.image_prefactor;
    return bundle;
}

std::string ConstantsBundle::to_json() const {
    json j = json::parse(constants_to_json(table));
    j["epsilon"] = epsilon;
    j["delta_n"] = delta_n;
    j["log_delta_n"] = log_delta_n;
    j["beta_overridden"] = beta_overridden;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// theorem1 pipeline

namespace {

struct PipelineState {
    DiscreteManifold scaled;
    double v1 = 0.0;
    GoodCover cover;
    RectangularNerve nerve;
    PhiImageEstimate estimates;
};

// cover + nerve + estimates on the radius-normalized instance
void run_geometry(const ExperimentConfig& config, PipelineState& st, bool with_nerve) {
    DiscreteManifold input = build_input(config);
    st.scaled = config.target_radius == 1.0 ? std::move(input)
                                            : rescaled(input, 1.0 / config.target_radius);
    st.v1 = max_ball_volume(st.scaled, 1.0);
    st.cover = build_good_cover(st.scaled, st.v1, nullptr);
    if (with_nerve) {
        st.nerve = build_nerve(st.scaled, st.cover);
        st.estimates = compute_image_estimates(st.scaled, st.cover, st.nerve);
    }
}

void export_geometry(const ExperimentConfig& config, const PipelineState& st,
                     const ConstantsBundle& constants) {
    if (config.output_dir.empty()) return;
    write_text_file(config.output_dir, "cover.json", cover_to_json(st.cover));
    write_text_file(config.output_dir, "constants.json", constants.to_json());
    if (st.nerve.size() > 0) {
        write_text_file(config.output_dir, "nerve.json", nerve_to_json(st.nerve));
        write_text_file(config.output_dir, "estimates.csv",
                        estimates_csv(st.nerve, st.estimates, constants.table, st.v1));
    }
}

} // namespace

std::string FillingReport::to_json(bool canonical) const {
    json j;
    j["target_radius"] = target_radius;
    j["v1_scaled"] = v1_scaled;
    j["delta_n"] = delta_n;
    j["hypothesis_met"] = hypothesis_met;
    j["beta_overridden"] = beta_overridden;
    if (hypothesis_met) {
        j["certificate"] = json::parse(certificate_to_json(certificate));
        j["nerve_null"] = nerve_null;
        j["conclusion"] = nerve_null
                              ? "filling-radius <= R mechanism verified (combinatorial "
                                "nerve-nullity proxy; no explicit filling is constructed)"
                              : "hypothesis met but certificate not produced";
    } else {
        j["conclusion"] = "inconclusive: V(1) >= delta(n), the mechanism asserts nothing";
    }
    j["stats"] = {{"vertices", vertex_count},
                  {"cover_size", cover_size},
                  {"nerve_faces", nerve_faces},
                  {"nerve_dim_max", nerve_dim_max}};
    if (!canonical) j["elapsed_seconds"] = elapsed_seconds;
    return j.dump(2);
}

int FillingReport::exit_code() const {
    if (!hypothesis_met) return kExitInconclusive;
    return nerve_null ? kExitOk : kExitInvariantViolation;
}

FillingReport cmd_theorem1(const ExperimentConfig& config) {
    const double t0 = now_seconds();
    FillingReport report;
    report.target_radius = config.target_radius;

    DiscreteManifold input = build_input(config);
    DiscreteManifold scaled = config.target_radius == 1.0
                                  ? std::move(input)
                                  : rescaled(input, 1.0 / config.target_radius);
    report.vertex_count = scaled.vertex_count();

    ConstantsBundle constants = cmd_constants(scaled.n, config.beta_override);
    report.beta_overridden = constants.beta_overridden;
    report.delta_n = constants.delta_n;
    report.v1_scaled = max_ball_volume(scaled, 1.0);
    report.hypothesis_met = report.v1_scaled < report.delta_n;
    if (!report.hypothesis_met) {
        report.elapsed_seconds = now_seconds() - t0;
        if (!config.output_dir.empty()) {
            write_text_file(config.output_dir, "constants.json", constants.to_json());
            write_text_file(config.output_dir, "theorem1_report.json", report.to_json(false));
        }
        return report;
    }

    GoodCover cover = build_good_cover(scaled, report.v1_scaled, nullptr);
    report.cover_size = cover.size();
    RectangularNerve nerve = build_nerve(scaled, cover);
    report.nerve_faces = nerve.size();
    report.nerve_dim_max = nerve.dim_max;
    PhiImageEstimate estimates = compute_image_estimates(scaled, cover, nerve);

    // audit the star-image bound the hypothesis promises
    for (int f = 0; f < nerve.size(); ++f) {
        const RectFace& face = nerve.faces[f];
        double rhs = constants.table.image_prefactor * report.v1_scaled *
                     std::pow(face.r1, scaled.n + 1) * std::exp(-constants.table.beta * face.dim);
        if (!(estimates.per_face[f] <= rhs))
            throw InvariantViolation("star-image estimate exceeds its bound at face " +
                                     face.key.to_string());
    }

    double epsilon = config.epsilon_override.value_or(constants.epsilon);
    DeformationSchedule schedule = make_thin_schedule(scaled.n, constants.table.beta, epsilon);
    ChainLedger ledger = init_ledger(nerve, estimates, LedgerMode::ThinOnly);
    DeformationResult result = run_thin_deformation(nerve, std::move(ledger), schedule);
    report.certificate = result.certificate;
    report.nerve_null = result.certificate.kind == Certificate::Kind::NerveNull;
    report.elapsed_seconds = now_seconds() - t0;

    if (!config.output_dir.empty()) {
        PipelineState st;
        st.scaled = std::move(scaled);
        st.v1 = report.v1_scaled;
        st.cover = std::move(cover);
        st.nerve = std::move(nerve);
        st.estimates = std::move(estimates);
        export_geometry(config, st, constants);
        write_text_file(config.output_dir, "trace.jsonl", result.trace.to_jsonl());
        write_text_file(config.output_dir, "certificate.json",
                        certificate_to_json(report.certificate));
        write_text_file(config.output_dir, "theorem1_report.json", report.to_json(false));
    }
    return report;
}

// ---------------------------------------------------------------------------
// norm bound pipeline

std::string NormBoundReport::to_json(bool canonical) const {
    json j;
    j["v0"] = v0;
    j["v1_measured"] = v1_measured;
    j["coefficient_sum"] = coefficient_sum;
    j["total_volume"] = total_volume;
    j["observed_constant"] = observed_constant;
    j["norm_bound_vs_volume"] =
        "coefficient_sum <= observed_constant * total_volume (by definition of "
        "observed_constant; constants used are recorded in constants.json)";
    j["thick_dim_bound"] = thick_dim_bound;
    j["thick_faces"] = thick_faces;
    j["max_thick_dim"] = max_thick_dim;
    j["beta_overridden"] = beta_overridden;
    j["certificate"] = json::parse(certificate_to_json(certificate));
    j["stats"] = {{"vertices", vertex_count},
                  {"cover_size", cover_size},
                  {"nerve_faces", nerve_faces}};
    if (!canonical) j["elapsed_seconds"] = elapsed_seconds;
    return j.dump(2);
}

NormBoundReport cmd_norm_bound(const ExperimentConfig& config) {
    const double t0 = now_seconds();
    if (config.v0 && !(*config.v0 > 0.0)) throw InputError("V0 must be positive");
    NormBoundReport report;

    PipelineState st;
    run_geometry(config, st, true);
    report.vertex_count = st.scaled.vertex_count();
    report.cover_size = st.cover.size();
    report.nerve_faces = st.nerve.size();
    report.v1_measured = st.v1;
    report.total_volume = st.scaled.total_volume;
    report.v0 = config.v0.value_or(st.v1);

    ConstantsBundle constants = cmd_constants(st.scaled.n, config.beta_override);
    report.beta_overridden = constants.beta_overridden;
    double epsilon = config.epsilon_override.value_or(constants.epsilon);
    DeformationSchedule schedule = make_thick_thin_schedule(
        st.scaled.n, constants.table.beta, epsilon, report.v0, constants.table.image_prefactor);
    report.thick_dim_bound = schedule.thick_dim_bound;
    ChainLedger ledger = init_ledger(st.nerve, st.estimates, LedgerMode::ThickThin);
    DeformationResult result = run_thick_thin_deformation(st.nerve, std::move(ledger), schedule);
    report.certificate = result.certificate;
    report.coefficient_sum = result.certificate.coefficient_sum;
    report.observed_constant =
        report.total_volume > 0.0 ? report.coefficient_sum / report.total_volume : 0.0;
    report.thick_faces = result.trace.thick_faces_seen;
    report.max_thick_dim = result.trace.max_thick_dim;
    report.elapsed_seconds = now_seconds() - t0;

    if (!config.output_dir.empty()) {
        export_geometry(config, st, constants);
        write_text_file(config.output_dir, "trace.jsonl", result.trace.to_jsonl());
        write_text_file(config.output_dir, "certificate.json",
                        certificate_to_json(report.certificate));
        write_text_file(config.output_dir, "norm_bound_report.json", report.to_json(false));
    }
    return report;
}

// ---------------------------------------------------------------------------
// cover command

CoverCommandResult cmd_cover(const ExperimentConfig& config) {
    DiscreteManifold input = build_input(config);
    DiscreteManifold scaled = config.target_radius == 1.0
                                  ? std::move(input)
                                  : rescaled(input, 1.0 / config.target_radius);
    CoverCommandResult result;
    if (config.validate_cover_path) {
        std::ifstream in(*config.validate_cover_path);
        if (!in) throw InputError("cannot open cover file: " + *config.validate_cover_path);
        std::stringstream buf;
        buf << in.rdbuf();
        GoodCover cover = cover_from_json(scaled, buf.str());
        result.report = validate_cover(scaled, cover);
        result.cover_size = cover.size();
    } else {
        GoodCover cover = build_good_cover(scaled);
        result.report = validate_cover(scaled, cover);
        result.cover_size = cover.size();
        if (!config.output_dir.empty()) {
            write_text_file(config.output_dir, "cover.json", cover_to_json(cover));
            std::vector<VertexId> centers(scaled.vertex_count());
            for (int i = 0; i < scaled.vertex_count(); ++i) centers[i] = i;
            write_text_file(config.output_dir, "profile.csv",
                            volume_profile_csv(volume_profile(scaled, centers, {0.5, 1.0})));
        }
    }
    if (!config.output_dir.empty()) {
        json j;
        j["pass"] = result.report.pass;
        json viols = json::array();
        for (const auto& v : result.report.violations)
            viols.push_back({{"condition", v.condition},
                             {"ball_a", v.ball_a},
                             {"ball_b", v.ball_b},
                             {"witness_vertex", v.witness},
                             {"detail", v.detail}});
        j["violations"] = viols;
        j["cover_size"] = result.cover_size;
        write_text_file(config.output_dir, "cover_report.json", j.dump(2));
    }
    return result;
}

// ---------------------------------------------------------------------------
// verify suite

namespace {

void push(InvariantSuiteReport& rep, const std::string& name, bool pass,
          const std::string& witness = "") {
    rep.checks.push_back({name, pass, pass ? "" : witness});
    rep.pass = rep.pass && pass;
}

std::vector<VertexId> ball_vertex_set(const DiscreteManifold& m, VertexId center, double radius) {
    return ball(m, center, radius).members;
}

bool subset_of(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    size_t j = 0;
    for (VertexId x : a) {
        while (j < b.size() && b[j] < x) ++j;
        if (j == b.size() || b[j] != x) return false;
        ++j;
    }
    return true;
}

std::vector<VertexId> union_of_balls(const DiscreteManifold& m, const GoodCover& cover,
                                     const std::vector<int>& ids, double fraction) {
    std::vector<VertexId> out;
    for (int bi : ids) {
        auto mem = ball_vertex_set(m, cover.balls[bi].center, cover.balls[bi].radius * fraction);
        out.insert(out.end(), mem.begin(), mem.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

std::string InvariantSuiteReport::to_json() const {
    json arr = json::array();
    for (const CheckResult& c : checks)
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"witness", c.witness}});
    json j;
    j["pass"] = pass;
    j["checks"] = arr;
    return j.dump(2);
}

InvariantSuiteReport cmd_verify(const ExperimentConfig& config) {
    InvariantSuiteReport rep;
    DiscreteManifold input = build_input(config);
    DiscreteManifold m = config.target_radius == 1.0
                             ? std::move(input)
                             : rescaled(input, 1.0 / config.target_radius);
    Lcg rng(config.seed + 1);
    const int nv = m.vertex_count();

    // --- metric suite
    {
        bool ok = true;
        std::string witness;
        for (int trial = 0; trial < 300 && ok; ++trial) {
            VertexId a = rng.below(nv), b = rng.below(nv), c = rng.below(nv);
            double ab = distance(m, a, b), ba = distance(m, b, a);
            double ac = distance(m, a, c), cb = distance(m, c, b);
            if (std::abs(ab - ba) > 1e-9 * std::max(1.0, ab)) {
                ok = false;
                witness = "asymmetry at (" + std::to_string(a) + "," + std::to_string(b) + ")";
            }
            if (ab > (ac + cb) * (1.0 + 1e-9)) {
                ok = false;
                witness = "triangle inequality failed through " + std::to_string(c);
            }
            if ((a == b) != (ab == 0.0)) {
                ok = false;
                witness = "zero-distance identity failed";
            }
        }
        push(rep, "metric_symmetry_triangle", ok, witness);
    }
    {
        bool ok = true;
        std::string witness;
        for (int trial = 0; trial < 40 && ok; ++trial) {
            VertexId p = rng.below(nv);
            double r1 = 0.002 * (1 + rng.below(50));
            double r2 = r1 * (1.0 + 0.2 * (1 + rng.below(10)));
            if (!subset_of(ball_vertex_set(m, p, r1), ball_vertex_set(m, p, r2))) {
                ok = false;
                witness = "ball at vertex " + std::to_string(p) + " not monotone";
            }
        }
        push(rep, "ball_monotonicity", ok, witness);
    }
    {
        bool ok = true;
        std::string witness;
        DiscreteManifold doubled = rescaled(m, 2.0);
        for (int trial = 0; trial < 60 && ok; ++trial) {
            VertexId a = rng.below(nv), b = rng.below(nv);
            double d1 = distance(m, a, b), d2 = distance(doubled, a, b);
            if (std::abs(d2 - 2.0 * d1) > 1e-12 * std::max(1.0, d2)) {
                ok = false;
                witness = "distance did not scale at (" + std::to_string(a) + "," +
                          std::to_string(b) + ")";
            }
            VertexId p = rng.below(nv);
            double r = 0.002 * (1 + rng.below(40));
            if (ball_vertex_set(m, p, r) != ball_vertex_set(doubled, p, 2.0 * r)) {
                ok = false;
                witness = "ball members changed under scaling at " + std::to_string(p);
            }
        }
        push(rep, "scaling_covariance", ok, witness);
    }

    // --- cover suite
    double v1 = max_ball_volume(m, 1.0);
    std::vector<LadderTrace> traces;
    GoodCover cover;
    try {
        cover = build_good_cover(m, v1, &traces);
    } catch (const ResolutionExhausted& e) {
        push(rep, "cover_construction", false, e.what());
        return rep;
    }
    {
        CoverReport cr = validate_cover(m, cover);
        push(rep, "cover_conditions", cr.pass,
             cr.pass ? "" : cr.violations.front().condition);
    }
    {
        bool ok = true;
        std::string witness;
        for (const LadderTrace& t : traces) {
            if (!is_good_ball(m, t.vertex, t.chosen_radius, v1).good()) {
                ok = false;
                witness = "ladder returned a bad ball at vertex " + std::to_string(t.vertex);
                break;
            }
        }
        push(rep, "ladder_soundness", ok, witness);
    }
    {
        // whenever growth failed, the densities must cascade by 10^-12
        bool ok = true;
        std::string witness;
        int witnesses_checked = 0;
        for (const LadderTrace& t : traces)
            for (const LadderRung& rung : t.rungs) {
                if (rung.reasonable_growth) continue;
                ++witnesses_checked;
                if (!(rung.inner_density < 1e-12 * rung.outer_density * (1.0 + 1e-12))) {
                    ok = false;
                    witness = "cascade arithmetic failed at vertex " + std::to_string(t.vertex);
                }
            }
        push(rep, "density_cascade(" + std::to_string(witnesses_checked) + " witnesses)", ok,
             witness);
    }
    {
        ConstantsTable constants = derive_multiplicity_constants(m.n);
        bool ok = true;
        std::string witness;
        for (int bi = 0; bi < cover.size() && ok; ++bi) {
            Ball probe = ball(m, cover.balls[bi].center, cover.balls[bi].radius);
            int count = count_scale_neighbors(m, cover, probe);
            if (count > constants.eta) {
                ok = false;
                witness = "scale-neighbor count " + std::to_string(count) + " at ball " +
                          std::to_string(bi);
            }
        }
        push(rep, "scale_neighbor_bound", ok, witness);
    }

    // --- multiplicity suite
    {
        std::vector<VertexId> all(nv);
        for (int i = 0; i < nv; ++i) all[i] = i;
        LayerDecomposition ld = build_layers(cover, all);
        compute_order_and_cores(m, cover, ld);
        bool ok = true;
        std::string witness;
        std::vector<int> seen(cover.size(), 0);
        for (const auto& layer : ld.layers) {
            std::vector<char> occupied(nv, 0);
            for (int bi : layer) {
                ++seen[bi];
                for (VertexId v : cover.balls[bi].members) {
                    if (occupied[v]) {
                        ok = false;
                        witness = "layer balls overlap at vertex " + std::to_string(v);
                    }
                    occupied[v] = 1;
                }
            }
        }
        for (int bi = 0; bi < cover.size(); ++bi)
            if (seen[bi] != 1) {
                ok = false;
                witness = "ball " + std::to_string(bi) + " placed " + std::to_string(seen[bi]) +
                          " times";
            }
        push(rep, "layer_partition", ok, witness);

        MultiplicityProfile mult = multiplicity_function(m, cover);
        // M_U(lambda + mu) inside L^mu(lambda), as vertex sets
        ok = true;
        witness.clear();
        for (int mu = 1; mu <= 3 && ok; ++mu)
            for (int lam = 1; lam <= std::min(4, ld.layer_count()) && ok; ++lam) {
                for (VertexId v = 0; v < nv && ok; ++v) {
                    if (mult.m[v] < lam + mu) continue;
                    std::vector<int> layers_holding;
                    for (int bi : cover.containing[v])
                        if (ld.layer_of[bi] >= lam - 1) layers_holding.push_back(ld.layer_of[bi]);
                    std::sort(layers_holding.begin(), layers_holding.end());
                    layers_holding.erase(
                        std::unique(layers_holding.begin(), layers_holding.end()),
                        layers_holding.end());
                    if (static_cast<int>(layers_holding.size()) < mu) {
                        ok = false;
                        witness = "containment failed at vertex " + std::to_string(v);
                    }
                }
            }
        push(rep, "containment_chain", ok, witness);

        // top-layer envelope: everything at or below layer lam sits in the
        // tripled balls of layer lam
        ok = true;
        witness.clear();
        for (int lam = 0; lam < std::min(3, ld.layer_count()) && ok; ++lam) {
            std::vector<VertexId> l1;
            for (int d = lam; d < ld.layer_count(); ++d)
                for (int bi : ld.layers[d])
                    l1.insert(l1.end(), cover.balls[bi].members.begin(),
                              cover.balls[bi].members.end());
            std::sort(l1.begin(), l1.end());
            l1.erase(std::unique(l1.begin(), l1.end()), l1.end());
            auto envelope = union_of_balls(m, cover, ld.layers[lam], 3.0);
            if (!subset_of(l1, envelope)) {
                ok = false;
                witness = "triple-ball envelope failed at layer " + std::to_string(lam + 1);
            }
        }
        push(rep, "envelope_top_layer", ok, witness);

        ok = true;
        witness.clear();
        for (int d = 0; d < ld.layer_count() && ok; ++d) {
            std::vector<VertexId> level;
            for (int bi : ld.layers[d])
                level.insert(level.end(), cover.balls[bi].members.begin(),
                             cover.balls[bi].members.end());
            std::sort(level.begin(), level.end());
            level.erase(std::unique(level.begin(), level.end()), level.end());
            auto envelope = union_of_balls(m, cover, ld.max_of_layer[d], 10.0);
            if (!subset_of(level, envelope)) {
                ok = false;
                witness = "maximal-ball envelope failed at layer " + std::to_string(d + 1);
            }
        }
        push(rep, "envelope_maximal", ok, witness);

        // pinching: a lower-layer ball through a core point has comparable radius
        ok = true;
        witness.clear();
        for (int d = 0; d < ld.layer_count() && ok; ++d) {
            for (int bi : ld.max_of_layer[d]) {
                auto tenth = cover.balls[bi].sub_ball(0.1);
                double ri = cover.balls[bi].radius;
                for (VertexId v : tenth)
                    for (int bk : cover.containing[v]) {
                        if (ld.layer_of[bk] <= d) continue;
                        double rk = cover.balls[bk].radius;
                        if (rk < ri / 15.0 - 1e-15 || rk > 2.0 * ri + 1e-15) {
                            ok = false;
                            witness = "core pinching failed: ball " + std::to_string(bk) +
                                      " through core of " + std::to_string(bi);
                        }
                    }
            }
        }
        push(rep, "core_pinching", ok, witness);

        ConstantsTable constants = derive_multiplicity_constants(m.n);
        ok = true;
        witness.clear();
        for (int d = 0; d < ld.layer_count() && ok; ++d) {
            double level_volume = 0.0;
            {
                std::vector<VertexId> level;
                for (int bi : ld.layers[d])
                    level.insert(level.end(), cover.balls[bi].members.begin(),
                                 cover.balls[bi].members.end());
                std::sort(level.begin(), level.end());
                level.erase(std::unique(level.begin(), level.end()), level.end());
                for (VertexId v : level) level_volume += m.weight[v];
            }
            double core_volume = 0.0;
            for (VertexId v : ld.core_of_layer[d]) core_volume += m.weight[v];
            if (!(level_volume <= constants.sandwich_constant * core_volume)) {
                ok = false;
                witness = "core sandwich failed at layer " + std::to_string(d + 1);
            }
        }
        push(rep, "core_sandwich", ok, witness);
    }

    // --- multiplicity decay suite
    {
        std::vector<VertexId> all(nv);
        for (int i = 0; i < nv; ++i) all[i] = i;
        MultiplicityProfile prof = high_multiplicity_tail(m, cover, all, 0.0099);
        push(rep, "multiplicity_decay", prof.decay_margin >= 0.0,
             "decay inequality violated with the derived constants");
        bool nested = true;
        for (size_t mu = 0; mu + 1 < prof.lmu.size() && nested; ++mu)
            for (size_t lam = 1; lam < prof.lmu[mu].size(); ++lam)
                if (prof.lmu[mu][lam] < prof.lmu[mu + 1][lam]) nested = false;
        push(rep, "layer_count_sets_nested", nested, "layer-count volumes not nested");
        if (!config.output_dir.empty())
            write_text_file(config.output_dir, "tail_profile.csv", tail_profile_csv(prof));
    }

    // --- nerve suite
    {
        RectangularNerve nerve = build_nerve(m, cover);
        bool ok = true;
        std::string witness;
        for (VertexId x = 0; x < nv && ok; ++x) {
            FaceKey key = face_of_point(m, cover, x);
            if (nerve.face_id(key) < 0) {
                ok = false;
                witness = "image face missing for vertex " + std::to_string(x);
            }
        }
        push(rep, "image_in_nerve", ok, witness);

        ok = true;
        witness.clear();
        for (const Edge& e : m.edges) {
            double d = distance(m, e.u, e.v);
            std::vector<int> touched = cover.containing[e.u];
            touched.insert(touched.end(), cover.containing[e.v].begin(),
                           cover.containing[e.v].end());
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            for (int bi : touched) {
                double du = phi_coordinate(m, cover, bi, e.u);
                double dv = phi_coordinate(m, cover, bi, e.v);
                if (std::abs(du - dv) > 2.0 * d * (1.0 + 1e-9)) {
                    ok = false;
                    witness = "coordinate " + std::to_string(bi) + " stretches edge (" +
                              std::to_string(e.u) + "," + std::to_string(e.v) + ")";
                }
            }
            if (!ok) break;
        }
        push(rep, "phi_lipschitz", ok, witness);

        PhiImageEstimate est = compute_image_estimates(m, cover, nerve);
        ok = true;
        witness.clear();
        Lcg face_rng(config.seed + 99);
        for (int trial = 0; trial < std::min(20, nerve.size()); ++trial) {
            int f = face_rng.below(nerve.size());
            double direct = star_preimage_volume(m, cover, nerve, f);
            if (std::abs(direct - est.per_face[f]) > 1e-9 * std::max(1.0, direct)) {
                ok = false;
                witness = "estimate mismatch at face " + nerve.faces[f].key.to_string();
            }
        }
        push(rep, "star_preimage_estimates", ok, witness);

        ConstantsTable constants = derive_multiplicity_constants(m.n);
        double total_jacobian = est.total;
        bool bound_ok =
            std::log(std::max(total_jacobian, 1e-300)) <=
            constants.log_image_total_prefactor + std::log(std::max(m.total_volume, 1e-300));
        push(rep, "total_image_bound", bound_ok, "jacobian mass exceeds its prefactor bound");

        FaceRadiusAudit audit = face_radius_audit(nerve, constants);
        push(rep, "face_radius_audit", audit.pass,
             audit.pass ? "" : nerve.faces[audit.violations.front()].key.to_string());

        // --- deformation suite (synthetic admissible masses on the real nerve)
        double epsilon = epsilon_threshold(m.n, constants.beta);
        ok = true;
        witness.clear();
        for (int k = m.n + 1; k <= m.n + 6; ++k) {
            double ratio = delta_schedule(m.n, constants.beta, epsilon, k + 1) /
                           delta_schedule(m.n, constants.beta, epsilon, k);
            if (std::abs(ratio - std::exp(-constants.beta / m.n)) > 1e-12) {
                ok = false;
                witness = "schedule ratio drifted at k=" + std::to_string(k);
            }
        }
        push(rep, "schedule_ratio", ok, witness);

        double logp = log_retraction_product(m.n, constants.beta, epsilon);
        push(rep, "retraction_product_admissible", logp < std::log(2.0) && epsilon < 0.5,
             "threshold epsilon is not admissible");

        PhiImageEstimate synthetic;
        synthetic.method_tag = "synthetic admissible ledger";
        synthetic.per_face.resize(nerve.size());
        for (int f = 0; f < nerve.size(); ++f) {
            const RectFace& face = nerve.faces[f];
            synthetic.per_face[f] = 0.5 * epsilon * std::pow(face.r1, m.n) *
                                    std::exp(-constants.beta * face.dim);
            synthetic.total += synthetic.per_face[f];
        }
        try {
            DeformationSchedule schedule = make_thin_schedule(m.n, constants.beta, epsilon);
            ChainLedger ledger = init_ledger(nerve, synthetic, LedgerMode::ThinOnly);
            DeformationResult result = run_thin_deformation(nerve, std::move(ledger), schedule);
            bool null_ok = result.certificate.kind == Certificate::Kind::NerveNull &&
                           result.trace.cumulative_factor < 2.0;
            push(rep, "thin_deformation_audits", null_ok, "synthetic admissible run failed");
        } catch (const std::exception& e) {
            push(rep, "thin_deformation_audits", false, e.what());
        }
    }

    if (!config.output_dir.empty())
        write_text_file(config.output_dir, "verify_report.json", rep.to_json());
    return rep;
}

} // namespace nervecraft
