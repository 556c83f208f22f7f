#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nervecraft/cubical.hpp"
#include "nervecraft/deformation.hpp"
#include "nervecraft/manifold.hpp"
#include "nervecraft/multiplicity.hpp"
#include "nervecraft/nerve.hpp"

namespace nervecraft {

// Exit-code contract shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitInconclusive = 1,
    kExitInvariantViolation = 2,
    kExitInputError = 3,
};

struct ExperimentConfig {
    std::string input_json;                 // shape descriptor or {"mesh": ..., "n": ...}
    double target_radius = 1.0;
    std::string mode;                       // verify_lemmas | theorem1 | norm_bound
    std::optional<double> beta_override;
    std::optional<double> epsilon_override;
    std::optional<double> v0;               // norm-bound reference volume
    std::optional<std::string> validate_cover_path;
    uint64_t seed = 0;
    std::string output_dir;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

DiscreteManifold build_input(const ExperimentConfig& config);

struct ConstantsBundle {
    ConstantsTable table;
    double epsilon = 0.0;
    double delta_n = 0.0;        // hypothesis threshold: V(1) < delta_n
    double log_delta_n = 0.0;
    bool beta_overridden = false;

    std::string to_json() const;
};

ConstantsBundle cmd_constants(int n, std::optional<double> beta_override = std::nullopt);

struct FillingReport {
    double target_radius = 1.0;
    double v1_scaled = 0.0;
    double delta_n = 0.0;
    bool hypothesis_met = false;
    bool beta_overridden = false;
    Certificate certificate;                // meaningful when hypothesis_met
    bool nerve_null = false;
    // instance stats
    int vertex_count = 0;
    int cover_size = 0;
    int nerve_faces = 0;
    int nerve_dim_max = 0;
    double elapsed_seconds = 0.0;           // volatile, excluded from canonical form

    std::string to_json(bool canonical) const;
    int exit_code() const;
};

FillingReport cmd_theorem1(const ExperimentConfig& config);

struct NormBoundReport {
    double v0 = 0.0;
    double v1_measured = 0.0;
    double coefficient_sum = 0.0;
    double total_volume = 0.0;
    double observed_constant = 0.0;         // coefficient_sum / total_volume
    double thick_dim_bound = 0.0;
    int thick_faces = 0;
    int max_thick_dim = -1;
    bool beta_overridden = false;
    Certificate certificate;
    int vertex_count = 0;
    int cover_size = 0;
    int nerve_faces = 0;
    double elapsed_seconds = 0.0;

    std::string to_json(bool canonical) const;
};

NormBoundReport cmd_norm_bound(const ExperimentConfig& config);

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct InvariantSuiteReport {
    std::vector<CheckResult> checks;
    bool pass = true;

    std::string to_json() const;
};

InvariantSuiteReport cmd_verify(const ExperimentConfig& config);

struct CoverCommandResult {
    CoverReport report;
    int cover_size = 0;
    int exit_code() const { return report.pass ? kExitOk : kExitInvariantViolation; }
};

CoverCommandResult cmd_cover(const ExperimentConfig& config);

void write_text_file(const std::string& dir, const std::string& name, const std::string& body);

} // namespace nervecraft
