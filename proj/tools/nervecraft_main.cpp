#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nervecraft/pipeline.hpp"

using namespace nervecraft;

namespace {

ExperimentConfig load_config(const std::string& path, const std::string& out_dir) {
    ExperimentConfig config = ExperimentConfig::from_file(path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    return config;
}

int guarded(int (*fn)(const std::string&, const std::string&), const std::string& config,
            const std::string& out) {
    try {
        return fn(config, out);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ResolutionExhausted& e) {
        std::cerr << "resolution exhausted: " << e.what() << "\n";
        return kExitInputError;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariantViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int run_constants(const std::string& config_path, const std::string& out) {
    ExperimentConfig config = load_config(config_path, out);
    nlohmann::json input = nlohmann::json::parse(config.input_json);
    int n = input.value("n", 2);
    ConstantsBundle bundle = cmd_constants(n, config.beta_override);
    std::string body = bundle.to_json();
    if (!config.output_dir.empty())
        write_text_file(config.output_dir, "constants.json", body);
    std::cout << body << "\n";
    return kExitOk;
}

int run_cover(const std::string& config_path, const std::string& out) {
    ExperimentConfig config = load_config(config_path, out);
    CoverCommandResult result = cmd_cover(config);
    std::cout << (result.report.pass ? "cover valid" : "cover INVALID") << " ("
              << result.cover_size << " balls)\n";
    for (const auto& v : result.report.violations)
        std::cout << "  violation: " << v.condition << " witness vertex " << v.witness << "\n";
    return result.exit_code();
}

int run_verify(const std::string& config_path, const std::string& out) {
    ExperimentConfig config = load_config(config_path, out);
    InvariantSuiteReport rep = cmd_verify(config);
    for (const CheckResult& c : rep.checks)
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name
                  << (c.pass ? "" : "  -- " + c.witness) << "\n";
    return rep.pass ? kExitOk : kExitInvariantViolation;
}

int run_theorem1(const std::string& config_path, const std::string& out) {
    ExperimentConfig config = load_config(config_path, out);
    FillingReport report = cmd_theorem1(config);
    std::cout << report.to_json(false) << "\n";
    return report.exit_code();
}

int run_norm_bound(const std::string& config_path, const std::string& out) {
    ExperimentConfig config = load_config(config_path, out);
    NormBoundReport report = cmd_norm_bound(config);
    std::cout << report.to_json(false) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nervecraft: ball covers, rectangular nerves, and quantitative "
                 "cycle deformation on discretized manifolds"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const std::string&, const std::string&);
    };
    const Sub subs[] = {
        {"constants", "derive the explicit constant chain for a dimension", run_constants},
        {"cover", "build (or validate) a good cover", run_cover},
        {"verify", "run every module's invariant suite on an instance", run_verify},
        {"theorem1", "end-to-end small-V(1) certificate pipeline", run_theorem1},
        {"norm-bound", "thick/thin pipeline bounding the pushed fundamental class", run_norm_bound},
    };

    std::string config_path, out_dir;
    int rc = kExitInputError;
    bool matched = false;
    for (const Sub& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->add_option("--config", config_path, "experiment config JSON")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->callback([&, fn = sub.fn]() {
            rc = guarded(fn, config_path, out_dir);
            matched = true;
        });
    }
    CLI11_PARSE(app, argc, argv);
    return matched ? rc : kExitInputError;
}
