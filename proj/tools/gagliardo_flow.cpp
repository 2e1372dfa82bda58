#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gflow/gflow.hpp"
#include "gflow/oracle_cases.hpp"

namespace {

const char* kExitCodes = R"(Exit codes:
  0   all checks passed
  1   run completed but at least one check failed (see verify.json)
  10  OutsideTubularNeighbourhood    11  InvalidGeometry
  12  InvalidExponent                13  DimensionMismatch
  14  DegenerateIncrement            15  InnerSolverStalled
  16  OutOfRange                     17  UnsupportedAmbientDim
  18  SupportViolation               19  IndexOutOfRange
  20  NotTangent                     21  ParseError
  22  ValidationError                23  PresetUnavailable
  24  IoError
Environment: GFLOW_OUT overrides out_dir from the config file; --out and
--out_dir override GFLOW_OUT.)";

// Flag values are read as JSON literals when they parse (numbers, arrays),
// otherwise as plain strings.
nlohmann::json flag_value(const std::string& raw) {
    try {
        return nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        return raw;
    }
}

struct ConfigFlags {
    std::string path;
    std::map<std::string, std::string> values;
    std::string out;
    unsigned threads = 0;
    bool deterministic = false;

    void attach(CLI::App* cmd, bool with_exec) {
        cmd->set_help_flag("--help", "print this help message and exit");
        cmd->add_option("--config", path, "JSON run configuration")->required();
        for (const char* key :
             {"n", "s", "p", "target", "L", "box", "cells_per_axis", "collar_width", "h", "steps",
              "inner_tol", "inner_max_iters", "boundary_mode", "step_rule", "eta0", "beta",
              "armijo_c", "eta", "init", "seed", "out_dir", "test_functions"}) {
            cmd->add_option(std::string("--") + key, values[key],
                            std::string("override config key '") + key + "'");
        }
        cmd->add_option("--out", out, "output directory (same as --out_dir)");
        if (with_exec) {
            cmd->add_option("--threads", threads, "worker cap for pair reductions");
            cmd->add_flag("--deterministic", deterministic, "sequential reductions");
        }
    }

    gflow::RunConfig resolve() const {
        nlohmann::json overrides = nlohmann::json::object();
        if (const char* env = std::getenv("GFLOW_OUT"); env && *env) overrides["out_dir"] = env;
        for (const auto& [key, raw] : values)
            if (!raw.empty()) overrides[key] = flag_value(raw);
        if (!out.empty()) overrides["out_dir"] = out;
        if (threads > 0) overrides["threads"] = threads;
        if (deterministic) overrides["threads"] = 1;
        return gflow::load_config(path, overrides);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimizing-movement flow of the fractional Gagliardo energy into spheres and tori"};
    app.footer(kExitCodes);
    // "-h" would collide with the time-step flag --h
    app.set_help_flag("--help", "print this help message and exit");
    app.require_subcommand(1);

    ConfigFlags run_flags;
    auto* run = app.add_subcommand("run", "run the flow and every check");
    run_flags.attach(run, true);

    ConfigFlags verify_flags;
    auto* verify = app.add_subcommand("verify", "checks that need no flow");
    verify_flags.attach(verify, true);

    std::string case_name;
    auto* oracle = app.add_subcommand("oracle", "print a brute-force reference computation");
    oracle->add_option("--case", case_name, "case name, or 'list'")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = run_flags.resolve();
            const auto result = gflow::execute_run(cfg);
            for (const auto& c : result.report.checks())
                if (!c.pass)
                    std::cerr << "FAIL " << c.name << ": measured " << c.measured << " > "
                              << c.tolerance << '\n';
            std::cout << "wrote " << cfg.out_dir << " (" << result.trajectory.steps()
                      << " steps, final energy " << result.trajectory.energies.back() << ")\n";
            return result.report.all_pass() ? 0 : gflow::kChecksFailed;
        }
        if (*verify) {
            const auto cfg = verify_flags.resolve();
            const int status = gflow::verify_config(cfg);
            std::cout << "wrote " << cfg.out_dir << "/verify.json\n";
            return status;
        }
        if (*oracle) {
            if (case_name == "list") {
                for (const auto& n : gflow::oracles::case_names()) std::cout << n << '\n';
                return 0;
            }
            try {
                std::cout << gflow::oracles::run_case(case_name).dump(2) << '\n';
            } catch (const std::invalid_argument& e) {
                std::cerr << e.what() << '\n';
                return 2;
            }
            return 0;
        }
    } catch (const gflow::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return gflow::exit_code(e.code());
    }
    return 0;
}
