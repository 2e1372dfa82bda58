#ifndef GFLOW_RUN_HPP
#define GFLOW_RUN_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gflow/config.hpp"
#include "gflow/flow.hpp"
#include "gflow/io.hpp"
#include "gflow/presets.hpp"
#include "gflow/verify.hpp"

namespace gflow {

/// Samples per identity check in verify.json.
inline constexpr std::size_t kIdentitySamples = 10000;

/// Exit status for a completed run whose checks did not all pass.
inline constexpr int kChecksFailed = 1;

struct RunSetup {
    Grid grid;
    TargetManifold manifold;
    KernelTable kernel;
    Field u0;
};

inline RunSetup setup_run(const RunConfig& cfg) {
    Grid grid = cfg.grid();
    TargetManifold m = cfg.manifold();
    KernelTable k = build_kernel(grid, cfg.s, cfg.p, Exec{cfg.threads});
    Field u0 = make_initial(cfg.init, grid, m, cfg.seed);
    return {std::move(grid), m, std::move(k), std::move(u0)};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
    const std::filesystem::path out(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out / "snapshots", ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + out.string() + ": " + ec.message());
    write_json(out / "config.resolved", config_to_json(cfg));
    return out;
}

inline Report static_report(const RunConfig& cfg, const RunSetup& s) {
    Report rep;
    manifold_checks(s.manifold, cfg.seed, kIdentitySamples, rep);
    identity_checks(s.manifold, cfg.seed, kIdentitySamples, cfg.p, rep);
    field_checks(s.grid, s.kernel, s.manifold, s.u0, cfg.seed, Exec{cfg.threads}, rep);
    return rep;
}

/// `verify`: checks that need no flow. Writes config.resolved and verify.json.
inline int verify_config(const RunConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const RunSetup s = setup_run(cfg);
    const Report rep = static_report(cfg, s);
    write_json(out / "verify.json", rep.to_json());
    return rep.all_pass() ? 0 : kChecksFailed;
}

struct RunResult {
    FlowTrajectory trajectory;
    Report report;
};

inline RunResult execute_run(const RunConfig& cfg) {
    const auto out = prepare_out_dir(cfg);
    const RunSetup s = setup_run(cfg);
    FlowConfig flow = cfg.flow_config();
    const bool pinned = cfg.boundary_mode == "pinned_collar";
    if (pinned) flow.boundary = PinnedCollar::from(s.grid, s.u0);

    RunResult r{run_flow(s.u0, flow, s.kernel, s.manifold), static_report(cfg, s)};
    TrajectoryCheckOptions opt;
    opt.inner_tol = cfg.inner_tol;
    opt.test_functions = cfg.test_functions;
    opt.seed = cfg.seed;
    opt.pinned = pinned;
    opt.exec.threads = cfg.threads;
    trajectory_checks(s.grid, s.kernel, s.manifold, r.trajectory, opt, r.report);

    write_energy_trace((out / "energy_trace.csv").string(), r.trajectory);
    for (std::size_t k = 0; k < r.trajectory.snapshots.size(); ++k)
        write_snapshot((out / "snapshots" / ("u_" + std::to_string(k) + ".csv")).string(), s.grid,
                       r.trajectory.snapshots[k]);
    write_json(out / "verify.json", r.report.to_json());
    return r;
}

/// `run`: flow plus every check; 0 iff all checks pass.
inline int run_config(const RunConfig& cfg) {
    return execute_run(cfg).report.all_pass() ? 0 : kChecksFailed;
}

} // namespace gflow

#endif // GFLOW_RUN_HPP
