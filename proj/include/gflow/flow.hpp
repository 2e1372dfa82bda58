#ifndef GFLOW_FLOW_HPP
#define GFLOW_FLOW_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gflow/energy.hpp"
#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/grid.hpp"
#include "gflow/manifold.hpp"
#include "gflow/parallel.hpp"

namespace gflow {

struct FixedStep {
    double eta = 0.1;
};

struct ArmijoBacktracking {
    double eta0 = 1.0;
    double beta = 0.5;
    double c = 1e-4;
};

using StepRule = std::variant<ArmijoBacktracking, FixedStep>;

struct FreeBoundary {};

/// Collar cells frozen at u1.
struct PinnedCollar {
    Field u1;
    std::vector<unsigned char> pinned;  // 1 on collar cells

    static PinnedCollar from(const Grid& grid, Field u1) {
        if (u1.rows() != grid.size())
            throw Error(Errc::DimensionMismatch, "pinned boundary field does not match grid");
        PinnedCollar b{std::move(u1), std::vector<unsigned char>(grid.size(), 0)};
        for (std::size_t i = 0; i < grid.size(); ++i) b.pinned[i] = grid.collar(i) ? 1 : 0;
        return b;
    }
};

using BoundaryMode = std::variant<FreeBoundary, PinnedCollar>;

struct FlowConfig {
    double h = 0.05;
    std::size_t steps = 1;
    double inner_tol = 1e-8;
    std::size_t inner_max_iters = 5000;
    BoundaryMode boundary = FreeBoundary{};
    StepRule step_rule = ArmijoBacktracking{};
    Exec exec{};

    void validate() const {
        if (!(h > 0.0) || !std::isfinite(h))
            throw Error(Errc::ValidationError, "h must be > 0");
        if (!(inner_tol > 0.0)) throw Error(Errc::ValidationError, "inner_tol must be > 0");
        if (inner_max_iters == 0)
            throw Error(Errc::ValidationError, "inner_max_iters must be >= 1");
        if (const auto* r = std::get_if<ArmijoBacktracking>(&step_rule)) {
            if (!(r->eta0 > 0.0) || !(r->beta > 0.0 && r->beta < 1.0) ||
                !(r->c > 0.0 && r->c < 1.0))
                throw Error(Errc::ValidationError, "Armijo parameters out of range");
        } else if (!(std::get<FixedStep>(step_rule).eta > 0.0)) {
            throw Error(Errc::ValidationError, "fixed step must be > 0");
        }
    }
};

enum class StepStatus { Converged, MaxIterations, NoDescent };

inline const char* status_name(StepStatus s) {
    switch (s) {
    case StepStatus::Converged: return "converged";
    case StepStatus::MaxIterations: return "max_iterations";
    case StepStatus::NoDescent: return "no_descent";
    }
    return "unknown";
}

struct StepDiagnostics {
    std::size_t iterations = 0;
    std::size_t backtracks = 0;
    double residual = 0.0;         // final projected-gradient norm
    double objective_start = 0.0;  // E(u_prev)
    double objective_end = 0.0;    // proximal objective at the returned field
    StepStatus status = StepStatus::Converged;

    bool converged() const noexcept { return status == StepStatus::Converged; }
};

struct StepResult {
    Field u;
    StepDiagnostics diag;
};

/// E(v) + (mu / 2h) sum_i |v_i - u_prev_i|^2.
inline double proximal_objective(const Field& v, const Field& u_prev, double h,
                                 const KernelTable& k, Exec exec = {}) {
    require_same_shape(v, u_prev, "proximal_objective");
    return gagliardo_energy(v, k, exec) + k.cell_measure() / (2.0 * h) * dist_sq(v, u_prev);
}

namespace detail {

inline bool is_free(const BoundaryMode& b, std::size_t i) {
    const auto* pc = std::get_if<PinnedCollar>(&b);
    return pc == nullptr || pc->pinned[i] == 0;
}

struct ProjectedGradient {
    Field r;
    double norm = 0.0;
    /// sum_i |<G_i, v_i>| for the full ambient gradient G; scales the rounding
    /// noise of objective differences between nearby points of N.
    double normal_load = 0.0;
};

/// r_i = P_N(v_i)(g_i + (mu/h)(v_i - u_prev_i)) on free cells, 0 on pinned ones.
inline ProjectedGradient projected_gradient(const Field& v, const Field& u_prev, double h,
                                            const KernelTable& k, const TargetManifold& m,
                                            const BoundaryMode& b, Exec exec) {
    ProjectedGradient out{energy_gradient(v, k, exec)};
    Field& r = out.r;
    const double prox = k.cell_measure() / h;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        auto ri = r.row(i);
        if (!is_free(b, i)) {
            std::fill(ri.begin(), ri.end(), 0.0);
            continue;
        }
        const auto vi = v.row(i);
        const auto ui = u_prev.row(i);
        for (std::size_t a = 0; a < ri.size(); ++a) ri[a] += prox * (vi[a] - ui[a]);
        out.normal_load += std::abs(vec::dot(ri, vi));
        m.tangent_project_inplace(vi, ri);
    }
    out.norm = gflow::norm(r);
    return out;
}

/// (a + delta)^q - a^q as a^q expm1(q log1p(delta / a)); small changes keep
/// their relative accuracy.
inline double power_difference(double a, double delta, double q) {
    if (a == 0.0) return std::pow(std::max(delta, 0.0), q);
    if (q == 1.0) return delta;
    return std::pow(a, q) * std::expm1(q * std::log1p(delta / a));
}

/// proximal_objective(trial) - proximal_objective(v) evaluated from the pairwise
/// changes, accurate even when it is far below the rounding of either value.
inline double objective_change(const Field& trial, const Field& v, const Field& u_prev,
                               double h, const KernelTable& k, Exec exec) {
    const std::size_t n = k.size();
    const std::size_t dim = v.dim();
    const double q = 0.5 * k.p();
    Field step(n, dim);
    for (std::size_t x = 0; x < step.data().size(); ++x)
        step.data()[x] = trial.data()[x] - v.data()[x];

    const double energy_change = ordered_row_sum(n, exec, [&](std::size_t i) {
        const auto w = k.upper_row(i);
        const auto vi = v.row(i);
        const auto si = step.row(i);
        double acc = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto vj = v.row(j);
            const auto sj = step.row(j);
            double old_sq = 0.0;
            double delta = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = vi[c] - vj[c];
                const double ds = si[c] - sj[c];
                old_sq += d * d;
                delta += ds * (2.0 * d + ds);
            }
            acc += w[j - i - 1] * power_difference(old_sq, delta, q);
        }
        return acc;
    });

    double prox_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto vi = v.row(i);
        const auto ui = u_prev.row(i);
        const auto si = step.row(i);
        for (std::size_t c = 0; c < dim; ++c)
            prox_change += si[c] * (si[c] + 2.0 * (vi[c] - ui[c]));
    }
    return 2.0 * energy_change / k.p() + k.cell_measure() / (2.0 * h) * prox_change;
}

inline Field retract_step(const Field& v, const Field& r, double eta, const TargetManifold& m,
                          const BoundaryMode& b) {
    Field out = v;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        if (!is_free(b, i)) continue;
        auto oi = out.row(i);
        const auto ri = r.row(i);
        for (std::size_t a = 0; a < oi.size(); ++a) oi[a] -= eta * ri[a];
        m.project_inplace(oi);
    }
    out.set_constrained(true);
    return out;
}

} // namespace detail

/// One minimizing-movement step: projected gradient descent of
/// proximal_objective(., u_prev) over N-valued fields, started at u_prev and
/// retracted onto N by nearest-point projection after every update.
///
/// Step sizes come from the configured rule (Armijo backtracking by default).
/// Once the Armijo decrease drops below the rounding resolution of the
/// objective, a trial is accepted only if it lowers the projected-gradient norm.
/// Every accepted iterate has objective <= E(u_prev), so the returned field never
/// compares worse than u_prev. Stops when the Euclidean norm of the
/// projected gradient (all cells, all components) is <= inner_tol or after
/// inner_max_iters; diag.status records which.
inline StepResult minimizing_movement_step(const Field& u_prev, const FlowConfig& cfg,
                                           const KernelTable& k, const TargetManifold& m) {
    cfg.validate();
    m.check_field(u_prev);
    if (u_prev.rows() != k.size())
        throw Error(Errc::DimensionMismatch, "field does not match kernel table");
    if (const auto* pc = std::get_if<PinnedCollar>(&cfg.boundary)) {
        require_same_shape(u_prev, pc->u1, "pinned collar");
        for (std::size_t i = 0; i < u_prev.rows(); ++i)
            if (pc->pinned[i] && !std::equal(u_prev.row(i).begin(), u_prev.row(i).end(),
                                             pc->u1.row(i).begin()))
                throw Error(Errc::ValidationError,
                            "collar cell " + std::to_string(i) + " differs from u1");
    }

    const double h = cfg.h;
    StepResult out{u_prev, {}};
    out.u.set_constrained(true);
    auto& d = out.diag;
    d.objective_start = proximal_objective(u_prev, u_prev, h, k, cfg.exec);
    double f = d.objective_start;

    detail::ProjectedGradient grad =
        detail::projected_gradient(out.u, u_prev, h, k, m, cfg.boundary, cfg.exec);
    d.status = StepStatus::MaxIterations;

    const bool armijo = std::holds_alternative<ArmijoBacktracking>(cfg.step_rule);
    const ArmijoBacktracking rule =
        armijo ? std::get<ArmijoBacktracking>(cfg.step_rule) : ArmijoBacktracking{};
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (; d.iterations < cfg.inner_max_iters; ++d.iterations) {
        const double res = grad.norm;
        if (res <= cfg.inner_tol) {
            d.status = StepStatus::Converged;
            break;
        }
        // Objective changes below this are rounding: the representable points
        // near N carry O(eps) normal offsets that the ambient gradient sees.
        const double noise = 64.0 * eps * (std::abs(f) + grad.normal_load);
        double eta = armijo ? rule.eta0 : std::get<FixedStep>(cfg.step_rule).eta;
        bool accepted = false;
        Field trial;
        detail::ProjectedGradient trial_grad;
        bool have_trial_grad = false;
        double f_trial = f;
        for (int attempt = 0; attempt < 80; ++attempt) {
            trial = detail::retract_step(out.u, grad.r, eta, m, cfg.boundary);
            bool ok = false;
            have_trial_grad = false;
            if (eta * res * res > noise) {
                const double change =
                    detail::objective_change(trial, out.u, u_prev, h, k, cfg.exec);
                const double required = armijo ? -rule.c * eta * res * res : 0.0;
                ok = change < 0.0 && change <= required;
            } else {
                // sufficient decrease is not resolvable; require the residual to drop
                trial_grad =
                    detail::projected_gradient(trial, u_prev, h, k, m, cfg.boundary, cfg.exec);
                have_trial_grad = true;
                ok = trial_grad.norm < res;
            }
            if (ok) {
                f_trial = proximal_objective(trial, u_prev, h, k, cfg.exec);
                // the absolute value must also respect the comparison with u_prev
                if (f_trial <= d.objective_start) {
                    accepted = true;
                    break;
                }
            }
            if (!armijo) break;
            eta *= rule.beta;
            ++d.backtracks;
        }
        if (!accepted) {
            d.status = StepStatus::NoDescent;
            break;
        }
        out.u = std::move(trial);
        f = f_trial;
        grad = have_trial_grad ? std::move(trial_grad)
                               : detail::projected_gradient(out.u, u_prev, h, k, m, cfg.boundary,
                                                            cfg.exec);
    }
    const double res = grad.norm;
    if (d.status == StepStatus::MaxIterations && res <= cfg.inner_tol)
        d.status = StepStatus::Converged;
    d.residual = res;
    d.objective_end = f;
    if (d.objective_end > d.objective_start)
        throw Error(Errc::InnerSolverStalled, "objective increased over the step");
    return out;
}

/// u^0 .. u^K with per-step diagnostics. Vectors indexed by k = 0..K; entries
/// at k = 0 describe the initial field (zero displacement and residual).
struct FlowTrajectory {
    double h = 0.0;
    double cell_measure = 0.0;
    std::vector<Field> snapshots;
    Vector energies;
    Vector displacement_sq;  // mu sum_i |u^k_i - u^{k-1}_i|^2
    Vector residuals;
    Vector objectives;  // proximal objective of step k at u^k; E(u^0) at k = 0
    std::vector<StepDiagnostics> diagnostics;

    std::size_t steps() const noexcept { return snapshots.empty() ? 0 : snapshots.size() - 1; }

    bool all_converged() const {
        for (const auto& d : diagnostics)
            if (!d.converged()) return false;
        return true;
    }
};

inline FlowTrajectory run_flow(const Field& u0, const FlowConfig& cfg, const KernelTable& k,
                               const TargetManifold& m) {
    cfg.validate();
    m.check_field(u0);
    FlowTrajectory t;
    t.h = cfg.h;
    t.cell_measure = k.cell_measure();
    t.snapshots.reserve(cfg.steps + 1);
    t.snapshots.push_back(u0);
    t.snapshots.back().set_constrained(true);
    const double e0 = gagliardo_energy(u0, k, cfg.exec);
    t.energies.push_back(e0);
    t.displacement_sq.push_back(0.0);
    t.residuals.push_back(0.0);
    t.objectives.push_back(e0);
    t.diagnostics.push_back({});

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        StepResult res;
        try {
            res = minimizing_movement_step(t.snapshots.back(), cfg, k, m);
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(step) + ": " + e.detail());
        }
        t.displacement_sq.push_back(k.cell_measure() * dist_sq(res.u, t.snapshots.back()));
        t.energies.push_back(gagliardo_energy(res.u, k, cfg.exec));
        t.residuals.push_back(res.diag.residual);
        t.objectives.push_back(res.diag.objective_end);
        t.diagnostics.push_back(res.diag);
        t.snapshots.push_back(std::move(res.u));
    }
    return t;
}

/// Both sides of E(u^k) + sum_{j<=k} |u^j - u^{j-1}|^2_{L2} / 2h <= E(u^0), per k.
struct EnergyInequality {
    Vector lhs;
    double rhs = 0.0;
    Vector cumulative_dissipation;

    /// max_k (lhs_k - rhs); <= 0 when the inequality holds.
    double max_violation() const {
        double m = -INFINITY;
        for (double l : lhs) m = std::max(m, l - rhs);
        return m;
    }
};

inline EnergyInequality energy_inequality(const FlowTrajectory& t) {
    EnergyInequality out;
    out.rhs = t.energies.front();
    double dissipated = 0.0;
    for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
        dissipated += t.displacement_sq[k] / (2.0 * t.h);
        out.cumulative_dissipation.push_back(dissipated);
        out.lhs.push_back(t.energies[k] + dissipated);
    }
    return out;
}

struct Interpolants {
    Field piecewise_constant;  // u_h
    Field piecewise_linear;    // v_h
};

/// u_h(t) = u^k, v_h(t) = ((t - kh)/h) u^{k+1} + (((k+1)h - t)/h) u^k for kh <= t < (k+1)h.
inline Interpolants interpolants(const FlowTrajectory& t, double time) {
    const std::size_t steps = t.steps();
    if (!(time >= 0.0) || !(time < static_cast<double>(steps) * t.h))
        throw Error(Errc::OutOfRange, "time " + std::to_string(time) + " outside [0, K h)");
    auto k = static_cast<std::size_t>(std::floor(time / t.h));
    if (k > 0 && static_cast<double>(k) * t.h > time) --k;
    if (k + 1 < steps && static_cast<double>(k + 1) * t.h <= time) ++k;
    if (k >= steps) k = steps - 1;
    const double kh = static_cast<double>(k) * t.h;
    const double a = (time - kh) / t.h;
    const double b = 1.0 - a;  // ((k+1)h - t)/h
    const Field& lo = t.snapshots[k];
    const Field& hi = t.snapshots[k + 1];
    Field v(lo.rows(), lo.dim());
    for (std::size_t x = 0; x < v.data().size(); ++x)
        v.data()[x] = a * hi.data()[x] + b * lo.data()[x];
    return {lo, std::move(v)};
}

struct L2Closeness {
    double lhs = 0.0;  // int_0^T |u_h - v_h|^2_{L2} dt
    double rhs = 0.0;  // (2/3) h^2 E(u^0)
    bool holds() const noexcept { return lhs <= rhs; }
};

/// Exact time integral of |u_h - v_h|^2_{L2} over [0, T]. On a full interval
/// u_h - v_h = -tau (u^{k+1} - u^k) with tau in [0,1), giving (h/3)|u^{k+1}-u^k|^2;
/// a trailing partial interval of length r contributes r^3/(3h^2) |u^{k+1}-u^k|^2.
/// Summing the energy inequality gives sum |u^{k+1}-u^k|^2 <= 2h E(u^0), hence
/// lhs <= (2/3) h^2 E(u^0).
inline L2Closeness l2_closeness(const FlowTrajectory& t, double horizon) {
    const auto steps = static_cast<double>(t.steps());
    if (!(horizon >= 0.0) || horizon > steps * t.h * (1.0 + 1e-12))
        throw Error(Errc::OutOfRange, "horizon " + std::to_string(horizon) + " beyond K h");
    L2Closeness out;
    const double h = t.h;
    for (std::size_t k = 0; k < t.steps(); ++k) {
        const double start = static_cast<double>(k) * h;
        if (start >= horizon) break;
        const double len = std::min(h, horizon - start);
        out.lhs += len * len * len / (3.0 * h * h) * t.displacement_sq[k + 1];
    }
    out.rhs = 2.0 / 3.0 * h * h * t.energies.front();
    return out;
}

} // namespace gflow

#endif // GFLOW_FLOW_HPP
