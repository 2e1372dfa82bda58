#ifndef GFLOW_VERIFY_HPP
#define GFLOW_VERIFY_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gflow/energy.hpp"
#include "gflow/field.hpp"
#include "gflow/flow.hpp"
#include "gflow/grid.hpp"
#include "gflow/manifold.hpp"
#include "gflow/weakform.hpp"

namespace gflow {

/// One invariant check: passes when the measured value is finite and <= tolerance.
struct Check {
    std::string name;
    std::string property;  // serialized as "paper_ref"
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

class Report {
public:
    const Check& add(std::string name, std::string property, double measured, double tolerance) {
        const bool ok = std::isfinite(measured) && measured <= tolerance;
        checks_.push_back({std::move(name), std::move(property), measured, tolerance, ok});
        return checks_.back();
    }

    const std::vector<Check>& checks() const noexcept { return checks_; }

    bool all_pass() const {
        for (const auto& c : checks_)
            if (!c.pass) return false;
        return true;
    }

    const Check* find(const std::string& name) const {
        for (const auto& c : checks_)
            if (c.name == name) return &c;
        return nullptr;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks_)
            arr.push_back({{"name", c.name},
                           {"paper_ref", c.property},
                           {"measured", std::isfinite(c.measured) ? nlohmann::json(c.measured)
                                                                  : nlohmann::json(nullptr)},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass}});
        return {{"all_pass", all_pass()}, {"checks", arr}};
    }

private:
    std::vector<Check> checks_;
};

template <class Rng>
Vector random_point(const TargetManifold& m, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(m.ambient_dim());
    for (;;) {
        for (double& x : v) x = normal(rng);
        const bool inside = m.kind() == TargetKind::Sphere
                                ? vec::norm(v) >= kTubularRadius
                                : std::hypot(v[0], v[1]) >= kTubularRadius &&
                                      std::hypot(v[2], v[3]) >= kTubularRadius;
        if (!inside) continue;
        m.project_inplace(v);
        return v;
    }
}

template <class Rng>
Vector random_vector(std::size_t dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    for (double& x : v) x = normal(rng);
    return v;
}

template <class Rng>
Field random_field_on(const TargetManifold& m, std::size_t rows, Rng& rng) {
    Field f(rows, m.ambient_dim(), true);
    for (std::size_t i = 0; i < rows; ++i) {
        const Vector p = random_point(m, rng);
        std::copy(p.begin(), p.end(), f.row(i).begin());
    }
    return f;
}

template <class Rng>
Field random_ambient_field(std::size_t rows, std::size_t dim, Rng& rng) {
    Field f(rows, dim);
    for (double& x : f.data()) x = std::normal_distribution<double>(0.0, 1.0)(rng);
    return f;
}

/// Max over samples of the target-manifold identities: projector algebra,
/// Killing property, frame decomposition, projection derivative.
inline void manifold_checks(const TargetManifold& m, std::uint64_t seed, std::size_t samples,
                            Report& rep) {
    std::mt19937_64 rng(seed);
    const std::size_t L = m.ambient_dim();
    double idem = 0.0, sym = 0.0, kill = 0.0, decomp = 0.0, frame = 0.0, fd = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector p = random_point(m, rng);
        const Vector q = random_point(m, rng);
        const Vector v = random_vector(L, rng);
        const Vector w = random_vector(L, rng);

        const Vector pv = m.tangent_project(p, v);
        const Vector ppv = m.tangent_project(p, pv);
        idem = std::max(idem, std::sqrt(vec::dist_sq(ppv, pv)));
        sym = std::max(sym, std::abs(vec::dot(pv, w) - vec::dot(v, m.tangent_project(p, w))));

        for (std::size_t a = 0; a < m.killing_count(); ++a) {
            const Vector xp = m.killing_field(p, a);
            const Vector xq = m.killing_field(q, a);
            kill = std::max(kill, std::abs(vec::dot(vec::sub(xp, xq), vec::sub(p, q))));
        }

        Vector rebuilt(L, 0.0);
        for (std::size_t a = 0; a < m.killing_count(); ++a) {
            const Vector x = m.killing_field(p, a);
            const Vector y = m.dual_field(p, a);
            const double c = vec::dot(x, pv);
            for (std::size_t i = 0; i < L; ++i) rebuilt[i] += c * y[i];
        }
        decomp = std::max(decomp, std::sqrt(vec::dist_sq(rebuilt, pv)));

        Vector sum(L * L, 0.0);
        for (std::size_t a = 0; a < m.killing_count(); ++a) {
            const Vector x = m.killing_field(p, a);
            const Vector y = m.dual_field(p, a);
            for (std::size_t i = 0; i < L; ++i)
                for (std::size_t j = 0; j < L; ++j) sum[i * L + j] += x[i] * y[j];
        }
        const Vector pm = m.projector_matrix(p);
        for (std::size_t e = 0; e < L * L; ++e) frame = std::max(frame, std::abs(sum[e] - pm[e]));

        const double t = 1e-5;
        Vector plus = p, minus = p;
        for (std::size_t i = 0; i < L; ++i) plus[i] += t * v[i], minus[i] -= t * v[i];
        m.project_inplace(plus);
        m.project_inplace(minus);
        Vector diff(L);
        for (std::size_t i = 0; i < L; ++i) diff[i] = (plus[i] - minus[i]) / (2.0 * t);
        const double scale = vec::norm(pv);
        if (scale > 1e-3) fd = std::max(fd, std::sqrt(vec::dist_sq(diff, pv)) / scale);
    }
    rep.add("projector_idempotent", "tangent projector satisfies P^2 = P", idem, 1e-12);
    rep.add("projector_symmetric", "tangent projector satisfies P^T = P", sym, 1e-12);
    rep.add("killing_property", "<X(p) - X(q), p - q> = 0 for Killing fields", kill, 1e-12);
    rep.add("killing_decomposition", "v = sum <X_a, v> Y_a for tangent v", decomp, 1e-12);
    rep.add("projector_frame_sum", "sum X_a Y_a^T = P_N", frame, 1e-12);
    rep.add("projection_derivative", "P_N(p) is the derivative of the nearest-point projection",
            fd, 1e-6);
}

/// Cross-product cancellation and the Killing rewrite identity over random samples.
inline void identity_checks(const TargetManifold& m, std::uint64_t seed, std::size_t samples,
                            double p_exp, Report& rep) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    if (m.kind() == TargetKind::Sphere && m.ambient_dim() == 3) {
        double worst = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            const auto a = m.project(random_point(m, rng));
            const auto b = m.project(random_point(m, rng));
            const Vector psi1 = random_vector(3, rng);
            const Vector psi2 = random_vector(3, rng);
            const auto sides = cancellation_identity_check(a, b, psi1, psi2);
            worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
        }
        rep.add("cancellation_identity",
                "<a - b, a x psi1 - b x psi2> = <(a - b) x a, psi1 - psi2>", worst, 1e-12);
    }
    double worst = 0.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector a = random_point(m, rng);
        const Vector b = random_point(m, rng);
        const double c = normal(rng);
        const double d = normal(rng);
        const Vector diff = vec::sub(a, b);
        const double f = detail::increment_factor(vec::norm_sq(diff), p_exp);
        for (std::size_t al = 0; al < m.killing_count(); ++al) {
            const Vector xa = m.killing_field(a, al);
            const Vector xb = m.killing_field(b, al);
            double direct = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) direct += f * diff[i] * (xa[i] * c - xb[i] * d);
            const double rewritten = f * vec::dot(diff, xb) * (c - d);
            worst = std::max(worst, std::abs(direct - rewritten));
        }
    }
    rep.add("killing_rewrite_identity", "<W, X(a) c - X(b) d> = <W, X(b)(c - d)> for W || a - b",
            worst, 1e-12);
}

inline double relative_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return a == b ? 0.0 : std::abs(a - b) / scale;
}

/// Kernel-table invariants and energy/pairing/gradient consistency on u0 and
/// random fields of the configured grid.
inline void field_checks(const Grid& grid, const KernelTable& k, const TargetManifold& m,
                         const Field& u0, std::uint64_t seed, Exec exec, Report& rep) {
    std::mt19937_64 rng(seed + 17);
    double asym = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k.weight(i, i) != 0.0) asym = INFINITY;
        for (std::size_t j = i + 1; j < k.size(); ++j) {
            asym = std::max(asym, std::abs(k.weight(i, j) - k.weight(j, i)));
            if (!std::isfinite(k.weight(i, j)) || k.weight(i, j) < 0.0) finite = false;
        }
    }
    rep.add("kernel_symmetry", "pair weights symmetric with zero diagonal", asym, 0.0);
    rep.add("kernel_finite", "pair weights finite and nonnegative", finite ? 0.0 : 1.0, 0.0);
    rep.add("initial_constraint", "initial field lies on the target",
            m.max_constraint_residual(u0), kConstraintTol);

    std::vector<Field> samples{u0};
    for (int r = 0; r < 3; ++r) samples.push_back(random_field_on(m, grid.size(), rng));

    double homog = 0.0, adjoint = 0.0, fd = 0.0;
    for (const Field& v : samples) {
        const double pe = k.p() * gagliardo_energy(v, k, exec);
        homog = std::max(homog, std::abs(pairing(v, v, k, exec) - pe) / (1.0 + std::abs(pe)));

        const bool gradient_ok = k.p() >= 2.0;
        if (!gradient_ok) continue;
        const Field g = energy_gradient(v, k, exec);
        for (int r = 0; r < 3; ++r) {
            const Field phi = random_ambient_field(grid.size(), v.dim(), rng);
            const double pr = pairing(v, phi, k, exec);
            adjoint = std::max(adjoint, std::abs(inner(g, phi) - pr) / (1.0 + std::abs(pr)));
            const double t = 1e-6;
            Field plus = v, minus = v;
            for (std::size_t x = 0; x < plus.data().size(); ++x) {
                plus.data()[x] += t * phi.data()[x];
                minus.data()[x] -= t * phi.data()[x];
            }
            const double diff =
                (gagliardo_energy(plus, k, exec) - gagliardo_energy(minus, k, exec)) / (2.0 * t);
            // below this the directional derivative is rounding noise
            if (std::abs(pr) > 1e-9 || std::abs(diff) > 1e-9)
                fd = std::max(fd, relative_error(diff, pr));
        }
    }
    rep.add("pairing_homogeneity", "E'(v, v) = p E(v)", homog, 1e-12);
    if (k.p() >= 2.0) {
        rep.add("gradient_adjoint", "<grad E(u), phi> = E'(u, phi)", adjoint, 1e-12);
        rep.add("gradient_finite_difference", "grad E matches central differences of E", fd, 1e-6);
    }
}

struct TrajectoryCheckOptions {
    double inner_tol = 1e-8;
    std::size_t test_functions = 20;
    std::uint64_t seed = 0;
    bool pinned = false;
    Exec exec{};
};

/// Checks on a computed flow: energy inequality and comparison, constraint,
/// interpolant bounds, L2 closeness, and the weak-form residuals.
inline void trajectory_checks(const Grid& grid, const KernelTable& k, const TargetManifold& m,
                              const FlowTrajectory& t, const TrajectoryCheckOptions& opt,
                              Report& rep) {
    const double e0 = t.energies.front();
    rep.add("energy_inequality", "E(u^k) + sum |u^j - u^{j-1}|^2 / 2h <= E(u^0)",
            energy_inequality(t).max_violation(), 0.0);

    double comparison = -INFINITY;
    for (std::size_t j = 1; j <= t.steps(); ++j) {
        const double obj = proximal_objective(t.snapshots[j], t.snapshots[j - 1], t.h, k, opt.exec);
        comparison = std::max(comparison, obj - t.energies[j - 1]);
    }
    if (t.steps() == 0) comparison = 0.0;
    rep.add("per_step_comparison", "proximal objective at u^j <= E(u^{j-1})", comparison, 0.0);

    double constraint = 0.0;
    for (const auto& s : t.snapshots) constraint = std::max(constraint, m.max_constraint_residual(s));
    rep.add("constraint_preservation", "every snapshot lies on the target", constraint,
            kConstraintTol);

    double worst_residual = 0.0;
    for (double r : t.residuals) worst_residual = std::max(worst_residual, r);
    rep.add("inner_stationarity", "projected gradient of every step <= inner_tol", worst_residual,
            opt.inner_tol);

    if (opt.pinned) {
        double moved = 0.0;
        for (const auto& s : t.snapshots)
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (grid.collar(i))
                    moved = std::max(moved, std::sqrt(vec::dist_sq(s.row(i), t.snapshots[0].row(i))));
        rep.add("pinned_collar_unchanged", "collar cells stay at u1", moved, 0.0);
    }

    if (t.steps() > 0) {
        const double horizon = static_cast<double>(t.steps()) * t.h;
        double bound = 0.0;
        double energy_excess = -INFINITY;
        for (int s = 0; s < 100; ++s) {
            const double time = horizon * static_cast<double>(s) / 100.0;
            const auto in = interpolants(t, time);
            const Field& v = in.piecewise_linear;
            for (std::size_t i = 0; i < v.rows(); ++i) {
                const auto row = v.row(i);
                if (m.kind() == TargetKind::Sphere) {
                    bound = std::max(bound, vec::norm(row) - 1.0);
                } else {
                    bound = std::max({bound, std::hypot(row[0], row[1]) - 1.0,
                                      std::hypot(row[2], row[3]) - 1.0});
                }
            }
            energy_excess = std::max(energy_excess, gagliardo_energy(v, k, opt.exec) - e0);
        }
        rep.add("interpolant_pointwise_bound", "|v_h| <= 1 per sphere factor", bound, 1e-12);
        rep.add("interpolant_energy_bound", "E(v_h(t)) <= E(u^0)", energy_excess,
                1e-12 * (1.0 + e0));
        const auto l2 = l2_closeness(t, horizon);
        rep.add("l2_closeness", "int |u_h - v_h|^2 <= (2/3) h^2 E(u^0)", l2.lhs - l2.rhs, 0.0);
    }

    if (t.steps() == 0) return;
    std::mt19937_64 rng(opt.seed + 101);
    const double cert_tol = 10.0 * opt.inner_tol;
    const std::size_t L = m.ambient_dim();

    if (m.kind() == TargetKind::Sphere && L == 3) {
        double worst = 0.0, agree = 0.0, equiv = 0.0;
        for (std::size_t f = 0; f < opt.test_functions; ++f) {
            const TimeTestFunction psi = random_test_function(grid, 3, rng);
            const double r = sphere_weak_residual(t, psi, k, opt.exec);
            const double rr = sphere_weak_residual_rewritten(t, psi, k);
            const double nrm = psi.norm();
            if (nrm > 0.0) worst = std::max(worst, std::abs(r) / nrm);
            agree = std::max(agree, std::abs(r - rr));

            const TestFunction phi0 = random_test_function(grid, 3, rng);
            const TimeTestFunction phi = tangent_slices(grid, t, phi0, m);
            std::vector<TestFunction> recovered;
            for (std::size_t step = 1; step <= t.steps(); ++step)
                recovered.push_back(tangent_recovery(
                    grid, t.snapshots[step], TestFunction::make(grid, phi.at(step))).psi);
            const double sphere_form = sphere_weak_residual(t, TimeTestFunction(recovered), k, opt.exec);
            const double proj_form = projector_weak_residual(t, phi, k, m, opt.exec);
            equiv = std::max(equiv, std::abs(sphere_form - proj_form));
        }
        rep.add("sphere_weak_residual", "cross-product weak form, max |R(psi)| / |psi|", worst,
                cert_tol);
        rep.add("sphere_rewrite_agreement", "direct vs cancellation-rewritten pairing term", agree,
                1e-12);
        rep.add("formulation_equivalence", "cross-product form vs projector form, tangent tests",
                equiv, 1e-10);
    }

    double kworst = 0.0, kagree = 0.0;
    for (std::size_t f = 0; f < opt.test_functions; ++f) {
        const TimeTestFunction eta = random_test_function(grid, 1, rng);
        const double nrm = eta.norm();
        for (std::size_t a = 0; a < m.killing_count(); ++a) {
            const double r = killing_weak_residual(t, eta, a, k, m, KillingForm::Rewritten);
            const double rd = killing_weak_residual(t, eta, a, k, m, KillingForm::Direct);
            if (nrm > 0.0) kworst = std::max(kworst, std::abs(r) / nrm);
            kagree = std::max(kagree, std::abs(r - rd));
        }
    }
    rep.add("killing_weak_residual", "Killing-field weak form, max |R_a(eta)| / |eta|", kworst,
            cert_tol);
    rep.add("killing_rewrite_agreement", "Killing pairing term, direct vs rewritten", kagree, 1e-12);

    double pworst = 0.0, pagree = 0.0;
    for (std::size_t f = 0; f < opt.test_functions; ++f) {
        const TimeTestFunction phi = random_test_function(grid, L, rng);
        const double r = projector_weak_residual(t, phi, k, m, opt.exec);
        const double rk = projector_weak_residual_via_killing(grid, t, phi, k, m);
        const double nrm = phi.norm();
        if (nrm > 0.0) pworst = std::max(pworst, std::abs(r) / nrm);
        pagree = std::max(pagree, std::abs(r - rk));
    }
    rep.add("projector_weak_residual", "projector weak form, max |R(phi)| / |phi|", pworst,
            cert_tol);
    rep.add("projector_killing_agreement", "projector form vs summed Killing forms", pagree, 1e-12);
}

} // namespace gflow

#endif // GFLOW_VERIFY_HPP
