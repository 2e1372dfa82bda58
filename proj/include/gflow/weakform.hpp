#ifndef GFLOW_WEAKFORM_HPP
#define GFLOW_WEAKFORM_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gflow/energy.hpp"
#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/flow.hpp"
#include "gflow/grid.hpp"
#include "gflow/manifold.hpp"

namespace gflow {

/// Tangent-test tolerance for tangent_recovery.
inline constexpr double kTangentTol = 1e-10;

/// A spatial test function: an N_c x L (or N_c x 1 scalar) field vanishing on the collar.
class TestFunction {
public:
    static TestFunction make(const Grid& grid, Field values) {
        if (values.rows() != grid.size())
            throw Error(Errc::DimensionMismatch, "test function does not match grid");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!grid.collar(i)) continue;
            for (double x : values.row(i))
                if (x != 0.0)
                    throw Error(Errc::SupportViolation,
                                "test function is nonzero on collar cell " + std::to_string(i));
        }
        return TestFunction(std::move(values));
    }

    const Field& values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.dim(); }

private:
    explicit TestFunction(Field v) : values_(std::move(v)) {}
    Field values_;
};

/// Test function per flow step k = 1..K; a single slice is used for every step.
class TimeTestFunction {
public:
    TimeTestFunction(TestFunction constant) { slices_.push_back(std::move(constant)); }
    explicit TimeTestFunction(std::vector<TestFunction> per_step) : slices_(std::move(per_step)) {
        if (slices_.empty()) throw Error(Errc::DimensionMismatch, "empty time test function");
    }

    /// Slice used at step k (1-based).
    const Field& at(std::size_t k) const {
        if (slices_.size() == 1) return slices_.front().values();
        if (k == 0 || k > slices_.size())
            throw Error(Errc::OutOfRange, "test function has no slice for step " +
                                              std::to_string(k));
        return slices_[k - 1].values();
    }

    std::size_t slice_count() const noexcept { return slices_.size(); }

    /// max_k of the Euclidean norm of slice k.
    double norm() const {
        double m = 0.0;
        for (const auto& s : slices_) m = std::max(m, gflow::norm(s.values()));
        return m;
    }

private:
    std::vector<TestFunction> slices_;
};

/// Smoothed interior bump times independent standard normals per component.
template <class Rng>
TestFunction random_test_function(const Grid& grid, std::size_t dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const Vector bump = grid.smoothed_interior();
    Field f(grid.size(), dim);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t c = 0; c < dim; ++c) {
            const double z = normal(rng);
            f(i, c) = bump[i] == 0.0 ? 0.0 : bump[i] * z;
        }
    return TestFunction::make(grid, std::move(f));
}

struct IdentitySides {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = <a - b, a x psi1 - b x psi2>, rhs = <(a - b) x a, psi1 - psi2>. The two
/// agree identically since (a - b) x b = (a - b) x a.
inline IdentitySides cancellation_identity_check(const ManifoldPoint& a, const ManifoldPoint& b,
                                                 std::span<const double> psi1,
                                                 std::span<const double> psi2) {
    if (a.size() != 3 || b.size() != 3 || psi1.size() != 3 || psi2.size() != 3)
        throw Error(Errc::UnsupportedAmbientDim, "cancellation identity needs L = 3");
    const Vector d = vec::sub(a.coords(), b.coords());
    const Vector axp = vec::cross(a.coords(), psi1);
    const Vector bxq = vec::cross(b.coords(), psi2);
    const Vector dxa = vec::cross(d, a.coords());
    const Vector dpsi = vec::sub(psi1, psi2);
    return {vec::dot(d, vec::sub(axp, bxq)), vec::dot(dxa, dpsi)};
}

namespace detail {

inline void require_sphere3(const FlowTrajectory& t) {
    if (t.snapshots.empty() || t.snapshots.front().dim() != 3)
        throw Error(Errc::UnsupportedAmbientDim, "cross-product test functions need L = 3");
}

inline Field cellwise_cross(const Field& u, const Field& psi) {
    require_same_shape(u, psi, "cross product");
    Field out(u.rows(), 3);
    for (std::size_t i = 0; i < u.rows(); ++i) {
        const Vector c = vec::cross(u.row(i), psi.row(i));
        std::copy(c.begin(), c.end(), out.row(i).begin());
    }
    return out;
}

/// mu sum_i <(u^k_i - u^{k-1}_i)/h, phi_i>.
inline double time_derivative_term(const FlowTrajectory& t, std::size_t k, const Field& phi) {
    const Field& cur = t.snapshots[k];
    const Field& prev = t.snapshots[k - 1];
    require_same_shape(cur, phi, "time derivative term");
    double acc = 0.0;
    for (std::size_t x = 0; x < cur.data().size(); ++x)
        acc += (cur.data()[x] - prev.data()[x]) * phi.data()[x];
    return t.cell_measure * acc / t.h;
}

} // namespace detail

/// sum_k h [ <(u^k - u^{k-1})/h, u^k x psi^k>_{L2} + E'(u^k, u^k x psi^k) ].
inline double sphere_weak_residual(const FlowTrajectory& t, const TimeTestFunction& psi,
                                   const KernelTable& k, Exec exec = {}) {
    detail::require_sphere3(t);
    double r = 0.0;
    for (std::size_t step = 1; step <= t.steps(); ++step) {
        const Field& u = t.snapshots[step];
        const Field phi = detail::cellwise_cross(u, psi.at(step));
        r += t.h * (detail::time_derivative_term(t, step, phi) + pairing(u, phi, k, exec));
    }
    return r;
}

/// E'(u, u x psi) through the cancellation rewrite,
/// sum_{i != j} w_ij |u_i - u_j|^{p-2} <(u_i - u_j) x u_i, psi_i - psi_j>.
inline double cross_pairing_rewritten(const Field& u, const Field& psi, const KernelTable& k) {
    if (u.dim() != 3) throw Error(Errc::UnsupportedAmbientDim, "rewrite needs L = 3");
    require_same_shape(u, psi, "cross pairing");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
        for (std::size_t j = 0; j < u.rows(); ++j) {
            if (i == j) continue;
            const Vector d = vec::sub(u.row(i), u.row(j));
            const Vector dxu = vec::cross(d, u.row(i));
            const Vector dpsi = vec::sub(psi.row(i), psi.row(j));
            acc += k.weight(i, j) * detail::increment_factor(vec::norm_sq(d), k.p()) *
                   vec::dot(dxu, dpsi);
        }
    }
    return acc;
}

/// sphere_weak_residual with the pairing term evaluated by cross_pairing_rewritten.
inline double sphere_weak_residual_rewritten(const FlowTrajectory& t, const TimeTestFunction& psi,
                                             const KernelTable& k) {
    detail::require_sphere3(t);
    double r = 0.0;
    for (std::size_t step = 1; step <= t.steps(); ++step) {
        const Field& u = t.snapshots[step];
        const Field phi = detail::cellwise_cross(u, psi.at(step));
        r += t.h * (detail::time_derivative_term(t, step, phi) +
                    cross_pairing_rewritten(u, psi.at(step), k));
    }
    return r;
}

struct Recovery {
    TestFunction psi;
    double max_defect = 0.0;  // max_i |u_i x psi_i - phi_i|
};

/// psi_i = -u_i x phi_i, so that u_i x psi_i = phi_i for tangent phi on S^2.
inline Recovery tangent_recovery(const Grid& grid, const Field& u, const TestFunction& phi) {
    if (u.dim() != 3 || phi.dim() != 3)
        throw Error(Errc::UnsupportedAmbientDim, "tangent recovery needs L = 3");
    require_same_shape(u, phi.values(), "tangent recovery");
    double worst = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i)
        worst = std::max(worst, std::abs(vec::dot(u.row(i), phi.values().row(i))));
    if (worst > kTangentTol)
        throw Error(Errc::NotTangent, "max |<u, phi>| = " + std::to_string(worst));

    Field psi(u.rows(), 3);
    double defect = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
        Vector c = vec::cross(u.row(i), phi.values().row(i));
        // no -0 in output
        for (double& x : c) x = x == 0.0 ? 0.0 : -x;
        std::copy(c.begin(), c.end(), psi.row(i).begin());
        const Vector back = vec::cross(u.row(i), c);
        defect = std::max(defect, std::sqrt(vec::dist_sq(back, phi.values().row(i))));
    }
    return {TestFunction::make(grid, std::move(psi)), defect};
}

enum class KillingForm {
    Direct,     // <W_ij, X(u_i) eta_i - X(u_j) eta_j>
    Rewritten,  // <W_ij, X(u_j) (eta_i - eta_j)>
};

/// sum_{i != j} w_ij <W_ij, .> with W_ij = |u_i - u_j|^{p-2}(u_i - u_j), in either form.
inline double killing_pairing(const Field& u, const Field& eta, std::size_t alpha,
                              const KernelTable& k, const TargetManifold& m, KillingForm form) {
    if (eta.dim() != 1 || eta.rows() != u.rows())
        throw Error(Errc::DimensionMismatch, "Killing test function must be scalar per cell");
    if (alpha >= m.killing_count())
        throw Error(Errc::IndexOutOfRange, "Killing index " + std::to_string(alpha));
    const std::size_t n = u.rows();
    const std::size_t dim = u.dim();
    Field x(n, dim);
    for (std::size_t i = 0; i < n; ++i) m.killing_field(u.row(i), alpha, x.row(i));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Vector d = vec::sub(u.row(i), u.row(j));
            double inner = 0.0;
            if (form == KillingForm::Direct) {
                for (std::size_t c = 0; c < dim; ++c)
                    inner += d[c] * (x(i, c) * eta(i, 0) - x(j, c) * eta(j, 0));
            } else {
                inner = vec::dot(d, x.row(j)) * (eta(i, 0) - eta(j, 0));
            }
            acc += k.weight(i, j) * detail::increment_factor(vec::norm_sq(d), k.p()) * inner;
        }
    }
    return acc;
}

/// sum_k h [ <(u^k - u^{k-1})/h, X_alpha(u^k) eta^k>_{L2}
///           + sum_{i != j} w_ij <W_ij, X_alpha(u^k_j)(eta^k_i - eta^k_j)> ].
inline double killing_weak_residual(const FlowTrajectory& t, const TimeTestFunction& eta,
                                    std::size_t alpha, const KernelTable& k,
                                    const TargetManifold& m,
                                    KillingForm form = KillingForm::Rewritten) {
    if (alpha >= m.killing_count())
        throw Error(Errc::IndexOutOfRange, "Killing index " + std::to_string(alpha) +
                                               " >= " + std::to_string(m.killing_count()));
    double r = 0.0;
    for (std::size_t step = 1; step <= t.steps(); ++step) {
        const Field& u = t.snapshots[step];
        const Field& e = eta.at(step);
        Field phi(u.rows(), u.dim());
        for (std::size_t i = 0; i < u.rows(); ++i) {
            m.killing_field(u.row(i), alpha, phi.row(i));
            for (double& v : phi.row(i)) v *= e(i, 0);
        }
        r += t.h * (detail::time_derivative_term(t, step, phi) +
                    killing_pairing(u, e, alpha, k, m, form));
    }
    return r;
}

/// sum_k h [ <(u^k - u^{k-1})/h, P(u^k) phi^k>_{L2} + E'(u^k, P(u^k) phi^k) ].
inline double projector_weak_residual(const FlowTrajectory& t, const TimeTestFunction& phi,
                                      const KernelTable& k, const TargetManifold& m,
                                      Exec exec = {}) {
    double r = 0.0;
    for (std::size_t step = 1; step <= t.steps(); ++step) {
        const Field& u = t.snapshots[step];
        Field proj = phi.at(step);
        require_same_shape(u, proj, "projector residual");
        for (std::size_t i = 0; i < u.rows(); ++i) m.tangent_project_inplace(u.row(i), proj.row(i));
        r += t.h * (detail::time_derivative_term(t, step, proj) + pairing(u, proj, k, exec));
    }
    return r;
}

/// eta_alpha^k = <Y_alpha(u^k), phi^k> per step, as scalar test functions.
inline TimeTestFunction dual_coefficients(const Grid& grid, const FlowTrajectory& t,
                                          const TimeTestFunction& phi, std::size_t alpha,
                                          const TargetManifold& m) {
    std::vector<TestFunction> slices;
    Vector y(m.ambient_dim());
    for (std::size_t step = 1; step <= t.steps(); ++step) {
        const Field& u = t.snapshots[step];
        const Field& f = phi.at(step);
        Field eta(u.rows(), 1);
        for (std::size_t i = 0; i < u.rows(); ++i) {
            m.dual_field(u.row(i), alpha, y);
            const double c = vec::dot(y, f.row(i));
            eta(i, 0) = c == 0.0 ? 0.0 : c;
        }
        slices.push_back(TestFunction::make(grid, std::move(eta)));
    }
    return TimeTestFunction(std::move(slices));
}

/// sum_alpha killing_weak_residual(eta_alpha) with eta_alpha = <Y_alpha(u), phi>;
/// equals projector_weak_residual because sum_alpha X_alpha Y_alpha^T = P_N.
inline double projector_weak_residual_via_killing(const Grid& grid, const FlowTrajectory& t,
                                                  const TimeTestFunction& phi,
                                                  const KernelTable& k, const TargetManifold& m) {
    double r = 0.0;
    for (std::size_t a = 0; a < m.killing_count(); ++a)
        r += killing_weak_residual(t, dual_coefficients(grid, t, phi, a, m), a, k, m);
    return r;
}

/// phi^k = P(u^k) phi for each step: a time-indexed tangent test function.
inline TimeTestFunction tangent_slices(const Grid& grid, const FlowTrajectory& t,
                                       const TestFunction& phi, const TargetManifold& m) {
    std::vector<TestFunction> slices;
    for (std::size_t step = 1; step <= t.steps(); ++step) {
        Field f = phi.values();
        for (std::size_t i = 0; i < f.rows(); ++i)
            m.tangent_project_inplace(t.snapshots[step].row(i), f.row(i));
        slices.push_back(TestFunction::make(grid, std::move(f)));
    }
    return TimeTestFunction(std::move(slices));
}

} // namespace gflow

#endif // GFLOW_WEAKFORM_HPP
