#ifndef GFLOW_ENERGY_HPP
#define GFLOW_ENERGY_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>

#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/grid.hpp"
#include "gflow/parallel.hpp"

namespace gflow {

/// Increments shorter than this make the gradient of |t|^p non-smooth for p < 2.
inline constexpr double kDegenerateIncrement = 1e-14;

namespace detail {

/// |d|^{p-2} from |d|^2, with |0|^{p-2} * 0 := 0.
inline double increment_factor(double d2, double p) {
    if (p == 2.0) return 1.0;
    if (d2 == 0.0) return 0.0;
    return std::pow(d2, 0.5 * (p - 2.0));
}

/// |d|^p from |d|^2.
inline double increment_power(double d2, double p) {
    if (p == 2.0) return d2;
    return std::pow(d2, 0.5 * p);
}

inline void require_grid(const Field& u, const KernelTable& k, const char* what) {
    if (u.rows() != k.size())
        throw Error(Errc::DimensionMismatch, std::string(what) + ": field has " +
                                                 std::to_string(u.rows()) +
                                                 " rows, kernel table " + std::to_string(k.size()));
}

/// Sum over rows of row_fn(i), combined in row order.
template <class RowFn>
double ordered_row_sum(std::size_t n, Exec exec, RowFn&& row_fn) {
    Vector partial(n, 0.0);
    parallel_rows(n, exec, [&](std::size_t i) { partial[i] = row_fn(i); });
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

} // namespace detail

/// E(u) = (1/p) sum_{i != j} w_ij |u_i - u_j|^p.
inline double gagliardo_energy(const Field& u, const KernelTable& k, Exec exec = {}) {
    detail::require_grid(u, k, "gagliardo_energy");
    const double p = k.p();
    const double sum = detail::ordered_row_sum(k.size(), exec, [&](std::size_t i) {
        const auto w = k.upper_row(i);
        const auto ui = u.row(i);
        double acc = 0.0;
        for (std::size_t j = i + 1; j < k.size(); ++j)
            acc += w[j - i - 1] * detail::increment_power(vec::dist_sq(ui, u.row(j)), p);
        return acc;
    });
    return 2.0 * sum / p;
}

/// E'(v, phi) = sum_{i != j} w_ij |v_i - v_j|^{p-2} <v_i - v_j, phi_i - phi_j>,
/// the directional derivative of gagliardo_energy at v along phi.
inline double pairing(const Field& v, const Field& phi, const KernelTable& k, Exec exec = {}) {
    detail::require_grid(v, k, "pairing");
    require_same_shape(v, phi, "pairing");
    const double p = k.p();
    const std::size_t dim = v.dim();
    const double sum = detail::ordered_row_sum(k.size(), exec, [&](std::size_t i) {
        const auto w = k.upper_row(i);
        const auto vi = v.row(i);
        const auto fi = phi.row(i);
        double acc = 0.0;
        for (std::size_t j = i + 1; j < k.size(); ++j) {
            const auto vj = v.row(j);
            const auto fj = phi.row(j);
            double d2 = 0.0;
            double dd = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = vi[c] - vj[c];
                d2 += d * d;
                dd += d * (fi[c] - fj[c]);
            }
            acc += w[j - i - 1] * detail::increment_factor(d2, p) * dd;
        }
        return acc;
    });
    return 2.0 * sum;
}

/// g_i = 2 sum_{j != i} w_ij |u_i - u_j|^{p-2} (u_i - u_j), the Euclidean
/// gradient of gagliardo_energy: <g, phi> = pairing(u, phi).
///
/// For p < 2 fails with DegenerateIncrement when some |u_i - u_j| < 1e-14.
inline Field energy_gradient(const Field& u, const KernelTable& k, Exec exec = {}) {
    detail::require_grid(u, k, "energy_gradient");
    const double p = k.p();
    const std::size_t n = k.size();
    const std::size_t dim = u.dim();
    Field g(n, dim);
    const double degenerate_sq = kDegenerateIncrement * kDegenerateIncrement;
    parallel_rows(n, exec, [&](std::size_t i) {
        const auto ui = u.row(i);
        auto gi = g.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto uj = u.row(j);
            const double d2 = vec::dist_sq(ui, uj);
            if (p < 2.0 && d2 < degenerate_sq)
                throw Error(Errc::DegenerateIncrement,
                            "cells " + std::to_string(i) + " and " + std::to_string(j) +
                                " coincide; gradient undefined for p < 2");
            const double c = 2.0 * k.weight(i, j) * detail::increment_factor(d2, p);
            for (std::size_t a = 0; a < dim; ++a) gi[a] += c * (ui[a] - uj[a]);
        }
    });
    return g;
}

} // namespace gflow

#endif // GFLOW_ENERGY_HPP
