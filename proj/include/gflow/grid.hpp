#ifndef GFLOW_GRID_HPP
#define GFLOW_GRID_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/parallel.hpp"

namespace gflow {

/// Axis-aligned box [lower, upper] in R^n.
struct Box {
    Vector lower;
    Vector upper;

    std::size_t dim() const noexcept { return lower.size(); }

    static Box unit(std::size_t n) { return Box{Vector(n, 0.0), Vector(n, 1.0)}; }
};

/// Uniform cell-centred discretization of a box, n in {1, 2}.
///
/// Cells are numbered with the first axis fastest. A cell is interior when its
/// centre is at distance >= collar_width from the boundary of the box; the rest
/// form the collar.
class Grid {
public:
    std::size_t dim() const noexcept { return box_.dim(); }
    std::size_t size() const noexcept { return interior_.size(); }
    const std::vector<std::size_t>& cells_per_axis() const noexcept { return cells_; }
    const Vector& spacing() const noexcept { return spacing_; }
    double cell_measure() const noexcept { return measure_; }
    const Box& box() const noexcept { return box_; }
    double collar_width() const noexcept { return collar_; }

    std::span<const double> center(std::size_t i) const noexcept {
        return {centers_.data() + i * dim(), dim()};
    }
    const Vector& centers() const noexcept { return centers_; }

    bool interior(std::size_t i) const noexcept { return interior_[i] != 0; }
    bool collar(std::size_t i) const noexcept { return interior_[i] == 0; }
    std::size_t interior_count() const noexcept {
        std::size_t c = 0;
        for (auto m : interior_) c += m;
        return c;
    }

    /// Per-axis index of cell i.
    std::vector<std::size_t> multi_index(std::size_t i) const {
        std::vector<std::size_t> idx(dim());
        for (std::size_t d = 0; d < dim(); ++d) {
            idx[d] = i % cells_[d];
            i /= cells_[d];
        }
        return idx;
    }

    std::size_t linear_index(std::span<const std::size_t> idx) const {
        std::size_t i = 0;
        for (std::size_t d = dim(); d-- > 0;) i = i * cells_[d] + idx[d];
        return i;
    }

    /// 1 on interior cells whose full one-cell ring is interior, 0.5 on interior
    /// cells touching the collar or the box boundary, 0 on the collar.
    Vector smoothed_interior() const {
        Vector b(size(), 0.0);
        for (std::size_t i = 0; i < size(); ++i) {
            if (!interior(i)) continue;
            const auto idx = multi_index(i);
            bool ring_inside = true;
            for_each_neighbour(idx, [&](std::size_t j, bool in_box) {
                if (!in_box || !interior(j)) ring_inside = false;
            });
            b[i] = ring_inside ? 1.0 : 0.5;
        }
        return b;
    }

    friend Grid build_grid(const Box& box, std::span<const std::size_t> cells_per_axis,
                           double collar_width);

private:
    template <class Fn>
    void for_each_neighbour(const std::vector<std::size_t>& idx, Fn&& fn) const {
        const std::size_t n = dim();
        std::size_t combos = 1;
        for (std::size_t d = 0; d < n; ++d) combos *= 3;
        std::vector<std::size_t> nb(n);
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t code = c;
            bool self = true;
            bool in_box = true;
            for (std::size_t d = 0; d < n; ++d) {
                const long off = static_cast<long>(code % 3) - 1;
                code /= 3;
                if (off != 0) self = false;
                const long k = static_cast<long>(idx[d]) + off;
                if (k < 0 || k >= static_cast<long>(cells_[d])) in_box = false;
                nb[d] = in_box ? static_cast<std::size_t>(k) : 0;
            }
            if (self) continue;
            fn(in_box ? linear_index(nb) : 0, in_box);
        }
    }

    Box box_;
    std::vector<std::size_t> cells_;
    Vector spacing_;
    double measure_ = 0.0;
    double collar_ = 0.0;
    Vector centers_;
    std::vector<unsigned char> interior_;
};

inline Grid build_grid(const Box& box, std::span<const std::size_t> cells_per_axis,
                       double collar_width) {
    const std::size_t n = box.dim();
    if (n < 1 || n > 2)
        throw Error(Errc::InvalidGeometry, "spatial dimension must be 1 or 2, got " +
                                               std::to_string(n));
    if (box.upper.size() != n || cells_per_axis.size() != n)
        throw Error(Errc::InvalidGeometry, "box corners and cells_per_axis disagree in dimension");
    if (!(collar_width >= 0.0) || !std::isfinite(collar_width))
        throw Error(Errc::InvalidGeometry, "collar_width must be finite and >= 0");

    Grid g;
    g.box_ = box;
    g.cells_.assign(cells_per_axis.begin(), cells_per_axis.end());
    g.collar_ = collar_width;
    g.spacing_.resize(n);
    g.measure_ = 1.0;
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) {
        if (g.cells_[d] < 2)
            throw Error(Errc::InvalidGeometry, "need at least 2 cells per axis");
        if (!(box.upper[d] > box.lower[d]))
            throw Error(Errc::InvalidGeometry, "box upper corner must exceed lower corner");
        g.spacing_[d] = (box.upper[d] - box.lower[d]) / static_cast<double>(g.cells_[d]);
        g.measure_ *= g.spacing_[d];
        total *= g.cells_[d];
    }

    g.centers_.resize(total * n);
    g.interior_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        const auto idx = g.multi_index(i);
        double boundary_dist = INFINITY;
        for (std::size_t d = 0; d < n; ++d) {
            const double x = box.lower[d] + (static_cast<double>(idx[d]) + 0.5) * g.spacing_[d];
            g.centers_[i * n + d] = x;
            boundary_dist = std::min({boundary_dist, x - box.lower[d], box.upper[d] - x});
        }
        g.interior_[i] = boundary_dist >= collar_width ? 1 : 0;
    }
    if (g.interior_count() == 0)
        throw Error(Errc::InvalidGeometry, "collar of width " + std::to_string(collar_width) +
                                               " leaves no interior cell");
    return g;
}

inline Grid build_grid(const Box& box, std::initializer_list<std::size_t> cells,
                       double collar_width) {
    const std::vector<std::size_t> c(cells);
    return build_grid(box, std::span<const std::size_t>(c), collar_width);
}

/// Pair weights w_ij = mu^2 |x_i - x_j|^{-(n + s p)}, w_ii = 0, one value per
/// unordered pair (packed upper triangle) so that w_ij == w_ji bitwise.
class KernelTable {
public:
    double s() const noexcept { return s_; }
    double p() const noexcept { return p_; }
    std::size_t size() const noexcept { return n_; }
    double cell_measure() const noexcept { return measure_; }

    double weight(std::size_t i, std::size_t j) const noexcept {
        if (i == j) return 0.0;
        if (i > j) std::swap(i, j);
        return packed_[offset(i) + (j - i - 1)];
    }

    /// Weights w_{i,j} for j = i+1 .. n-1, contiguous.
    std::span<const double> upper_row(std::size_t i) const noexcept {
        return {packed_.data() + offset(i), n_ - i - 1};
    }

    friend KernelTable build_kernel(const Grid& grid, double s, double p, Exec exec);

private:
    std::size_t offset(std::size_t i) const noexcept {
        // sum_{r<i} (n - r - 1)
        return i * (2 * n_ - i - 1) / 2;
    }

    double s_ = 0.0;
    double p_ = 0.0;
    std::size_t n_ = 0;
    double measure_ = 0.0;
    Vector packed_;
};

inline void validate_exponents(double s, double p) {
    if (!(s > 0.0 && s < 1.0))
        throw Error(Errc::InvalidExponent, "s must lie in (0,1), got " + std::to_string(s));
    if (!(p > 1.0) || !std::isfinite(p))
        throw Error(Errc::InvalidExponent, "p must lie in (1,inf), got " + std::to_string(p));
}

inline KernelTable build_kernel(const Grid& grid, double s, double p, Exec exec = {}) {
    validate_exponents(s, p);
    KernelTable k;
    k.s_ = s;
    k.p_ = p;
    k.n_ = grid.size();
    k.measure_ = grid.cell_measure();
    k.packed_.resize(k.n_ * (k.n_ - 1) / 2);
    const double half_exponent = 0.5 * (static_cast<double>(grid.dim()) + s * p);
    const double mu2 = k.measure_ * k.measure_;
    parallel_rows(k.n_, exec, [&](std::size_t i) {
        double* out = k.packed_.data() + k.offset(i);
        const auto xi = grid.center(i);
        for (std::size_t j = i + 1; j < k.n_; ++j)
            out[j - i - 1] = mu2 / std::pow(vec::dist_sq(xi, grid.center(j)), half_exponent);
    });
    return k;
}

} // namespace gflow

#endif // GFLOW_GRID_HPP
