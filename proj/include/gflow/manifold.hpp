#ifndef GFLOW_MANIFOLD_HPP
#define GFLOW_MANIFOLD_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gflow/error.hpp"
#include "gflow/field.hpp"

namespace gflow {

/// Points farther than this from the target (sphere: radius, torus: per circle)
/// are outside the neighbourhood where the nearest-point projection is used.
inline constexpr double kTubularRadius = 0.5;

/// Tolerance of the on-manifold invariant.
inline constexpr double kConstraintTol = 1e-12;

enum class TargetKind { Sphere, Torus2 };

class TargetManifold;

/// Ambient coordinates of a point known to lie on a target manifold.
class ManifoldPoint {
public:
    std::span<const double> coords() const noexcept { return coords_; }
    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    const Vector& vector() const noexcept { return coords_; }

private:
    friend class TargetManifold;
    explicit ManifoldPoint(Vector c) : coords_(std::move(c)) {}
    Vector coords_;
};

/// A compact target N in R^L with closed-form nearest-point projection, tangent
/// projector and a family of Killing fields X_alpha with duals Y_alpha satisfying
/// sum_alpha X_alpha Y_alpha^T = P_N.
///
/// Sphere(L): the unit sphere S^{L-1}; Killing fields are the rotation generators
/// X_(i,j)(p) = p_j e_i - p_i e_j for i < j, ordered lexicographically.
/// Torus2: S^1 x S^1 in R^4 (blocks (0,1) and (2,3)); one rotation generator per
/// circle, X(p) = (-p_1, p_0) in its block.
/// For both targets Y_alpha = X_alpha.
class TargetManifold {
public:
    static TargetManifold sphere(std::size_t ambient_dim) {
        if (ambient_dim < 2)
            throw Error(Errc::UnsupportedAmbientDim, "sphere target needs L >= 2");
        return TargetManifold(TargetKind::Sphere, ambient_dim);
    }
    static TargetManifold torus2() { return TargetManifold(TargetKind::Torus2, 4); }

    TargetKind kind() const noexcept { return kind_; }
    std::size_t ambient_dim() const noexcept { return dim_; }
    std::size_t intrinsic_dim() const noexcept {
        return kind_ == TargetKind::Sphere ? dim_ - 1 : 2;
    }
    std::size_t killing_count() const noexcept {
        return kind_ == TargetKind::Sphere ? dim_ * (dim_ - 1) / 2 : 2;
    }
    std::string name() const {
        return kind_ == TargetKind::Sphere ? "sphere" + std::to_string(dim_) : "torus2";
    }

    /// Largest deviation of the defining equations (|p|^2 = 1 per sphere/circle).
    double constraint_residual(std::span<const double> v) const {
        check_dim(v.size());
        if (kind_ == TargetKind::Sphere) return std::abs(vec::norm_sq(v) - 1.0);
        return std::max(std::abs(v[0] * v[0] + v[1] * v[1] - 1.0),
                        std::abs(v[2] * v[2] + v[3] * v[3] - 1.0));
    }

    bool contains(std::span<const double> v, double tol = kConstraintTol) const {
        return constraint_residual(v) <= tol;
    }

    /// Wraps coordinates already on N; throws ValidationError otherwise.
    ManifoldPoint point(Vector coords) const {
        if (!contains(coords))
            throw Error(Errc::ValidationError, "point is not on " + name());
        return ManifoldPoint(std::move(coords));
    }

    /// Nearest point of N to v.
    ManifoldPoint project(std::span<const double> v) const {
        Vector out(v.begin(), v.end());
        project_inplace(out);
        return ManifoldPoint(std::move(out));
    }

    void project_inplace(std::span<double> v) const {
        check_dim(v.size());
        if (kind_ == TargetKind::Sphere) {
            normalize_block(v);
        } else {
            normalize_block(v.subspan(0, 2));
            normalize_block(v.subspan(2, 2));
        }
    }

    /// P_N(p) v, the orthogonal projection of v onto T_p N.
    Vector tangent_project(std::span<const double> p, std::span<const double> v) const {
        Vector out(v.begin(), v.end());
        tangent_project_inplace(p, out);
        return out;
    }

    void tangent_project_inplace(std::span<const double> p, std::span<double> v) const {
        check_dim(p.size());
        check_dim(v.size());
        if (kind_ == TargetKind::Sphere) {
            remove_normal(p, v);
        } else {
            remove_normal(p.subspan(0, 2), v.subspan(0, 2));
            remove_normal(p.subspan(2, 2), v.subspan(2, 2));
        }
    }

    /// Dense L x L matrix of P_N(p), row-major.
    Vector projector_matrix(std::span<const double> p) const {
        Vector m(dim_ * dim_, 0.0);
        Vector e(dim_, 0.0);
        for (std::size_t c = 0; c < dim_; ++c) {
            std::fill(e.begin(), e.end(), 0.0);
            e[c] = 1.0;
            tangent_project_inplace(p, e);
            for (std::size_t r = 0; r < dim_; ++r) m[r * dim_ + c] = e[r];
        }
        return m;
    }

    /// Writes X_alpha(p) into out.
    void killing_field(std::span<const double> p, std::size_t alpha, std::span<double> out) const {
        check_dim(p.size());
        check_dim(out.size());
        if (alpha >= killing_count())
            throw Error(Errc::IndexOutOfRange, "Killing index " + std::to_string(alpha) +
                                                   " >= " + std::to_string(killing_count()));
        std::fill(out.begin(), out.end(), 0.0);
        if (kind_ == TargetKind::Sphere) {
            const auto [i, j] = rotation_plane(alpha);
            out[i] = p[j];
            out[j] = -p[i];
        } else {
            const std::size_t b = 2 * alpha;
            out[b] = -p[b + 1];
            out[b + 1] = p[b];
        }
    }

    Vector killing_field(std::span<const double> p, std::size_t alpha) const {
        Vector out(dim_);
        killing_field(p, alpha, out);
        return out;
    }

    std::vector<Vector> killing_fields(std::span<const double> p) const {
        std::vector<Vector> out;
        out.reserve(killing_count());
        for (std::size_t a = 0; a < killing_count(); ++a) out.push_back(killing_field(p, a));
        return out;
    }

    /// Y_alpha(p). Both concrete targets use the Killing fields themselves.
    void dual_field(std::span<const double> p, std::size_t alpha, std::span<double> out) const {
        killing_field(p, alpha, out);
    }

    Vector dual_field(std::span<const double> p, std::size_t alpha) const {
        return killing_field(p, alpha);
    }

    std::vector<Vector> dual_fields(std::span<const double> p) const { return killing_fields(p); }

    /// The coordinate plane (i, j), i < j, rotated by sphere generator alpha.
    std::pair<std::size_t, std::size_t> rotation_plane(std::size_t alpha) const {
        std::size_t a = alpha;
        for (std::size_t i = 0; i < dim_; ++i) {
            const std::size_t row = dim_ - 1 - i;
            if (a < row) return {i, i + 1 + a};
            a -= row;
        }
        throw Error(Errc::IndexOutOfRange, "rotation plane index");
    }

    /// Throws DimensionMismatch or ValidationError unless every row of f is on N.
    void check_field(const Field& f) const {
        if (f.dim() != dim_)
            throw Error(Errc::DimensionMismatch, "field has " + std::to_string(f.dim()) +
                                                     " components, target " + name() + " needs " +
                                                     std::to_string(dim_));
        for (std::size_t i = 0; i < f.rows(); ++i)
            if (!contains(f.row(i)))
                throw Error(Errc::ValidationError,
                            "row " + std::to_string(i) + " is not on " + name());
    }

    /// Largest per-row constraint residual of f.
    double max_constraint_residual(const Field& f) const {
        double m = 0.0;
        for (std::size_t i = 0; i < f.rows(); ++i) m = std::max(m, constraint_residual(f.row(i)));
        return m;
    }

    friend bool operator==(const TargetManifold& a, const TargetManifold& b) noexcept {
        return a.kind_ == b.kind_ && a.dim_ == b.dim_;
    }

private:
    TargetManifold(TargetKind k, std::size_t d) : kind_(k), dim_(d) {}

    void check_dim(std::size_t d) const {
        if (d != dim_)
            throw Error(Errc::DimensionMismatch, "vector of length " + std::to_string(d) +
                                                     " for target " + name());
    }

    static void normalize_block(std::span<double> b) {
        const double r = vec::norm(b);
        if (!(r >= kTubularRadius))
            throw Error(Errc::OutsideTubularNeighbourhood,
                        "norm " + std::to_string(r) + " below tubular radius");
        for (double& x : b) x /= r;
    }

    static void remove_normal(std::span<const double> p, std::span<double> v) {
        const double c = vec::dot(p, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * p[i];
    }

    TargetKind kind_;
    std::size_t dim_;
};

} // namespace gflow

#endif // GFLOW_MANIFOLD_HPP
