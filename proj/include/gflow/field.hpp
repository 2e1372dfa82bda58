#ifndef GFLOW_FIELD_HPP
#define GFLOW_FIELD_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gflow/error.hpp"

namespace gflow {

using Vector = std::vector<double>;

namespace vec {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline Vector sub(std::span<const double> a, std::span<const double> b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

/// Cross product in R^3.
inline Vector cross(std::span<const double> a, std::span<const double> b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

} // namespace vec

/// A map value per grid cell: `rows()` cells, each an `dim()`-vector, stored row-major.
///
/// `constrained()` records that every row lies on a target manifold. The flag is
/// set by the code that established it (projection, presets, the flow) and is not
/// re-validated on access; TargetManifold::check_field() does that.
class Field {
public:
    Field() = default;
    Field(std::size_t rows, std::size_t dim, bool constrained = false)
        : rows_(rows), dim_(dim), data_(rows * dim, 0.0), constrained_(constrained) {}
    Field(std::size_t rows, std::size_t dim, Vector data, bool constrained = false)
        : rows_(rows), dim_(dim), data_(std::move(data)), constrained_(constrained) {
        if (data_.size() != rows_ * dim_)
            throw Error(Errc::DimensionMismatch, "field data size does not match rows*dim");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    bool constrained() const noexcept { return constrained_; }
    void set_constrained(bool c) noexcept { constrained_ = c; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }
    double& operator()(std::size_t i, std::size_t c) noexcept { return data_[i * dim_ + c]; }
    double operator()(std::size_t i, std::size_t c) const noexcept { return data_[i * dim_ + c]; }

    const Vector& data() const noexcept { return data_; }
    Vector& data() noexcept { return data_; }

    bool same_shape(const Field& o) const noexcept { return rows_ == o.rows_ && dim_ == o.dim_; }

    friend bool operator==(const Field& a, const Field& b) {
        return a.rows_ == b.rows_ && a.dim_ == b.dim_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    Vector data_;
    bool constrained_ = false;
};

inline void require_same_shape(const Field& a, const Field& b, const char* what) {
    if (!a.same_shape(b))
        throw Error(Errc::DimensionMismatch,
                    std::string(what) + ": fields have shapes " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.dim()) + " and " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.dim()));
}

/// Plain Euclidean inner product over all cells and components.
inline double inner(const Field& a, const Field& b) {
    require_same_shape(a, b, "inner");
    return vec::dot(a.data(), b.data());
}

inline double norm(const Field& a) { return vec::norm(a.data()); }

/// Sum over cells of |a_i - b_i|^2 (multiply by the cell measure for the L2 norm).
inline double dist_sq(const Field& a, const Field& b) {
    require_same_shape(a, b, "dist_sq");
    return vec::dist_sq(a.data(), b.data());
}

} // namespace gflow

#endif // GFLOW_FIELD_HPP
