#ifndef GFLOW_ORACLES_HPP
#define GFLOW_ORACLES_HPP

// Brute-force reference computations backing the library's derived test values.
// Deliberately self-contained: nothing here calls into the rest of gflow, so the
// oracles stay independent of the code paths they check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace gflow::oracles {

using Point = std::vector<double>;
using Points = std::vector<Point>;

inline double sq_dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

/// mu^2 |x - y|^{-(n + s p)} straight from the definition.
inline double pair_weight(const Point& x, const Point& y, double mu, double s, double p) {
    const double r = std::sqrt(sq_dist(x, y));
    return mu * mu * std::pow(r, -(static_cast<double>(x.size()) + s * p));
}

/// (1/p) sum over ordered pairs i != j of w_ij |u_i - u_j|^p, weights recomputed per pair.
inline double energy(const Points& centers, double mu, const Points& u, double s, double p) {
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (i == j) continue;
            e += pair_weight(centers[i], centers[j], mu, s, p) *
                 std::pow(std::sqrt(sq_dist(u[i], u[j])), p);
        }
    return e / p;
}

/// Central difference (f(t) - f(-t)) / 2t of t -> f(x + t d) at t = 0.
inline double central_difference(const std::function<double(double)>& f, double step) {
    return (f(step) - f(-step)) / (2.0 * step);
}

/// Dense I - p p^T applied to v.
inline Point sphere_projector_apply(const Point& p, const Point& v) {
    const std::size_t n = p.size();
    Point out(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            out[r] += ((r == c ? 1.0 : 0.0) - p[r] * p[c]) * v[c];
    return out;
}

/// Dense I - p p^T, row-major.
inline std::vector<double> sphere_projector_matrix(const Point& p) {
    const std::size_t n = p.size();
    std::vector<double> m(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m[r * n + c] = (r == c ? 1.0 : 0.0) - p[r] * p[c];
    return m;
}

/// Sum over i < j of (A_ij p)(A_ij p)^T with A_ij = e_i e_j^T - e_j e_i^T assembled
/// as explicit matrices.
inline std::vector<double> rotation_frame_sum(const Point& p) {
    const std::size_t n = p.size();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<double> a(n * n, 0.0);
            a[i * n + j] = 1.0;
            a[j * n + i] = -1.0;
            Point x(n, 0.0);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) x[r] += a[r * n + c] * p[c];
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) m[r * n + c] += x[r] * x[c];
        }
    return m;
}

inline Point torus_point(double t1, double t2) {
    return {std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2)};
}

/// Nearest point of S^1 x S^1 to v by exhaustive search over a res x res angle
/// grid, refined once around the best cell.
inline Point torus_nearest_dense(const Point& v, std::size_t res = 2000) {
    const double two_pi = 2.0 * std::numbers::pi;
    double best = std::numeric_limits<double>::infinity();
    double b1 = 0.0;
    double b2 = 0.0;
    auto scan = [&](double c1, double c2, double span) {
        const double lo1 = c1 - span / 2.0;
        const double lo2 = c2 - span / 2.0;
        const double d = span / static_cast<double>(res);
        for (std::size_t a = 0; a <= res; ++a)
            for (std::size_t b = 0; b <= res; ++b) {
                const double t1 = lo1 + d * static_cast<double>(a);
                const double t2 = lo2 + d * static_cast<double>(b);
                const double dist = sq_dist(torus_point(t1, t2), v);
                if (dist < best) {
                    best = dist;
                    b1 = t1;
                    b2 = t2;
                }
            }
    };
    scan(std::numbers::pi, std::numbers::pi, two_pi);
    scan(b1, b2, 4.0 * two_pi / static_cast<double>(res));
    return torus_point(b1, b2);
}

/// n nearly uniform points on S^2 (Fibonacci lattice).
inline Points fibonacci_sphere(std::size_t n) {
    Points pts;
    pts.reserve(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(1.0 - z * z);
        const double phi = golden * static_cast<double>(i);
        pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return pts;
}

/// Candidate minimizing f by exhaustive search.
inline Point brute_force_argmin(const Points& candidates, const std::function<double(const Point&)>& f) {
    double best = std::numeric_limits<double>::infinity();
    Point arg;
    for (const auto& c : candidates) {
        const double v = f(c);
        if (v < best) {
            best = v;
            arg = c;
        }
    }
    return arg;
}

} // namespace gflow::oracles

#endif // GFLOW_ORACLES_HPP
