#ifndef GFLOW_ORACLE_CASES_HPP
#define GFLOW_ORACLE_CASES_HPP

// Named brute-force reference computations. Only gflow/oracles.hpp is used, so
// every value here is obtained without the library's own kernels or solvers.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gflow/oracles.hpp"

namespace gflow::oracles {

/// The single-free-cell step: 3 cells on [0,1], both outer cells pinned at
/// `pinned`, the middle cell starting at `start`, p = 2, s = 0.5, h = 0.1.
struct SingleCellStep {
    Points centers{{1.0 / 6.0}, {0.5}, {5.0 / 6.0}};
    double mu = 1.0 / 3.0;
    double s = 0.5;
    double p = 2.0;
    double h = 0.1;
    Point pinned{0.0, 0.0, 1.0};
    Point start{1.0, 0.0, 0.0};

    double objective(const Point& v) const {
        const Points u{pinned, v, pinned};
        return energy(centers, mu, u, s, p) + mu / (2.0 * h) * sq_dist(v, start);
    }

    Point brute_force_minimizer(std::size_t samples = 10000) const {
        return brute_force_argmin(fibonacci_sphere(samples),
                                  [this](const Point& v) { return objective(v); });
    }
};

inline const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names{
        "torus_projection", "tangent_projector", "frame_sum",    "kernel_two_cell",
        "kernel_homogeneity", "energy_two_cell", "gradient_two_cell", "pairing_fd",
        "half_equator",     "single_cell_step",  "quadrature_refinement"};
    return names;
}

/// Energy of f(x) = x on [0,1] with s = 0.25, p = 2 on a midpoint grid of `cells` cells.
inline double linear_map_energy(std::size_t cells) {
    const double mu = 1.0 / static_cast<double>(cells);
    Points c, u;
    for (std::size_t i = 0; i < cells; ++i) {
        const double x = (static_cast<double>(i) + 0.5) * mu;
        c.push_back({x});
        u.push_back({x});
    }
    return energy(c, mu, u, 0.25, 2.0);
}

/// Runs a named case; throws std::invalid_argument for unknown names.
inline nlohmann::json run_case(const std::string& name) {
    using nlohmann::json;
    if (name == "torus_projection") {
        const Point v{2.0, 0.0, 0.0, 3.0};
        return {{"input", v}, {"nearest", torus_nearest_dense(v)}};
    }
    if (name == "tangent_projector") {
        const Point p{0.0, 0.0, 1.0}, v{1.0, 1.0, 1.0};
        return {{"p", p}, {"v", v}, {"projected", sphere_projector_apply(p, v)}};
    }
    if (name == "frame_sum") {
        const Point p{0.6, 0.0, 0.8};
        return {{"p", p},
                {"frame_sum", rotation_frame_sum(p)},
                {"projector", sphere_projector_matrix(p)}};
    }
    if (name == "kernel_two_cell") {
        return {{"w12", pair_weight({0.25}, {0.75}, 0.5, 0.5, 2.0)}};
    }
    if (name == "kernel_homogeneity") {
        const double w = pair_weight({0.1}, {0.4}, 0.25, 0.5, 2.0);
        const double w2 = pair_weight({0.2}, {0.8}, 0.25, 0.5, 2.0);
        return {{"w", w}, {"w_doubled", w2}, {"ratio", w / w2}};
    }
    if (name == "energy_two_cell") {
        const Points c{{0.0}, {1.0}};
        const Points u{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
        return {{"p2_s0.5", energy(c, 1.0, u, 0.5, 2.0)}, {"p4_s0.25", energy(c, 1.0, u, 0.25, 4.0)}};
    }
    if (name == "gradient_two_cell") {
        const Points c{{0.0}, {1.0}};
        const Points u{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
        json g = json::array();
        for (std::size_t i = 0; i < 2; ++i) {
            Point gi;
            for (std::size_t a = 0; a < 3; ++a) {
                gi.push_back(central_difference(
                    [&](double t) {
                        Points w = u;
                        w[i][a] += t;
                        return energy(c, 1.0, w, 0.5, 2.0);
                    },
                    1e-6));
            }
            g.push_back(gi);
        }
        return {{"gradient", g}};
    }
    if (name == "pairing_fd") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> normal(0.0, 1.0);
        Points c, v, phi;
        for (int i = 0; i < 4; ++i) {
            c.push_back({0.125 + 0.25 * i});
            v.push_back({normal(rng), normal(rng), normal(rng)});
            phi.push_back({normal(rng), normal(rng), normal(rng)});
        }
        const double d = central_difference(
            [&](double t) {
                Points w = v;
                for (std::size_t i = 0; i < w.size(); ++i)
                    for (std::size_t a = 0; a < 3; ++a) w[i][a] += t * phi[i][a];
                return energy(c, 0.25, w, 0.5, 3.0);
            },
            1e-6);
        return {{"directional_derivative", d}, {"v", v}, {"phi", phi}};
    }
    if (name == "half_equator") {
        json rows = json::array();
        for (double x : {0.125, 0.375, 0.625, 0.875})
            rows.push_back({std::cos(std::numbers::pi * x), std::sin(std::numbers::pi * x), 0.0});
        return {{"rows", rows}};
    }
    if (name == "single_cell_step") {
        const SingleCellStep sc;
        const Point best = sc.brute_force_minimizer();
        return {{"minimizer", best}, {"objective", sc.objective(best)}};
    }
    if (name == "quadrature_refinement") {
        json e = json::object();
        for (std::size_t n : {16, 32, 64, 128}) e[std::to_string(n)] = linear_map_energy(n);
        return {{"energies", e}};
    }
    throw std::invalid_argument("unknown oracle case '" + name + "'");
}

} // namespace gflow::oracles

#endif // GFLOW_ORACLE_CASES_HPP
