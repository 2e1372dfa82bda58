#ifndef GFLOW_PRESETS_HPP
#define GFLOW_PRESETS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/grid.hpp"
#include "gflow/io.hpp"
#include "gflow/manifold.hpp"

namespace gflow {

/// Initial data on N. Presets: constant, half_equator (n = 1, sphere),
/// random_uniform (seeded), snapshot:<path>.
inline Field make_initial(const std::string& preset, const Grid& grid, const TargetManifold& m,
                          std::uint64_t seed = 0) {
    const std::size_t L = m.ambient_dim();
    Field u(grid.size(), L, true);

    if (preset == "constant") {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            u(i, 0) = 1.0;
            if (m.kind() == TargetKind::Torus2) u(i, 2) = 1.0;
        }
        return u;
    }

    if (preset == "half_equator") {
        if (m.kind() != TargetKind::Sphere)
            throw Error(Errc::PresetUnavailable, "half_equator needs a sphere target");
        if (grid.dim() != 1)
            throw Error(Errc::PresetUnavailable, "half_equator needs a 1D domain");
        const double lo = grid.box().lower[0];
        const double width = grid.box().upper[0] - lo;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = (grid.center(i)[0] - lo) / width;
            u(i, 0) = std::cos(std::numbers::pi * x);
            u(i, 1) = std::sin(std::numbers::pi * x);
        }
        return u;
    }

    if (preset == "random_uniform") {
        std::mt19937_64 rng(seed);
        if (m.kind() == TargetKind::Torus2) {
            std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double a = angle(rng);
                const double b = angle(rng);
                u(i, 0) = std::cos(a);
                u(i, 1) = std::sin(a);
                u(i, 2) = std::cos(b);
                u(i, 3) = std::sin(b);
            }
        } else {
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                auto row = u.row(i);
                do {
                    for (double& x : row) x = normal(rng);
                } while (vec::norm(row) < kTubularRadius);
                m.project_inplace(row);
            }
        }
        return u;
    }

    if (preset.rfind("snapshot:", 0) == 0) {
        Snapshot snap = read_snapshot(preset.substr(9));
        if (snap.values.rows() != grid.size() || snap.spatial_dim != grid.dim())
            throw Error(Errc::DimensionMismatch, "snapshot does not match the configured grid");
        m.check_field(snap.values);
        snap.values.set_constrained(true);
        return snap.values;
    }

    throw Error(Errc::PresetUnavailable, "unknown preset \"" + preset + "\"");
}

} // namespace gflow

#endif // GFLOW_PRESETS_HPP
