#ifndef GFLOW_IO_HPP
#define GFLOW_IO_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gflow/error.hpp"
#include "gflow/field.hpp"
#include "gflow/flow.hpp"
#include "gflow/grid.hpp"

namespace gflow {

/// Shortest-round-trip-safe decimal form (17 significant digits).
inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Snapshot CSV: cell_index, x0[, x1], u0..u{L-1}.
inline void write_snapshot(const std::string& path, const Grid& grid, const Field& u) {
    if (u.rows() != grid.size())
        throw Error(Errc::DimensionMismatch, "snapshot field does not match grid");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path);
    out << "cell_index";
    for (std::size_t d = 0; d < grid.dim(); ++d) out << ",x" << d;
    for (std::size_t c = 0; c < u.dim(); ++c) out << ",u" << c;
    out << '\n';
    for (std::size_t i = 0; i < u.rows(); ++i) {
        out << i;
        for (double x : grid.center(i)) out << ',' << format_real(x);
        for (double v : u.row(i)) out << ',' << format_real(v);
        out << '\n';
    }
    if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

struct Snapshot {
    std::size_t spatial_dim = 0;
    Vector centers;
    Field values;
};

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open snapshot " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::ParseError, path + ": empty snapshot");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) header.push_back(col);
    }
    if (header.empty() || header[0] != "cell_index")
        throw Error(Errc::ParseError, path + ": first column must be cell_index");
    Snapshot snap;
    std::size_t value_cols = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].rfind('x', 0) == 0)
            ++snap.spatial_dim;
        else if (header[c].rfind('u', 0) == 0)
            ++value_cols;
        else
            throw Error(Errc::ParseError, path + ": unexpected column " + header[c]);
    }
    if (value_cols == 0) throw Error(Errc::ParseError, path + ": no value columns");

    Vector values;
    std::size_t rows = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> nums;
        while (std::getline(ss, cell, ',')) {
            // strtod rather than stod: subnormal values must parse, not throw
            char* end = nullptr;
            const double x = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw Error(Errc::ParseError,
                            path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            nums.push_back(x);
        }
        if (nums.size() != header.size())
            throw Error(Errc::ParseError, path + ":" + std::to_string(lineno) + ": expected " +
                                              std::to_string(header.size()) + " columns");
        if (static_cast<std::size_t>(nums[0]) != rows)
            throw Error(Errc::ParseError,
                        path + ":" + std::to_string(lineno) + ": cell_index out of order");
        for (std::size_t d = 0; d < snap.spatial_dim; ++d) snap.centers.push_back(nums[1 + d]);
        for (std::size_t c = 0; c < value_cols; ++c)
            values.push_back(nums[1 + snap.spatial_dim + c]);
        ++rows;
    }
    snap.values = Field(rows, value_cols, std::move(values));
    return snap;
}

/// energy_trace.csv: one row per k = 0..K.
inline void write_energy_trace(const std::string& path, const FlowTrajectory& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path);
    const EnergyInequality ineq = energy_inequality(t);
    out << "step,time,energy,displacement_sq,cumulative_dissipation,inequality_lhs,"
           "inequality_rhs,step_residual\n";
    for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
        out << k << ',' << format_real(static_cast<double>(k) * t.h) << ','
            << format_real(t.energies[k]) << ',' << format_real(t.displacement_sq[k]) << ','
            << format_real(ineq.cumulative_dissipation[k]) << ',' << format_real(ineq.lhs[k])
            << ',' << format_real(ineq.rhs) << ',' << format_real(t.residuals[k]) << '\n';
    }
    if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

} // namespace gflow

#endif // GFLOW_IO_HPP
