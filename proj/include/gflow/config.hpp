#ifndef GFLOW_CONFIG_HPP
#define GFLOW_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gflow/error.hpp"
#include "gflow/flow.hpp"
#include "gflow/grid.hpp"
#include "gflow/manifold.hpp"

namespace gflow {

/// Everything needed for one batch run. Keys of the JSON schema match the member
/// names; see README for the full table.
struct RunConfig {
    std::size_t n = 1;
    double s = 0.5;
    double p = 2.0;
    std::string target = "sphere";  // "sphere" | "torus2"
    std::size_t L = 3;
    Box box = Box::unit(1);
    std::vector<std::size_t> cells_per_axis{32};
    double collar_width = 0.0;
    double h = 0.05;
    std::size_t steps = 40;
    double inner_tol = 1e-8;
    std::size_t inner_max_iters = 5000;
    std::string boundary_mode = "free";  // "free" | "pinned_collar"
    std::string step_rule = "armijo";    // "armijo" | "fixed"
    double eta0 = 1.0;
    double beta = 0.5;
    double armijo_c = 1e-4;
    double eta = 0.1;  // fixed step size
    std::string init = "constant";
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    unsigned threads = 1;
    std::size_t test_functions = 20;

    TargetManifold manifold() const {
        return target == "torus2" ? TargetManifold::torus2() : TargetManifold::sphere(L);
    }

    Grid grid() const { return build_grid(box, cells_per_axis, collar_width); }

    FlowConfig flow_config() const {
        FlowConfig f;
        f.h = h;
        f.steps = steps;
        f.inner_tol = inner_tol;
        f.inner_max_iters = inner_max_iters;
        if (step_rule == "fixed")
            f.step_rule = FixedStep{eta};
        else
            f.step_rule = ArmijoBacktracking{eta0, beta, armijo_c};
        f.exec.threads = threads;
        return f;
    }

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        return a.n == b.n && a.s == b.s && a.p == b.p && a.target == b.target && a.L == b.L &&
               a.box.lower == b.box.lower && a.box.upper == b.box.upper &&
               a.cells_per_axis == b.cells_per_axis && a.collar_width == b.collar_width &&
               a.h == b.h && a.steps == b.steps && a.inner_tol == b.inner_tol &&
               a.inner_max_iters == b.inner_max_iters && a.boundary_mode == b.boundary_mode &&
               a.step_rule == b.step_rule && a.eta0 == b.eta0 && a.beta == b.beta &&
               a.armijo_c == b.armijo_c && a.eta == b.eta && a.init == b.init &&
               a.seed == b.seed && a.out_dir == b.out_dir && a.threads == b.threads &&
               a.test_functions == b.test_functions;
    }
};

namespace detail {

using json = nlohmann::json;

inline const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> keys{"n", "s", "p", "target", "cells_per_axis",
                                               "h", "steps", "init"};
    return keys;
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "n",     "s",        "p",     "target",    "L",          "box",
        "cells_per_axis",    "collar_width",       "h",          "steps",
        "inner_tol",         "inner_max_iters",    "boundary_mode",
        "step_rule",         "eta0",  "beta",      "armijo_c",   "eta",
        "init",  "seed",     "out_dir", "threads", "test_functions"};
    return keys;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

[[noreturn]] inline void invalid(const std::string& key, const std::string& why) {
    throw ConfigError(Errc::ValidationError, key, key + ": " + why);
}

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(Errc::ParseError, key, key + ": wrong type (" + e.what() + ")");
    }
}

inline double get_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number())
        throw ConfigError(Errc::ParseError, key, key + ": expected a number");
    return j.at(key).get<double>();
}

inline std::size_t get_count(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(Errc::ParseError, key, key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

} // namespace detail

/// Parses JSON text; syntax errors become ParseError with the line number.
inline nlohmann::json parse_config_text(const std::string& text) {
    try {
        auto j = nlohmann::json::parse(text);
        if (!j.is_object())
            throw ConfigError(Errc::ParseError, "", "config must be a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(Errc::ParseError, "",
                          "line " + std::to_string(detail::line_of(text, e.byte)) + ": " +
                              e.what());
    }
}

/// Validates a config object and fills defaults for optional keys.
inline RunConfig resolve_config(const nlohmann::json& j) {
    using detail::invalid;
    for (const auto& [key, value] : j.items()) {
        const auto& known = detail::known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end())
            invalid(key, "unknown key");
    }
    for (const auto& key : detail::required_keys())
        if (!j.contains(key)) invalid(key, "required key is missing");

    RunConfig c;
    c.n = detail::get_count(j, "n");
    if (c.n < 1 || c.n > 2) invalid("n", "must be 1 or 2");
    c.s = detail::get_number(j, "s");
    if (!(c.s > 0.0 && c.s < 1.0)) invalid("s", "must lie in (0,1)");
    c.p = detail::get_number(j, "p");
    if (!(c.p > 1.0) || !std::isfinite(c.p)) invalid("p", "must lie in (1,inf)");

    c.target = detail::get_as<std::string>(j, "target");
    if (c.target != "sphere" && c.target != "torus2")
        invalid("target", "must be \"sphere\" or \"torus2\"");
    c.L = c.target == "torus2" ? 4 : 3;
    if (j.contains("L")) {
        c.L = detail::get_count(j, "L");
        if (c.target == "sphere" && c.L < 2) invalid("L", "sphere needs L >= 2");
        if (c.target == "torus2" && c.L != 4) invalid("L", "torus2 lives in R^4");
    }

    c.box = Box::unit(c.n);
    if (j.contains("box")) {
        const auto& b = j.at("box");
        if (!b.is_array() || b.size() != c.n)
            invalid("box", "expected one [lower, upper] pair per axis");
        for (std::size_t d = 0; d < c.n; ++d) {
            if (!b[d].is_array() || b[d].size() != 2 || !b[d][0].is_number() ||
                !b[d][1].is_number())
                invalid("box", "expected [lower, upper] numbers");
            c.box.lower[d] = b[d][0].get<double>();
            c.box.upper[d] = b[d][1].get<double>();
            if (!(c.box.upper[d] > c.box.lower[d])) invalid("box", "upper must exceed lower");
        }
    }

    const auto& cells = j.at("cells_per_axis");
    if (cells.is_number_integer()) {
        c.cells_per_axis.assign(c.n, detail::get_count(j, "cells_per_axis"));
    } else if (cells.is_array() && cells.size() == c.n) {
        c.cells_per_axis.clear();
        for (const auto& v : cells) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                invalid("cells_per_axis", "expected non-negative integers");
            c.cells_per_axis.push_back(v.get<std::size_t>());
        }
    } else {
        invalid("cells_per_axis", "expected an integer or one integer per axis");
    }
    for (auto v : c.cells_per_axis)
        if (v < 2) invalid("cells_per_axis", "need at least 2 cells per axis");

    if (j.contains("collar_width")) {
        c.collar_width = detail::get_number(j, "collar_width");
        if (!(c.collar_width >= 0.0)) invalid("collar_width", "must be >= 0");
    }
    c.h = detail::get_number(j, "h");
    if (!(c.h > 0.0)) invalid("h", "must be > 0");
    c.steps = detail::get_count(j, "steps");
    if (j.contains("inner_tol")) {
        c.inner_tol = detail::get_number(j, "inner_tol");
        if (!(c.inner_tol > 0.0)) invalid("inner_tol", "must be > 0");
    }
    if (j.contains("inner_max_iters")) {
        c.inner_max_iters = detail::get_count(j, "inner_max_iters");
        if (c.inner_max_iters < 1) invalid("inner_max_iters", "must be >= 1");
    }
    if (j.contains("boundary_mode")) {
        c.boundary_mode = detail::get_as<std::string>(j, "boundary_mode");
        if (c.boundary_mode != "free" && c.boundary_mode != "pinned_collar")
            invalid("boundary_mode", "must be \"free\" or \"pinned_collar\"");
    }
    if (j.contains("step_rule")) {
        c.step_rule = detail::get_as<std::string>(j, "step_rule");
        if (c.step_rule != "armijo" && c.step_rule != "fixed")
            invalid("step_rule", "must be \"armijo\" or \"fixed\"");
    }
    if (j.contains("eta0")) c.eta0 = detail::get_number(j, "eta0");
    if (!(c.eta0 > 0.0)) invalid("eta0", "must be > 0");
    if (j.contains("beta")) c.beta = detail::get_number(j, "beta");
    if (!(c.beta > 0.0 && c.beta < 1.0)) invalid("beta", "must lie in (0,1)");
    if (j.contains("armijo_c")) c.armijo_c = detail::get_number(j, "armijo_c");
    if (!(c.armijo_c > 0.0 && c.armijo_c < 1.0)) invalid("armijo_c", "must lie in (0,1)");
    if (j.contains("eta")) c.eta = detail::get_number(j, "eta");
    if (!(c.eta > 0.0)) invalid("eta", "must be > 0");

    c.init = detail::get_as<std::string>(j, "init");
    const bool snapshot = c.init.rfind("snapshot:", 0) == 0;
    if (!snapshot && c.init != "constant" && c.init != "half_equator" &&
        c.init != "random_uniform")
        invalid("init", "unknown preset \"" + c.init + "\"");
    if (snapshot && c.init.size() == 9) invalid("init", "snapshot preset needs a path");

    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(Errc::ParseError, "seed", "seed: expected a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (j.contains("out_dir")) c.out_dir = detail::get_as<std::string>(j, "out_dir");
    if (j.contains("threads")) {
        const auto t = detail::get_count(j, "threads");
        if (t < 1) invalid("threads", "must be >= 1");
        c.threads = static_cast<unsigned>(t);
    }
    if (j.contains("test_functions")) {
        c.test_functions = detail::get_count(j, "test_functions");
        if (c.test_functions < 1) invalid("test_functions", "must be >= 1");
    }
    return c;
}

/// The resolved config as JSON; resolve_config(config_to_json(c)) == c.
inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json box = nlohmann::json::array();
    for (std::size_t d = 0; d < c.box.dim(); ++d) box.push_back({c.box.lower[d], c.box.upper[d]});
    return {{"n", c.n},
            {"s", c.s},
            {"p", c.p},
            {"target", c.target},
            {"L", c.L},
            {"box", box},
            {"cells_per_axis", c.cells_per_axis},
            {"collar_width", c.collar_width},
            {"h", c.h},
            {"steps", c.steps},
            {"inner_tol", c.inner_tol},
            {"inner_max_iters", c.inner_max_iters},
            {"boundary_mode", c.boundary_mode},
            {"step_rule", c.step_rule},
            {"eta0", c.eta0},
            {"beta", c.beta},
            {"armijo_c", c.armijo_c},
            {"eta", c.eta},
            {"init", c.init},
            {"seed", c.seed},
            {"out_dir", c.out_dir},
            {"threads", c.threads},
            {"test_functions", c.test_functions}};
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Reads and parses path; `overrides` (flag values) replace file keys before
/// validation.
inline RunConfig load_config(const std::string& path,
                             const nlohmann::json& overrides = nlohmann::json::object()) {
    auto j = parse_config_text(read_text_file(path));
    for (const auto& [key, value] : overrides.items()) j[key] = value;
    return resolve_config(j);
}

} // namespace gflow

#endif // GFLOW_CONFIG_HPP
