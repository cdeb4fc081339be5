// Copyright 2026 The carlfb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scenario configuration: a flat JSON object of the keys below. Times
// (t_max, dt) are given in the unit named by time_unit and converted to
// 1/omega_r internally.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "carlfb/hilbert.hpp"
#include "carlfb/params.hpp"
#include "carlfb/time_grid.hpp"

namespace carlfb {

using json = nlohmann::json;

enum class TimeUnit { omega_r, kappa };

struct InitialState {
    /// Coherent amplitudes of (a, psi_c, psi_s); all zero is the vacuum.
    std::array<std::complex<double>, 3> alpha{};
    bool is_vacuum() const { return alpha[0] == 0.0 && alpha[1] == 0.0 && alpha[2] == 0.0; }
};

struct RunConfig {
    PhysParams phys;
    TruncationSpec trunc;
    TimeUnit time_unit = TimeUnit::omega_r;
    double t_max = 1.0; ///< in time_unit
    double dt = 1e-3;   ///< in time_unit
    int record_stride = 10;
    int n_trajectories = 100;
    std::uint64_t seed = 1;
    InitialState initial;
    bool keep_jumps = false;
    double eta_min = 0.0;
    double eta_max = 0.6;
    int n_points = 61;
    std::string description;

    /// Seconds-per-unit factor: t[1/omega_r] = t[unit] * time_scale().
    double time_scale() const { return time_unit == TimeUnit::kappa ? 1.0 / phys.kappa : 1.0; }
    double t_max_omega_r() const { return t_max * time_scale(); }
    double dt_omega_r() const { return dt * time_scale(); }
    TimeGrid grid() const { return TimeGrid::covering(t_max_omega_r(), dt_omega_r(), record_stride); }
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::vector<std::string> unknown_keys;
    bool ok() const { return errors.empty(); }
};

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "u0",          "n_atoms",     "kappa",      "gamma",        "eta",       "feedback_k",
        "cutoff_a",    "cutoff_c",    "cutoff_s",   "t_max",        "dt",        "n_trajectories",
        "seed",        "initial_state", "time_unit", "theta_scale", "theta_sign", "record_stride",
        "keep_jumps",  "eta_min",     "eta_max",    "n_points",     "description"};
    return keys;
}

inline const char* time_unit_name(TimeUnit u) { return u == TimeUnit::kappa ? "kappa" : "omega_r"; }

namespace detail {

inline std::complex<double> parse_amplitude(const json& v, const char* name) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(std::string("initial_state.coherent.") + name + " must be a number or [re, im]");
}

inline InitialState parse_initial_state(const json& v) {
    InitialState s;
    if (v.is_string()) {
        if (v.get<std::string>() != "vacuum") throw ConfigError("initial_state string must be \"vacuum\"");
        return s;
    }
    if (!v.is_object() || !v.contains("coherent") || !v["coherent"].is_object())
        throw ConfigError("initial_state must be \"vacuum\" or {\"coherent\": {\"a\": .., \"c\": .., \"s\": ..}}");
    const json& c = v["coherent"];
    const std::array<const char*, 3> names{"a", "c", "s"};
    for (const auto& [key, _] : c.items())
        if (key != "a" && key != "c" && key != "s") throw ConfigError("initial_state.coherent: unknown mode " + key);
    for (int k = 0; k < 3; ++k)
        if (c.contains(names[k])) s.alpha[k] = parse_amplitude(c[names[k]], names[k]);
    return s;
}

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

inline long get_integer(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long>(d);
    }
    throw ConfigError(std::string("config key '") + key + "' must be an integer");
}

} // namespace detail

/// Parses a config object. Unknown keys are ignored here and reported by validate_config.
inline RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    using detail::get_as;
    using detail::get_integer;
    if (j.contains("u0")) c.phys.u0 = get_as<double>(j, "u0");
    if (j.contains("n_atoms")) c.phys.n_atoms = get_integer(j, "n_atoms");
    if (j.contains("kappa")) c.phys.kappa = get_as<double>(j, "kappa");
    if (j.contains("gamma")) c.phys.gamma = get_as<double>(j, "gamma");
    if (j.contains("eta")) c.phys.eta = get_as<double>(j, "eta");
    if (j.contains("feedback_k")) c.phys.feedback_k = get_as<double>(j, "feedback_k");
    if (j.contains("theta_scale")) c.phys.theta_scale = get_as<double>(j, "theta_scale");
    if (j.contains("theta_sign")) c.phys.theta_sign = static_cast<int>(get_integer(j, "theta_sign"));
    if (j.contains("cutoff_a")) c.trunc.d_a = static_cast<int>(get_integer(j, "cutoff_a"));
    if (j.contains("cutoff_c")) c.trunc.d_c = static_cast<int>(get_integer(j, "cutoff_c"));
    if (j.contains("cutoff_s")) c.trunc.d_s = static_cast<int>(get_integer(j, "cutoff_s"));
    if (j.contains("t_max")) c.t_max = get_as<double>(j, "t_max");
    if (j.contains("dt")) c.dt = get_as<double>(j, "dt");
    if (j.contains("record_stride")) c.record_stride = static_cast<int>(get_integer(j, "record_stride"));
    if (j.contains("n_trajectories")) c.n_trajectories = static_cast<int>(get_integer(j, "n_trajectories"));
    if (j.contains("seed")) {
        const long s = get_integer(j, "seed");
        if (s < 0) throw ConfigError("seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("keep_jumps")) c.keep_jumps = get_as<bool>(j, "keep_jumps");
    if (j.contains("eta_min")) c.eta_min = get_as<double>(j, "eta_min");
    if (j.contains("eta_max")) c.eta_max = get_as<double>(j, "eta_max");
    if (j.contains("n_points")) c.n_points = static_cast<int>(get_integer(j, "n_points"));
    if (j.contains("description")) c.description = get_as<std::string>(j, "description");
    if (j.contains("initial_state")) c.initial = detail::parse_initial_state(j["initial_state"]);
    if (j.contains("time_unit")) {
        const auto u = get_as<std::string>(j, "time_unit");
        if (u == "omega_r") c.time_unit = TimeUnit::omega_r;
        else if (u == "kappa") c.time_unit = TimeUnit::kappa;
        else throw ConfigError("time_unit must be \"omega_r\" or \"kappa\"");
    }
    return c;
}

inline json to_json(const RunConfig& c) {
    json init;
    if (c.initial.is_vacuum()) {
        init = "vacuum";
    } else {
        const std::array<const char*, 3> names{"a", "c", "s"};
        for (int k = 0; k < 3; ++k)
            init["coherent"][names[k]] = json::array({c.initial.alpha[k].real(), c.initial.alpha[k].imag()});
    }
    json j = {
        {"u0", c.phys.u0},
        {"n_atoms", c.phys.n_atoms},
        {"kappa", c.phys.kappa},
        {"gamma", c.phys.gamma},
        {"eta", c.phys.eta},
        {"feedback_k", c.phys.feedback_k},
        {"theta_scale", c.phys.theta_scale},
        {"theta_sign", c.phys.theta_sign},
        {"cutoff_a", c.trunc.d_a},
        {"cutoff_c", c.trunc.d_c},
        {"cutoff_s", c.trunc.d_s},
        {"time_unit", time_unit_name(c.time_unit)},
        {"t_max", c.t_max},
        {"dt", c.dt},
        {"record_stride", c.record_stride},
        {"n_trajectories", c.n_trajectories},
        {"seed", c.seed},
        {"initial_state", init},
        {"keep_jumps", c.keep_jumps},
        {"eta_min", c.eta_min},
        {"eta_max", c.eta_max},
        {"n_points", c.n_points},
    };
    if (!c.description.empty()) j["description"] = c.description;
    return j;
}

/// Range checks on a parsed config. Hard violations go to errors.
inline void check_ranges(const RunConfig& c, ValidationReport& report) {
    try {
        for (auto& w : c.phys.validate()) report.warnings.push_back(std::move(w));
    } catch (const ConfigError& e) {
        report.errors.emplace_back(e.what());
    }
    if (c.trunc.d_a < 1 || c.trunc.d_c < 1 || c.trunc.d_s < 1) report.errors.emplace_back("cutoffs must be >= 1");
    if (!(c.dt > 0.0)) report.errors.emplace_back("dt must be > 0");
    if (!(c.t_max >= 0.0)) report.errors.emplace_back("t_max must be >= 0");
    if (c.record_stride < 1) report.errors.emplace_back("record_stride must be >= 1");
    if (c.n_trajectories < 1) report.errors.emplace_back("n_trajectories must be >= 1");
    if (c.n_points < 2) report.errors.emplace_back("n_points must be >= 2");
    if (!(c.eta_min < c.eta_max)) report.errors.emplace_back("eta_min must be < eta_max");
    if (c.eta_min < 0.0) report.errors.emplace_back("eta_min must be >= 0");
    if (c.time_unit == TimeUnit::kappa && !(c.phys.kappa > 0.0))
        report.errors.emplace_back("time_unit \"kappa\" requires kappa > 0");
    if (report.ok() && c.dt_omega_r() * c.phys.kappa > 0.05)
        report.warnings.emplace_back("step too coarse: dt*kappa = " + std::to_string(c.dt_omega_r() * c.phys.kappa) +
                                     " exceeds 0.05");
    if (c.trunc.dim() > 4096) report.warnings.emplace_back("Hilbert-space dimension above 4096; density-matrix runs will be slow");
}

inline ValidationReport validate_config(const json& j) {
    ValidationReport report;
    if (!j.is_object()) {
        report.errors.emplace_back("config must be a JSON object");
        return report;
    }
    for (const auto& [key, _] : j.items())
        if (!known_config_keys().count(key)) report.unknown_keys.push_back(key);
    RunConfig c;
    try {
        c = config_from_json(j);
    } catch (const ConfigError& e) {
        report.errors.emplace_back(e.what());
        return report;
    }
    check_ranges(c, report);
    return report;
}

/// Applies a `key=value` override; value is parsed as JSON, falling back to a string.
inline void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must have the form key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    j[key] = parsed.is_discarded() ? json(value) : parsed;
}

/// Reads a config file. A run manifest is accepted too: its "config" member is used.
inline json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded()) throw ConfigError("config file " + path + " is not valid JSON");
    if (j.is_object() && j.contains("config") && j.contains("solver") && j["config"].is_object()) return j["config"];
    return j;
}

/// FNV-1a 64 over the canonical JSON dump of the resolved config.
inline std::string config_hash(const RunConfig& c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

} // namespace carlfb
