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

// Scenario dispatch shared by the command-line tool and the tests.
// Exit codes: 0 success (including flagged divergence), 1 config error,
// 2 numerical failure.

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "carlfb/config.hpp"
#include "carlfb/lindblad.hpp"
#include "carlfb/mcwf.hpp"
#include "carlfb/model.hpp"
#include "carlfb/semiclassical.hpp"

#ifndef CARLFB_VERSION
#define CARLFB_VERSION "unknown"
#endif

namespace carlfb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

/// Runs whose top Fock level ever holds more population than this are flagged unreliable.
inline constexpr double kTailMassLimit = 1e-3;

enum class Subcommand { semiclassical, stability, lindblad, mcwf };

inline const char* subcommand_name(Subcommand s) {
    switch (s) {
    case Subcommand::semiclassical: return "semiclassical";
    case Subcommand::stability: return "stability";
    case Subcommand::lindblad: return "lindblad";
    case Subcommand::mcwf: return "mcwf";
    }
    return "?";
}

inline std::optional<Subcommand> parse_subcommand(const std::string& s) {
    if (s == "semiclassical") return Subcommand::semiclassical;
    if (s == "stability") return Subcommand::stability;
    if (s == "lindblad") return Subcommand::lindblad;
    if (s == "mcwf") return Subcommand::mcwf;
    return std::nullopt;
}

struct RunRequest {
    Subcommand command = Subcommand::semiclassical;
    RunConfig config;
    std::filesystem::path out_dir = ".";
    /// Write density-matrix snapshots every this many steps (lindblad only); 0 disables.
    long snapshot_stride = 0;
    unsigned n_threads = 0;
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;
    json manifest;
};

inline SemiclassicalState semiclassical_initial(const InitialState& init) {
    return {init.alpha[0].real(), init.alpha[0].imag(), init.alpha[1].real(),
            init.alpha[1].imag(), init.alpha[2].real(), init.alpha[2].imag()};
}

inline Vector quantum_initial(const InitialState& init, const TruncationSpec& trunc) {
    if (init.is_vacuum()) return vacuum(trunc);
    return coherent_product(trunc, init.alpha[0], init.alpha[1], init.alpha[2]);
}

namespace detail {

inline json tail_mass_json(const std::array<double, 3>& tail) {
    return {{"photon", tail[0]}, {"cosine", tail[1]}, {"sine", tail[2]}};
}

inline bool tail_mass_flag(const std::array<double, 3>& tail) {
    return tail[0] > kTailMassLimit || tail[1] > kTailMassLimit || tail[2] > kTailMassLimit;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

} // namespace detail

inline RunOutcome run_scenario(const RunRequest& req) {
    RunOutcome outcome;
    const RunConfig& cfg = req.config;
    json& manifest = outcome.manifest;
    manifest["solver"] = subcommand_name(req.command);
    manifest["version"] = CARLFB_VERSION;
    manifest["config"] = to_json(cfg);
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    manifest["unstable_growth"] = false;

    const auto started = std::chrono::steady_clock::now();
    auto finish = [&](int code, std::string message) {
        outcome.exit_code = code;
        outcome.message = std::move(message);
        manifest["exit_code"] = code;
        if (!outcome.message.empty()) manifest["message"] = outcome.message;
        manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::error_code ec;
        std::filesystem::create_directories(req.out_dir, ec);
        if (std::filesystem::is_directory(req.out_dir))
            detail::write_text(req.out_dir / "manifest.json", manifest.dump(2) + "\n");
        return outcome;
    };

    ValidationReport report;
    check_ranges(cfg, report);
    manifest["warnings"] = report.warnings;
    if (!report.ok()) {
        std::string msg = "invalid config:";
        for (const auto& e : report.errors) msg += " " + e + ";";
        return finish(kExitConfig, msg);
    }

    try {
        std::filesystem::create_directories(req.out_dir);
        const TimeGrid grid = cfg.grid();
        const std::string hash = config_hash(cfg);
        std::ostringstream csv;

        switch (req.command) {
        case Subcommand::semiclassical: {
            const SemiclassicalRun run = integrate(semiclassical_initial(cfg.initial), cfg.phys, grid);
            ObservableSeries series = run.series();
            series.config_hash = hash;
            series.seed = cfg.seed;
            write_series_csv(csv, series, cfg.phys.kappa);
            detail::write_text(req.out_dir / "series.csv", csv.str());
            manifest["unstable_growth"] = run.unstable_growth;
            manifest["t_end"] = run.t_end;
            break;
        }
        case Subcommand::stability: {
            const StabilityReport rep = threshold_scan(cfg.phys, cfg.eta_min, cfg.eta_max, cfg.n_points);
            write_stability_csv(csv, rep);
            detail::write_text(req.out_dir / "stability.csv", csv.str());
            manifest["threshold_eta"] = rep.threshold_eta ? json(*rep.threshold_eta) : json(nullptr);
            break;
        }
        case Subcommand::lindblad: {
            const ModelOperators m = build_collapse_ops(cfg.phys, cfg.trunc);
            LindbladOptions opts;
            if (req.snapshot_stride > 0) {
                opts.snapshot_stride = req.snapshot_stride;
                opts.snapshot = [&](long step, double, const Matrix& rho) {
                    std::ostringstream name;
                    name << "rho_" << std::setw(8) << std::setfill('0') << step << ".bin";
                    std::ofstream out(req.out_dir / name.str(), std::ios::binary);
                    write_density_snapshot(out, rho);
                };
            }
            LindbladResult res = propagate(m, density_from(quantum_initial(cfg.initial, cfg.trunc)), grid, opts);
            res.series.config_hash = hash;
            res.series.seed = cfg.seed;
            write_series_csv(csv, res.series, cfg.phys.kappa);
            detail::write_text(req.out_dir / "series.csv", csv.str());
            manifest["tail_mass"] = detail::tail_mass_json(res.tail_mass);
            manifest["tail_mass_flag"] = detail::tail_mass_flag(res.tail_mass);
            manifest["max_trace_drift"] = res.max_trace_drift;
            manifest["max_hermiticity_residual"] = res.max_hermiticity_residual;
            manifest["min_eigenvalue"] = res.min_eigenvalue;
            break;
        }
        case Subcommand::mcwf: {
            const ModelOperators m = build_collapse_ops(cfg.phys, cfg.trunc);
            EnsembleOptions opts;
            opts.keep_jumps = cfg.keep_jumps;
            opts.n_threads = req.n_threads;
            TrajectoryEnsembleResult res =
                run_ensemble(m, quantum_initial(cfg.initial, cfg.trunc), grid, cfg.n_trajectories, cfg.seed, opts);
            res.mean.config_hash = hash;
            res.standard_error.config_hash = hash;
            write_series_csv(csv, res.mean, cfg.phys.kappa);
            detail::write_text(req.out_dir / "series.csv", csv.str());
            std::ostringstream se;
            write_series_csv(se, res.standard_error, cfg.phys.kappa);
            detail::write_text(req.out_dir / "series_stderr.csv", se.str());
            if (cfg.keep_jumps) {
                std::ostringstream jumps;
                write_jumps_csv(jumps, res.jumps);
                detail::write_text(req.out_dir / "jumps.csv", jumps.str());
            }
            long total = 0;
            for (long n : res.cavity_jumps) total += n;
            manifest["n_trajectories"] = res.n_trajectories;
            manifest["cavity_jumps_total"] = total;
            manifest["tail_mass"] = detail::tail_mass_json(res.tail_mass);
            manifest["tail_mass_flag"] = detail::tail_mass_flag(res.tail_mass);
            break;
        }
        }
    } catch (const ConfigError& e) {
        return finish(kExitConfig, e.what());
    } catch (const NumericalError& e) {
        return finish(kExitNumerical, e.what());
    }
    return finish(kExitOk, {});
}

} // namespace carlfb
