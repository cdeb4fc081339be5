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

// carlfb: scenario runner for the feedback-controlled CARL model.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carlfb/carlfb.hpp"

#ifndef CARLFB_PRESET_DIR
#define CARLFB_PRESET_DIR "presets"
#endif

namespace {

namespace fs = std::filesystem;
using carlfb::json;

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
};

struct RunArgs {
    std::string out_dir = "out";
    std::optional<long> seed;
    std::optional<int> trajectories;
    std::optional<double> t_max;
    std::optional<double> dt;
    bool keep_jumps = false;
    long snapshot_stride = 0;
    unsigned threads = 0;
};

fs::path preset_dir() {
    if (const char* env = std::getenv("CARLFB_PRESET_DIR")) return env;
    return CARLFB_PRESET_DIR;
}

json load_input(const CommonArgs& args) {
    json j;
    if (!args.preset.empty()) {
        const fs::path path = preset_dir() / (args.preset + ".json");
        if (!fs::exists(path)) throw carlfb::ConfigError("unknown preset '" + args.preset + "' (looked in " + path.string() + ")");
        j = carlfb::load_config_json(path.string());
    }
    if (!args.config_path.empty()) {
        const json file = carlfb::load_config_json(args.config_path);
        if (j.is_null()) j = file;
        else j.update(file);
    }
    if (j.is_null()) j = json::object();
    for (const auto& o : args.overrides) carlfb::apply_override(j, o);
    return j;
}

void add_common(CLI::App* app, CommonArgs& args) {
    app->add_option("--config", args.config_path, "JSON config file (or a run manifest)");
    app->add_option("--preset", args.preset, "bundled scenario name, e.g. fig3_k0");
    app->add_option("--set", args.overrides, "override a config key: key=value")->take_all();
}

int print_validation(const json& j) {
    const carlfb::ValidationReport report = carlfb::validate_config(j);
    for (const auto& k : report.unknown_keys) std::cout << "unknown key: " << k << "\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
    for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
    if (report.ok() && report.unknown_keys.empty() && report.warnings.empty()) std::cout << "ok\n";
    return report.ok() && report.unknown_keys.empty() ? carlfb::kExitOk : carlfb::kExitConfig;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feedback-controlled collective light scattering simulator"};
    app.set_version_flag("--version", std::string(CARLFB_VERSION));
    app.require_subcommand(1);

    CommonArgs common;
    RunArgs run;
    std::optional<carlfb::Subcommand> chosen;

    const std::vector<std::pair<carlfb::Subcommand, const char*>> solvers{
        {carlfb::Subcommand::semiclassical, "integrate the mean-field quadrature equations"},
        {carlfb::Subcommand::stability, "linear stability scan over the pump amplitude"},
        {carlfb::Subcommand::lindblad, "propagate the feedback master equation"},
        {carlfb::Subcommand::mcwf, "quantum-trajectory ensemble for the feedback master equation"},
    };
    for (const auto& [cmd, help] : solvers) {
        CLI::App* sub = app.add_subcommand(carlfb::subcommand_name(cmd), help);
        add_common(sub, common);
        sub->add_option("--out", run.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", run.seed, "base random seed");
        sub->add_option("--trajectories", run.trajectories, "number of trajectories (mcwf)");
        sub->add_option("--tmax", run.t_max, "horizon, in the config's time_unit");
        sub->add_option("--dt", run.dt, "step, in the config's time_unit");
        sub->add_flag("--keep-jumps", run.keep_jumps, "write jumps.csv (mcwf)");
        sub->add_option("--snapshots", run.snapshot_stride, "write density snapshots every N steps (lindblad)");
        sub->add_option("--threads", run.threads, "worker threads (mcwf); 0 = all cores");
        sub->callback([&chosen, cmd = cmd] { chosen = cmd; });
    }

    CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
    add_common(validate, common);

    CLI::App* presets = app.add_subcommand("presets", "list bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            std::vector<std::string> names;
            for (const auto& entry : fs::directory_iterator(preset_dir()))
                if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
            std::sort(names.begin(), names.end());
            for (const auto& n : names) std::cout << n << "\n";
            return carlfb::kExitOk;
        }
        if (validate->parsed()) return print_validation(load_input(common));

        json j = load_input(common);
        if (run.seed) j["seed"] = *run.seed;
        if (run.trajectories) j["n_trajectories"] = *run.trajectories;
        if (run.t_max) j["t_max"] = *run.t_max;
        if (run.dt) j["dt"] = *run.dt;
        if (run.keep_jumps) j["keep_jumps"] = true;

        const carlfb::ValidationReport report = carlfb::validate_config(j);
        for (const auto& k : report.unknown_keys) std::cerr << "warning: unknown key " << k << "\n";

        carlfb::RunRequest req;
        req.command = *chosen;
        req.config = carlfb::config_from_json(j);
        req.out_dir = run.out_dir;
        req.snapshot_stride = run.snapshot_stride;
        req.n_threads = run.threads;
        const carlfb::RunOutcome outcome = carlfb::run_scenario(req);
        for (const auto& w : outcome.manifest.value("warnings", json::array())) std::cerr << "warning: " << w.get<std::string>() << "\n";
        if (!outcome.message.empty()) std::cerr << "error: " << outcome.message << "\n";
        if (outcome.manifest.value("unstable_growth", false)) std::cerr << "note: unstable growth, integration stopped at the overflow guard\n";
        if (outcome.manifest.value("tail_mass_flag", false)) std::cerr << "note: top Fock level population exceeded 1e-3; increase cutoffs\n";
        return outcome.exit_code;
    } catch (const carlfb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return carlfb::kExitConfig;
    } catch (const carlfb::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return carlfb::kExitNumerical;
    }
}
