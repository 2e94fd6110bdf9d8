/**
 * Copyright 2026 The LinBFT Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Scenario runner: `run <config>` and `sweep <config> --n 4,16,64,256`.
// Exit codes: 0 ok, 1 liveness failure or usage error, 2 invalid config,
// 3 safety violation.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "linbft/metrics.hpp"
#include "linbft/report.hpp"
#include "linbft/scenario.hpp"
#include "linbft/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSafety = 3;

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LinBFT consensus simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "reports";
    std::optional<std::uint64_t> seed;
    bool print_summary = false;
    std::vector<std::uint32_t> n_values;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("config", config_path, "scenario TOML file")->required();
    auto* sweep = app.add_subcommand("sweep", "run the scenario for several n and fit the volume exponent");
    sweep->add_option("config", config_path, "scenario TOML file")->required();
    sweep->add_option("--n", n_values, "comma-separated n values")->delimiter(',')->required();
    for (auto* sub : {run, sweep}) {
        sub->add_option("--seed", seed, "override the scenario seed");
        sub->add_option("--out", out_dir, "report directory");
        sub->add_flag("--summary", print_summary, "print a plain-text summary");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        linbft::ScenarioConfig cfg = linbft::load_scenario(config_path);
        if (seed) cfg.seed = *seed;
        const std::filesystem::path out(out_dir);

        if (run->parsed()) {
            const auto report = linbft::run_scenario(cfg);
            write_file(out / (cfg.name + ".jsonl"), linbft::to_jsonl(report));
            write_file(out / (cfg.name + ".txt"), linbft::summary(report));
            if (print_summary) std::cout << linbft::summary(report);
            if (!report.safe()) return kExitSafety;
            return report.live() ? kExitOk : kExitFailed;
        }

        std::vector<linbft::RunReport> runs;
        bool safe = true, live = true;
        std::string all;
        for (std::uint32_t n : n_values) {
            linbft::ScenarioConfig c = cfg;
            c.n = n;
            c.name = cfg.name + "-n" + std::to_string(n);
            if (!c.adversary.rotate_per_height) {
                c.adversary.corrupted.clear();
                c.f_actual = std::min(c.f_actual, linbft::ParticipantSet::default_f(n));
                for (std::uint32_t i = 0; i < c.f_actual; ++i) c.adversary.corrupted.push_back(linbft::NodeId{i});
            }
            if (cfg.epoch_length != 0 && c.epoch_length < n) c.epoch_length = 0;
            runs.push_back(linbft::run_scenario(c));
            safe = safe && runs.back().safe();
            live = live && runs.back().live();
            all += linbft::to_jsonl(runs.back());
        }
        const auto complexity = linbft::complexity_report(runs);
        all += linbft::to_jsonl(complexity);
        write_file(out / (cfg.name + "-sweep.jsonl"), all);
        write_file(out / (cfg.name + "-sweep.txt"), linbft::summary(complexity));
        if (print_summary) std::cout << linbft::summary(complexity);
        if (!safe) return kExitSafety;
        return live ? kExitOk : kExitFailed;
    } catch (const linbft::ConfigInvalid& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const linbft::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const linbft::DegenerateSweep& e) {
        std::cerr << "degenerate sweep: " << e.what() << "\n";
        return kExitConfig;
    } catch (const linbft::SafetyViolation& e) {
        std::cerr << "safety violation: " << e.what() << "\n";
        return kExitSafety;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
}
