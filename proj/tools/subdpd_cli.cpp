// Copyright 2026 The subdpd Authors
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

// Scenario runner for the sub-band DPD simulator: `run` executes one config
// end to end (waveform -> PA -> DPD learning -> metrics), `sweep` repeats it
// over a swept variable.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subdpd.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sub-band DPD simulator for noncontiguous dual-carrier transmitters"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  std::int64_t seed_override = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "scenario config file")->required();
    cmd->add_option("--out", out_dir, "output directory (default out_<name>)");
    cmd->add_option("--seed", seed_override, "override run.seed");
    cmd->add_flag("--quiet", quiet, "suppress progress output");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario");
  add_common(run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep one variable");
  add_common(sweep_cmd);
  std::string variable;
  double from = 0.0, to = 0.0;
  std::size_t steps = 1;
  sweep_cmd->add_option("--var", variable, "tx_power_db or dpd_order")->required();
  sweep_cmd->add_option("--from", from, "first value")->required();
  sweep_cmd->add_option("--to", to, "last value")->required();
  sweep_cmd->add_option("--steps", steps, "number of points")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    subdpd::Scenario sc = subdpd::load_scenario(config_path);
    if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
    if (out_dir.empty()) out_dir = "out_" + sc.name;

    if (app.got_subcommand(run_cmd)) {
      const subdpd::ScenarioReport rep = subdpd::run_scenario(sc, out_dir, quiet);
      if (!quiet) {
        std::cout << "wrote " << rep.files_written.size() << " files to "
                  << out_dir << "\n";
      }
    } else {
      subdpd::sweep(sc, variable, from, to, steps, out_dir, quiet);
      if (!quiet) std::cout << "wrote sweep.csv to " << out_dir << "\n";
    }
  } catch (const subdpd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
