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

#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "subdpd/scenario.hpp"

using namespace subdpd;
namespace fs = std::filesystem;

namespace {

const std::string kSourceDir = SUBDPD_SOURCE_DIR;

fs::path make_temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("subdpd_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

/// Reduced-size adaptive scenario on the third-order fixture.
std::string small_adaptive_config(const std::string& name) {
  return "scenario.name = " + name + "\n" +
         "waveform.cc_bandwidth_hz = 1e6 1e6\n"
         "waveform.carrier_spacing_hz = 10e6\n"
         "waveform.max_sub_band_order = 5\n"
         "pa.fixture = " + kSourceDir + "/fixtures/mem3.txt\n" +
         "dpd.targets = 3+\n"
         "dpd.order = 3\n"
         "dpd.memory = 0\n"
         "learn.mu = 0.35\n"
         "learn.updates = 50\n"
         "metrics.samples = 80000\n"
         "metrics.tx_power_dbm = 23\n"
         "run.seed = 4\n";
}

}  // namespace

TEST_CASE("shipped scenario presets parse") {
  for (const std::string name :
       {"tableII_analytic", "fig5_im3", "fig8_multiband", "rx_desense"}) {
    const Scenario sc = load_scenario(kSourceDir + "/scenarios/" + name + ".cfg");
    REQUIRE(sc.name == name);
    REQUIRE(sc.pa.branches.count(1) == 1);
  }
}

TEST_CASE("config validation errors") {
  const fs::path dir = make_temp_dir("cfg_errors");

  SECTION("unknown keys are rejected by name") {
    write_file(dir / "bad.cfg",
               "pa.fixture = " + kSourceDir + "/fixtures/mem3.txt\n" +
                   "dpd.tragets = 3+\n");
    try {
      load_scenario((dir / "bad.cfg").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("dpd.tragets") != std::string::npos);
    }
  }
  SECTION("sub-band above the PA order names the field") {
    write_file(dir / "band.cfg",
               "pa.fixture = " + kSourceDir + "/fixtures/mem3.txt\n" +
                   "dpd.targets = 5+\n");
    try {
      load_scenario((dir / "band.cfg").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("dpd.targets") != std::string::npos);
    }
  }
  SECTION("missing fixture") {
    write_file(dir / "nofix.cfg", "pa.fixture = nowhere.txt\n");
    REQUIRE_THROWS_AS(load_scenario((dir / "nofix.cfg").string()), ConfigError);
  }
  SECTION("duplicate keys") {
    write_file(dir / "dup.cfg",
               "pa.fixture = " + kSourceDir + "/fixtures/mem3.txt\n" +
                   "run.seed = 1\nrun.seed = 2\n");
    REQUIRE_THROWS_AS(load_scenario((dir / "dup.cfg").string()), ConfigError);
  }
}

TEST_CASE("run_scenario writes the expected artifacts and round-trips") {
  const fs::path dir = make_temp_dir("run_artifacts");
  write_file(dir / "small.cfg", small_adaptive_config("small"));
  const Scenario sc = load_scenario((dir / "small.cfg").string());
  const ScenarioReport rep = run_scenario(sc, (dir / "out").string());

  for (const std::string leaf : {"summary.txt", "psd_before.csv",
                                 "psd_after.csv", "history_3+.csv",
                                 "coeffs_3+.txt"}) {
    CAPTURE(leaf);
    REQUIRE(fs::exists(dir / "out" / leaf));
  }

  SECTION("summary round-trips exactly") {
    const KeyValueDoc parsed =
        read_metrics_summary((dir / "out" / "summary.txt").string());
    REQUIRE(parsed == rep.summary);
  }
  SECTION("PSD table round-trips") {
    const TextTable t = read_table((dir / "out" / "psd_before.csv").string());
    REQUIRE(t.columns == std::vector<std::string>{"frequency_hz", "density_per_hz"});
    REQUIRE(t.rows.size() == sc.psd_segment);
  }
  SECTION("coefficients reload") {
    const DpdCoefficients c =
        load_coefficients((dir / "out" / "coeffs_3+.txt").string());
    REQUIRE(c.sub_band == SubBandId{3, +1});
  }
  SECTION("DPD improved the sub-band and spur labeling is present") {
    const double before = std::stod(rep.summary.get("band.3+.imr_before_dbc"));
    const double after = std::stod(rep.summary.get("band.3+.imr_after_dbc"));
    REQUIRE(after - before > 10.0);
    REQUIRE(rep.summary.has("spur.3+.before_dbm"));
  }
}

TEST_CASE("same seed reproduces byte-identical summaries") {
  const fs::path dir = make_temp_dir("determinism");
  write_file(dir / "s.cfg", small_adaptive_config("det"));
  const Scenario sc = load_scenario((dir / "s.cfg").string());
  run_scenario(sc, (dir / "out1").string());
  run_scenario(sc, (dir / "out2").string());
  REQUIRE(read_file(dir / "out1" / "summary.txt") ==
          read_file(dir / "out2" / "summary.txt"));
  REQUIRE(read_file(dir / "out1" / "history_3+.csv") ==
          read_file(dir / "out2" / "history_3+.csv"));
}

TEST_CASE("single-point sweep equals a plain run") {
  const fs::path dir = make_temp_dir("sweep_single");
  write_file(dir / "s.cfg", small_adaptive_config("single"));
  const Scenario sc = load_scenario((dir / "s.cfg").string());
  const ScenarioReport direct = run_scenario(sc, (dir / "direct").string());
  const SweepResult swept =
      sweep(sc, "tx_power_db", 0.0, 0.0, 1, (dir / "swept").string());
  REQUIRE(swept.points.size() == 1);
  REQUIRE(swept.points[0].summary.get("band.3+.imr_after_dbc") ==
          direct.summary.get("band.3+.imr_after_dbc"));
}

TEST_CASE("spur power slope is cubic in the small-signal regime") {
  const fs::path dir = make_temp_dir("sweep_slope");
  // Low drive so the third-order term dominates; no DPD influence on the
  // before-spur column.
  write_file(dir / "s.cfg",
             "scenario.name = slope\n"
             "waveform.cc_bandwidth_hz = 1e6 1e6\n"
             "waveform.carrier_spacing_hz = 10e6\n"
             "waveform.per_cc_power = 0.05 0.05\n"
             "waveform.max_sub_band_order = 5\n"
             "pa.fixture = " + kSourceDir + "/fixtures/mem3.txt\n" +
             "dpd.targets = 3+\n"
             "dpd.order = 3\n"
             "dpd.memory = 0\n"
             "learn.mu = 0.3\n"
             "learn.updates = 10\n"
             "metrics.samples = 60000\n"
             "metrics.tx_power_dbm = 20\n"
             "run.seed = 6\n");
  const Scenario sc = load_scenario((dir / "s.cfg").string());
  const SweepResult swept =
      sweep(sc, "tx_power_db", -3.0, 3.0, 4, (dir / "out").string());

  // Least-squares slope of spur dBm against drive offset in dB.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(swept.points.size());
  for (const auto& p : swept.points) {
    const double x = p.value;
    const double y = std::stod(p.summary.get("spur.3+.before_dbm"));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  REQUIRE(slope == Catch::Approx(3.0).margin(0.2));
  REQUIRE(fs::exists(dir / "out" / "sweep.csv"));
}
