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

#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "subdpd/learn.hpp"
#include "subdpd/metrics.hpp"
#include "subdpd/table_io.hpp"

namespace subdpd {

enum class DpdSolution { kAdaptive, kAnalyticIm3 };

/// Fully parsed simulation scenario.
struct Scenario {
  std::string name;
  DualCarrierSpec waveform;
  std::string pa_fixture_path;
  PhModel pa;
  DpdSolution solution = DpdSolution::kAdaptive;
  std::vector<SubBandId> targets{{3, +1}};
  int q_order = 9;
  int memory_depth = 1;
  LearningConfig learn;
  std::size_t psd_segment = 4096;
  double psd_overlap = 0.5;
  std::size_t metric_samples = 200000;
  double cc_band_width_hz = 0.0;  // 0: auto (CC occupied bandwidth)
  double im_band_width_hz = 0.0;  // 0: auto (3x wider CC bandwidth)
  double tx_power_dbm = 0.0;
  bool tx_power_set = false;
  double duplexer_atten_db = 0.0;
  std::uint64_t seed = 1;
  double tx_power_offset_db = 0.0;  // sweep variable, scales both CC powers
};

namespace detail {

class ConfigReader {
 public:
  ConfigReader(KeyValueDoc doc, std::string origin)
      : doc_(std::move(doc)), origin_(std::move(origin)) {}

  bool has(const std::string& key) {
    if (!doc_.has(key)) return false;
    used_.insert(key);
    return true;
  }
  std::string str(const std::string& key, const std::string& fallback) {
    return has(key) ? doc_.get(key) : fallback;
  }
  double num(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_num(key, doc_.get(key));
  }
  std::vector<double> num_list(const std::string& key,
                               std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::istringstream ss(doc_.get(key));
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_num(key, tok));
    if (out.empty()) throw ConfigError(origin_ + ": empty list for '" + key + "'");
    return out;
  }
  std::vector<std::string> str_list(const std::string& key) {
    if (!has(key)) return {};
    std::istringstream ss(doc_.get(key));
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }

  /// Unknown keys are configuration errors so typos cannot silently skew a
  /// simulation.
  void finish() const {
    for (const auto& [k, v] : doc_.entries)
      if (!used_.count(k))
        throw ConfigError(origin_ + ": unknown key '" + k + "'");
  }

 private:
  double parse_num(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": bad number '" + text + "' for '" + key + "'");
    }
  }

  KeyValueDoc doc_;
  std::string origin_;
  std::set<std::string> used_;
};

}  // namespace detail

inline Scenario load_scenario(const std::string& path) {
  detail::ConfigReader cfg(read_keyvalue(path), path);
  Scenario sc;
  sc.name = cfg.str("scenario.name",
                    std::filesystem::path(path).stem().string());

  const auto bw = cfg.num_list("waveform.cc_bandwidth_hz", {1e6, 1e6});
  if (bw.size() != 2)
    throw ConfigError(path + ": waveform.cc_bandwidth_hz needs two values");
  sc.waveform.cc_bandwidth_hz = {bw[0], bw[1]};
  sc.waveform.carrier_spacing_hz = cfg.num("waveform.carrier_spacing_hz", 10e6);
  const auto pw = cfg.num_list("waveform.per_cc_power", {1.0, 1.0});
  if (pw.size() != 2)
    throw ConfigError(path + ": waveform.per_cc_power needs two values");
  sc.waveform.per_cc_power = {pw[0], pw[1]};
  sc.waveform.rolloff = cfg.num("waveform.rolloff", 0.22);
  sc.waveform.guard_factor = cfg.num("waveform.guard_factor", 1.2);
  sc.waveform.max_sub_band_order =
      static_cast<int>(cfg.num("waveform.max_sub_band_order", 3));
  sc.waveform.max_sample_rate_hz = cfg.num("waveform.max_sample_rate_hz", 2e9);

  const std::string fixture = cfg.str("pa.fixture", "");
  if (fixture.empty()) throw ConfigError(path + ": missing pa.fixture");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  sc.pa_fixture_path = (base / fixture).string();
  if (!std::filesystem::exists(sc.pa_fixture_path))
    throw ConfigError(path + ": pa.fixture not found: " + sc.pa_fixture_path);
  sc.pa = load_ph_model(sc.pa_fixture_path);

  const std::string solution = cfg.str("dpd.solution", "adaptive");
  if (solution == "adaptive") {
    sc.solution = DpdSolution::kAdaptive;
  } else if (solution == "analytic_im3") {
    sc.solution = DpdSolution::kAnalyticIm3;
  } else {
    throw ConfigError(path + ": dpd.solution must be adaptive or analytic_im3");
  }

  sc.targets.clear();
  for (const auto& label : cfg.str_list("dpd.targets"))
    sc.targets.push_back(parse_sub_band(label));
  if (sc.targets.empty()) sc.targets.push_back({3, +1});
  // Largest spurs first: learn in ascending sub-band order.
  std::sort(sc.targets.begin(), sc.targets.end(), [](auto a, auto b) {
    return a.order != b.order ? a.order < b.order : a.sign > b.sign;
  });
  for (const auto& t : sc.targets) {
    if (t.order > sc.pa.order)
      throw ConfigError(path + ": dpd.targets sub-band " + to_string(t) +
                        " exceeds pa order " + std::to_string(sc.pa.order));
  }

  sc.q_order = static_cast<int>(cfg.num("dpd.order", 9));
  sc.memory_depth = static_cast<int>(cfg.num("dpd.memory", 1));

  const std::string mode = cfg.str("learn.mode", "block");
  if (mode == "block") {
    sc.learn.mode = LearningConfig::Mode::kBlock;
  } else if (mode == "sample") {
    sc.learn.mode = LearningConfig::Mode::kSample;
  } else {
    throw ConfigError(path + ": learn.mode must be block or sample");
  }
  sc.learn.mu = cfg.num("learn.mu", 0.1);
  const std::string reg = cfg.str("learn.regularizer", "auto");
  sc.learn.regularizer_c = reg == "auto" ? -1.0 : std::stod(reg);
  sc.learn.block_size = static_cast<std::size_t>(cfg.num("learn.block_samples", 1000));
  sc.learn.update_interval =
      static_cast<std::size_t>(cfg.num("learn.update_interval", 1000));
  sc.learn.max_updates = static_cast<std::size_t>(cfg.num("learn.updates", 200));
  sc.learn.extra_loop_delay =
      static_cast<std::size_t>(cfg.num("learn.extra_loop_delay", 0));
  sc.learn.decimation = static_cast<int>(cfg.num("learn.decimation", 1));
  sc.learn.ortho_block = static_cast<std::size_t>(cfg.num("learn.ortho_samples", 1000));
  sc.learn.align_max_lag = static_cast<std::size_t>(cfg.num("learn.align_max_lag", 64));
  sc.learn.realign_interval =
      static_cast<std::size_t>(cfg.num("learn.realign_interval", 1000));
  sc.learn.history_stride =
      static_cast<std::size_t>(cfg.num("learn.history_stride", 1));
  sc.learn.observer_stopband_db = cfg.num("observe.stopband_db", 80.0);
  sc.learn.observer_noise_rms = cfg.num("observe.noise_rms", 0.0);

  sc.psd_segment = static_cast<std::size_t>(cfg.num("metrics.psd_segment", 4096));
  sc.psd_overlap = cfg.num("metrics.psd_overlap", 0.5);
  sc.metric_samples = static_cast<std::size_t>(cfg.num("metrics.samples", 200000));
  const std::string ccb = cfg.str("metrics.cc_band_hz", "auto");
  sc.cc_band_width_hz = ccb == "auto" ? 0.0 : std::stod(ccb);
  const std::string imb = cfg.str("metrics.im_band_hz", "auto");
  sc.im_band_width_hz = imb == "auto" ? 0.0 : std::stod(imb);
  if (cfg.has("metrics.tx_power_dbm")) {
    sc.tx_power_set = true;
    sc.tx_power_dbm = cfg.num("metrics.tx_power_dbm", 0.0);
  }
  sc.duplexer_atten_db = cfg.num("metrics.duplexer_atten_db", 0.0);
  sc.seed = static_cast<std::uint64_t>(cfg.num("run.seed", 1));

  cfg.finish();
  validate(sc.learn);
  if (sc.solution == DpdSolution::kAnalyticIm3) {
    if (sc.targets.size() != 1 || !(sc.targets[0] == SubBandId{3, +1}))
      throw ConfigError(path + ": analytic_im3 supports only dpd.targets = 3+");
    for (const auto& [p, taps] : sc.pa.branches)
      if (taps.size() != 1)
        throw ConfigError(path + ": analytic_im3 needs a memoryless PA fixture");
    if (sc.pa.order > 3)
      throw ConfigError(path + ": analytic_im3 needs a third-order PA fixture");
  }
  return sc;
}

struct ScenarioReport {
  KeyValueDoc summary;
  std::vector<std::string> files_written;
};

namespace detail {

inline DualCarrierSpec scenario_rate_spec(const Scenario& sc) {
  DualCarrierSpec spec = sc.waveform;
  for (const auto& t : sc.targets)
    spec.max_sub_band_order = std::max(spec.max_sub_band_order, t.order);
  spec.max_dpd_order = std::max(spec.max_dpd_order, sc.q_order);
  const double scale = std::pow(10.0, sc.tx_power_offset_db / 10.0);
  spec.per_cc_power[0] *= scale;
  spec.per_cc_power[1] *= scale;
  return spec;
}

inline TextTable psd_table(const PsdEstimate& est, const std::string& label) {
  TextTable t;
  t.metadata.emplace_back("signal", label);
  t.metadata.emplace_back("sample_rate_hz", format_double(est.sample_rate_hz));
  t.metadata.emplace_back("segment_length", std::to_string(est.segment_length));
  t.metadata.emplace_back("overlap", format_double(est.overlap));
  t.metadata.emplace_back("window", est.window);
  t.metadata.emplace_back("normalization", est.normalization);
  t.columns = {"frequency_hz", "density_per_hz"};
  for (std::size_t i = 0; i < est.frequencies_hz.size(); ++i)
    t.rows.push_back({est.frequencies_hz[i], est.density[i]});
  return t;
}

inline TextTable history_table(const SubBandLearnResult& res) {
  TextTable t;
  t.metadata.emplace_back("sub_band", to_string(res.coeffs.sub_band));
  t.metadata.emplace_back("acquired_lag", std::to_string(res.acquired_lag));
  t.columns = {"update", "residual_db"};
  const std::size_t n_taps = res.coeffs.taps.size();
  for (std::size_t c = 0; c < n_taps; ++c)
    t.columns.push_back("coeff" + std::to_string(c) + "_mag");
  for (std::size_t i = 0; i < res.history.update_index.size(); ++i) {
    std::vector<double> row{static_cast<double>(res.history.update_index[i]),
                            res.history.residual_db[i]};
    for (const auto& c : res.history.coefficients[i]) row.push_back(std::abs(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Direct (unconjugated) third-order injection alpha * u used by the
/// analytic reference solutions.
inline ComplexBasebandSignal analytic_im3p_injection(
    const ComplexBasebandSignal& x1, const ComplexBasebandSignal& x2,
    cdouble alpha) {
  ComplexBasebandSignal inj;
  inj.sample_rate_hz = x1.sample_rate_hz;
  inj.samples.resize(x1.samples.size());
  for (std::size_t i = 0; i < x1.samples.size(); ++i)
    inj.samples[i] =
        alpha * std::conj(x2.samples[i]) * x1.samples[i] * x1.samples[i];
  return inj;
}

}  // namespace detail

/// Executes a scenario and writes all artifacts (metrics summary, PSD
/// tables, learning histories, coefficient files) into out_dir. Everything
/// is deterministic for a fixed seed.
inline ScenarioReport run_scenario(const Scenario& sc, const std::string& out_dir,
                                   bool quiet = true) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto out_path = [&](const std::string& leaf) {
    return (fs::path(out_dir) / leaf).string();
  };

  const DualCarrierSpec spec = detail::scenario_rate_spec(sc);
  const double f_if = intermediate_freq_hz(spec);
  const double b_wider = std::max(spec.cc_bandwidth_hz[0], spec.cc_bandwidth_hz[1]);
  const double cc_bw = sc.cc_band_width_hz > 0.0 ? sc.cc_band_width_hz : b_wider;
  const double im_bw = sc.im_band_width_hz > 0.0 ? sc.im_band_width_hz : 3.0 * b_wider;

  ScenarioReport report;
  KeyValueDoc& sum = report.summary;
  sum.set("schema", "subdpd.metrics.v1");
  sum.set("scenario", sc.name);
  sum.set("seed", std::to_string(sc.seed));
  sum.set("solution", sc.solution == DpdSolution::kAdaptive ? "adaptive"
                                                            : "analytic_im3");
  sum.set("pa_fixture", fs::path(sc.pa_fixture_path).filename().string());
  sum.set("pa_order", std::to_string(sc.pa.order));
  sum.set("tx_power_offset_db", sc.tx_power_offset_db);

  // Measurement waveform: an independent realization from a derived seed.
  const std::uint64_t meas_seed = Rng::derive_seed(sc.seed, 0x4d454153);
  const DualCarrierSignal dc = generate_dual_carrier(spec, sc.metric_samples, meas_seed);
  const double fs_rate = dc.composite.sample_rate_hz;
  sum.set("sample_rate_hz", fs_rate);
  sum.set("f_if_hz", f_if);

  const ComplexBasebandSignal y_before = ph_apply(sc.pa, dc.composite);
  const PsdEstimate psd_before = psd(y_before, sc.psd_segment, sc.psd_overlap);

  const Band cc1_band = centered_band(f_if, cc_bw);
  const Band cc2_band = centered_band(-f_if, cc_bw);
  auto im_band = [&](SubBandId band) {
    return centered_band(sub_band_center_hz(band, f_if), im_bw);
  };

  write_table(out_path("psd_before.csv"), detail::psd_table(psd_before, "pa_out_no_dpd"));
  report.files_written.push_back("psd_before.csv");

  if (sc.solution == DpdSolution::kAnalyticIm3) {
    const cdouble f1 = sc.pa.branches.at(1)[0];
    const cdouble f3 = sc.pa.branches.count(3) ? sc.pa.branches.at(3)[0]
                                               : cdouble(0.0, 0.0);
    std::vector<std::pair<int, int>> keys = mmse_moment_keys();
    for (const auto& k : decorr_moment_keys()) keys.push_back(k);
    const MomentSet moments = estimate_moments(dc.cc1, dc.cc2, keys);

    struct Row {
      std::string name;
      cdouble alpha;
    };
    const std::vector<Row> rows{
        {"no_dpd", cdouble(0.0, 0.0)},
        {"third_inverse", alpha_third_inverse(f1, f3)},
        {"mmse", alpha_mmse(f1, f3, moments)},
        {"decorr", alpha_decorr_analytic(f1, f3, moments)},
    };
    const SubBandId im3p{3, +1};
    for (const auto& row : rows) {
      ComplexBasebandSignal x_in = dc.composite;
      if (row.alpha != cdouble(0.0, 0.0)) {
        x_in = compose_pa_input(
            dc.composite,
            {{im3p, detail::analytic_im3p_injection(dc.cc1, dc.cc2, row.alpha)}},
            f_if);
      }
      const ComplexBasebandSignal y = ph_apply(sc.pa, x_in);
      const PsdEstimate est = psd(y, sc.psd_segment, sc.psd_overlap);
      const double imr_val = imr_dbc(est, cc1_band, cc2_band, im_band(im3p));
      const double evm = evm_percent(dc.symbols[0], y, 0, spec);
      sum.set("analytic." + row.name + ".imr_dbc", imr_val);
      sum.set("analytic." + row.name + ".evm_pct", evm);
      sum.set("analytic." + row.name + ".alpha_re", row.alpha.real());
      sum.set("analytic." + row.name + ".alpha_im", row.alpha.imag());
      if (row.name == "decorr") {
        const PsdEstimate after = est;
        write_table(out_path("psd_after.csv"),
                    detail::psd_table(after, "pa_out_decorr_dpd"));
        report.files_written.push_back("psd_after.csv");
      }
      if (!quiet)
        std::cout << sc.name << " " << row.name << ": IM3R " << imr_val
                  << " dBc, EVM " << evm << " %\n";
    }
    write_keyvalue(out_path("summary.txt"), sum);
    report.files_written.push_back("summary.txt");
    return report;
  }

  // Adaptive path: closed-loop learning, then an open-loop measurement pass
  // with the converged coefficients.
  const ClosedLoopResult learn_result = run_closed_loop(
      sc.pa, spec, sc.targets, sc.q_order, sc.memory_depth, sc.learn, sc.seed);

  std::vector<TrainedSubBandDpd> trained;
  for (const auto& band_result : learn_result.bands)
    trained.push_back({band_result.coeffs, band_result.w});

  const ComplexBasebandSignal x_dpd =
      compose_with_dpd(dc.composite, dc.cc1, dc.cc2, trained, f_if);
  const ComplexBasebandSignal y_after = ph_apply(sc.pa, x_dpd);
  const PsdEstimate psd_after = psd(y_after, sc.psd_segment, sc.psd_overlap);
  write_table(out_path("psd_after.csv"), detail::psd_table(psd_after, "pa_out_dpd"));
  report.files_written.push_back("psd_after.csv");

  sum.set("dpd_order", std::to_string(sc.q_order));
  sum.set("dpd_memory", std::to_string(sc.memory_depth));
  std::string target_list;
  for (const auto& t : sc.targets)
    target_list += (target_list.empty() ? "" : " ") + to_string(t);
  sum.set("targets", target_list);

  for (const auto& band_result : learn_result.bands) {
    const std::string label = to_string(band_result.coeffs.sub_band);
    const Band band = im_band(band_result.coeffs.sub_band);
    const double before = imr_dbc(psd_before, cc1_band, cc2_band, band);
    const double after = imr_dbc(psd_after, cc1_band, cc2_band, band);
    sum.set("band." + label + ".imr_before_dbc", before);
    sum.set("band." + label + ".imr_after_dbc", after);
    sum.set("band." + label + ".improvement_db", after - before);
    sum.set("band." + label + ".initial_residual_db",
            band_result.initial_residual_db);
    sum.set("band." + label + ".final_residual_db", band_result.final_residual_db);
    sum.set("band." + label + ".acquired_lag",
            std::to_string(band_result.acquired_lag));
    sum.set("band." + label + ".observer_passband_hz",
            band_result.observer.obs_bandwidth_hz);

    write_table(out_path("history_" + label + ".csv"),
                detail::history_table(band_result));
    report.files_written.push_back("history_" + label + ".csv");
    save_coefficients(out_path("coeffs_" + label + ".txt"), band_result.coeffs);
    report.files_written.push_back("coeffs_" + label + ".txt");

    if (sc.tx_power_set) {
      sum.set("spur." + label + ".before_dbm",
              integrated_power_dbm(psd_before, band, sc.tx_power_dbm,
                                   sc.duplexer_atten_db));
      sum.set("spur." + label + ".after_dbm",
              integrated_power_dbm(psd_after, band, sc.tx_power_dbm,
                                   sc.duplexer_atten_db));
    }

    if (sc.q_order == 9 &&
        (band_result.coeffs.sub_band.order <= 9)) {
      // Low-rate accounting: the sub-band DPD runs at 9 samples per Hz of
      // CC bandwidth; the full-band reference needs the whole composite span.
      const double rate_sub = 9.0 * b_wider;
      const ComplexityReport rep =
          flops_model(DpdKind::kSubBand, band_result.coeffs.sub_band.order, 9,
                      sc.memory_depth, rate_sub);
      sum.set("complexity." + label + ".flops_per_sample",
              rep.total_flops_per_sample);
      sum.set("complexity." + label + ".rate_hz", rep.sample_rate_hz);
      sum.set("complexity." + label + ".gflops", rep.gflops);
    }

    if (!quiet)
      std::cout << sc.name << " " << label << ": IM3R-style " << before
                << " -> " << after << " dBc\n";
  }

  if (sc.q_order == 9) {
    const double rate_full = 9.0 * (spec.carrier_spacing_hz + b_wider);
    const ComplexityReport full =
        flops_model(DpdKind::kFullBand, 0, 9, 3, rate_full);
    sum.set("complexity.full_band.flops_per_sample", full.total_flops_per_sample);
    sum.set("complexity.full_band.rate_hz", full.sample_rate_hz);
    sum.set("complexity.full_band.gflops", full.gflops);
  }

  sum.set("evm_cc1_before_pct", evm_percent(dc.symbols[0], y_before, 0, spec));
  sum.set("evm_cc1_after_pct", evm_percent(dc.symbols[0], y_after, 0, spec));

  write_keyvalue(out_path("summary.txt"), sum);
  report.files_written.push_back("summary.txt");
  return report;
}

inline KeyValueDoc read_metrics_summary(const std::string& path) {
  return read_keyvalue(path);
}

// -------------------------------------------------------------------------
// Parameter sweeps

struct SweepPoint {
  double value = 0.0;
  KeyValueDoc summary;
};

struct SweepResult {
  std::string variable;
  std::vector<SweepPoint> points;
};

/// Runs the scenario across a swept variable; points execute in a worker
/// pool and results merge in sweep order.
inline SweepResult sweep(const Scenario& base, const std::string& variable,
                         double from, double to, std::size_t steps,
                         const std::string& out_dir, bool quiet = true) {
  if (steps < 1) throw std::invalid_argument("sweep: steps must be >= 1");
  if (variable != "tx_power_db" && variable != "dpd_order")
    throw ConfigError("sweep: variable must be tx_power_db or dpd_order");

  std::vector<double> values(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    double v = steps == 1 ? from
                          : from + (to - from) * static_cast<double>(i) /
                                static_cast<double>(steps - 1);
    if (variable == "dpd_order") {
      int q = static_cast<int>(std::llround(v));
      if (q % 2 == 0) ++q;
      v = q;
    }
    values[i] = v;
  }

  auto run_point = [&](std::size_t idx) {
    Scenario sc = base;
    if (variable == "tx_power_db") {
      sc.tx_power_offset_db = values[idx];
    } else {
      sc.q_order = static_cast<int>(values[idx]);
    }
    const std::string point_dir =
        (std::filesystem::path(out_dir) / ("point_" + std::to_string(idx))).string();
    const ScenarioReport rep = run_scenario(sc, point_dir, true);
    return rep.summary;
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(
                                   steps, std::thread::hardware_concurrency()));
  SweepResult result;
  result.variable = variable;
  result.points.resize(steps);
  std::vector<std::future<KeyValueDoc>> futures(steps);
  std::size_t next = 0;
  while (next < steps) {
    // Bounded concurrency: launch a batch, then collect in sweep order.
    const std::size_t batch_end = std::min(steps, next + workers);
    for (std::size_t i = next; i < batch_end; ++i)
      futures[i] = std::async(std::launch::async, run_point, i);
    for (std::size_t i = next; i < batch_end; ++i) {
      result.points[i].summary = futures[i].get();
      result.points[i].value = values[i];
    }
    next = batch_end;
  }

  TextTable table;
  table.metadata.emplace_back("variable", variable);
  table.metadata.emplace_back("scenario", base.name);
  table.columns = {variable};
  std::vector<std::string> metric_keys;
  for (const auto& [k, v] : result.points[0].summary.entries) {
    if (k.find(".imr_before_dbc") != std::string::npos ||
        k.find(".imr_after_dbc") != std::string::npos ||
        k.find(".before_dbm") != std::string::npos ||
        k.find(".after_dbm") != std::string::npos) {
      metric_keys.push_back(k);
      table.columns.push_back(k);
    }
  }
  for (const auto& p : result.points) {
    std::vector<double> row{p.value};
    for (const auto& k : metric_keys)
      row.push_back(p.summary.has(k) ? std::stod(p.summary.get(k)) : 0.0);
    table.rows.push_back(std::move(row));
  }
  std::filesystem::create_directories(out_dir);
  write_table((std::filesystem::path(out_dir) / "sweep.csv").string(), table);
  if (!quiet)
    std::cout << "sweep " << variable << ": " << steps << " points written\n";
  return result;
}

}  // namespace subdpd
