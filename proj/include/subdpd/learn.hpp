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

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <utility>
#include <vector>

#include "subdpd/align.hpp"
#include "subdpd/basis.hpp"
#include "subdpd/dpd.hpp"
#include "subdpd/errors.hpp"
#include "subdpd/observe.hpp"
#include "subdpd/pa.hpp"
#include "subdpd/signal.hpp"
#include "subdpd/waveform.hpp"

namespace subdpd {

// -------------------------------------------------------------------------
// Signal moments

/// Products of per-CC envelope moments, E_ij = E[|x1|^i] E[|x2|^j].
struct MomentSet {
  std::map<std::pair<int, int>, double> values;

  double get(int i, int j) const {
    const auto it = values.find({i, j});
    if (it == values.end())
      throw ShapeError("MomentSet: E_" + std::to_string(i) + std::to_string(j) +
                       " not estimated");
    return it->second;
  }
};

inline const std::vector<std::pair<int, int>>& mmse_moment_keys() {
  static const std::vector<std::pair<int, int>> keys{
      {4, 2}, {6, 2}, {4, 4}, {4, 6}, {6, 4}, {8, 2}};
  return keys;
}

inline const std::vector<std::pair<int, int>>& decorr_moment_keys() {
  static const std::vector<std::pair<int, int>> keys{
      {6, 0}, {4, 0}, {0, 4}, {0, 2}};
  return keys;
}

/// Sample moments under the independence assumption:
/// E_ij = mean(|x1|^i) * mean(|x2|^j).
inline MomentSet estimate_moments(const ComplexBasebandSignal& x1,
                                  const ComplexBasebandSignal& x2,
                                  const std::vector<std::pair<int, int>>& needed) {
  auto env_moment = [](const cvec& v, int e) {
    double acc = 0.0;
    for (const auto& s : v) {
      const double n2 = std::norm(s);
      if (e % 2 == 0) {
        double m = 1.0;
        for (int k = 0; k < e / 2; ++k) m *= n2;
        acc += m;
      } else {
        acc += std::pow(std::sqrt(n2), e);
      }
    }
    return acc / static_cast<double>(v.size());
  };

  std::map<int, double> m1, m2;
  MomentSet out;
  for (const auto& [i, j] : needed) {
    if (i < 0 || j < 0) throw std::invalid_argument("moment exponents must be >= 0");
    if (!m1.count(i)) m1[i] = i == 0 ? 1.0 : env_moment(x1.samples, i);
    if (!m2.count(j)) m2[j] = j == 0 ? 1.0 : env_moment(x2.samples, j);
    out.values[{i, j}] = m1[i] * m2[j];
  }
  return out;
}

// -------------------------------------------------------------------------
// Closed-form reference solutions (third-order memoryless IM3+ case)

inline cdouble alpha_third_inverse(cdouble f1, cdouble f3) {
  if (f1 == cdouble(0.0, 0.0)) throw ZeroDivideError("alpha_third_inverse: f1 = 0");
  return -f3 / f1;
}

/// Minimum-IM3-power coefficient.
inline cdouble alpha_mmse(cdouble f1, cdouble f3, const MomentSet& m) {
  const double e42 = m.get(4, 2);
  const double e62 = m.get(6, 2);
  const double e44 = m.get(4, 4);
  const double e46 = m.get(4, 6);
  const double e64 = m.get(6, 4);
  const double e82 = m.get(8, 2);
  const cdouble num =
      -std::conj(f1 * std::conj(f3) * e42 + 2.0 * std::norm(f3) * (e62 + e44));
  const double den = std::norm(f1) * e42 +
                     4.0 * std::real(f1 * std::conj(f3)) * (e62 + e44) +
                     4.0 * std::norm(f3) * (e46 + 2.0 * e64 + e82);
  if (den == 0.0) throw ZeroDivideError("alpha_mmse: zero denominator");
  return num / den;
}

/// Zero error/basis correlation coefficient.
inline cdouble alpha_decorr_analytic(cdouble f1, cdouble f3, const MomentSet& m) {
  const double e60 = m.get(6, 0);
  const double e40 = m.get(4, 0);
  const double e04 = m.get(0, 4);
  const double e02 = m.get(0, 2);
  if (e40 == 0.0 || e02 == 0.0)
    throw ZeroDivideError("alpha_decorr_analytic: degenerate moments");
  const cdouble den = f1 + 2.0 * f3 * (e60 / e40 + e04 / e02);
  if (std::abs(den) == 0.0)
    throw ZeroDivideError("alpha_decorr_analytic: zero denominator");
  return -f3 / den;
}

/// Coefficients nulling the IM3+ terms through fifth order; the injection
/// uses basis {u, |x1|^2 u, |x2|^2 u} with u = x2* x1^2.
struct FifthOrderInverse {
  cdouble alpha3{0.0, 0.0};
  cdouble alpha51{0.0, 0.0};
  cdouble alpha52{0.0, 0.0};
};

inline FifthOrderInverse fifth_order_inverse(cdouble f1, cdouble f3, cdouble f5) {
  if (f1 == cdouble(0.0, 0.0)) throw ZeroDivideError("fifth_order_inverse: f1 = 0");
  FifthOrderInverse out;
  const cdouble r3 = f3 / f1;
  out.alpha3 = -r3;
  out.alpha51 = 2.0 * r3 * r3 - 2.0 * f5 / f1;
  out.alpha52 = 2.0 * r3 * r3 - 3.0 * f5 / f1;
  return out;
}

// -------------------------------------------------------------------------
// Decorrelation updates

/// alpha' = alpha - mu / (||s_bar||^2 + C) * s_bar e*.
inline void sample_adaptive_step_inplace(cvec& alpha,
                                         std::span<const cdouble> s_row,
                                         cdouble e, double mu, double c_reg) {
  if (alpha.size() != s_row.size())
    throw ShapeError("sample_adaptive_step: shape mismatch");
  double norm = 0.0;
  for (std::size_t i = 0; i < s_row.size(); ++i) norm += std::norm(s_row[i]);
  const double g = mu / (norm + c_reg);
  const cdouble ec = std::conj(e);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const cdouble t = s_row[i] * ec;
    alpha[i] = alpha[i] - g * t;
  }
}

inline cvec sample_adaptive_step(const cvec& alpha, std::span<const cdouble> s_row,
                                 cdouble e, double mu, double c_reg) {
  cvec out = alpha;
  sample_adaptive_step_inplace(out, s_row, e, mu, c_reg);
  return out;
}

/// alpha' = alpha - mu / (||S||_F^2 + C) * S e*, with S the block of
/// regressor rows. Matches the sample step exactly when the block has one row.
inline void block_adaptive_update_inplace(cvec& alpha,
                                          std::span<const cvec> s_rows,
                                          std::span<const cdouble> e_block,
                                          double mu, double c_reg) {
  if (s_rows.size() != e_block.size() || s_rows.empty())
    throw ShapeError("block_adaptive_update: block shape mismatch");
  for (const auto& r : s_rows)
    if (r.size() != alpha.size())
      throw ShapeError("block_adaptive_update: row width mismatch");
  double norm = 0.0;
  for (const auto& r : s_rows)
    for (const auto& v : r) norm += std::norm(v);
  const double g = mu / (norm + c_reg);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    cdouble acc(0.0, 0.0);
    for (std::size_t m = 0; m < s_rows.size(); ++m)
      acc += s_rows[m][i] * std::conj(e_block[m]);
    alpha[i] = alpha[i] - g * acc;
  }
}

inline cvec block_adaptive_update(const cvec& alpha, std::span<const cvec> s_rows,
                                  std::span<const cdouble> e_block, double mu,
                                  double c_reg) {
  cvec out = alpha;
  block_adaptive_update_inplace(out, s_rows, e_block, mu, c_reg);
  return out;
}

// -------------------------------------------------------------------------
// Closed-loop learning

struct LearningConfig {
  enum class Mode { kSample, kBlock };

  double mu = 0.1;
  double regularizer_c = -1.0;  // < 0: auto, 1e-8 * mean ||s_bar||^2
  std::size_t block_size = 1000;       // M, learning-rate samples (block mode)
  std::size_t update_interval = 1000;  // L >= M (block mode)
  std::size_t max_updates = 200;
  Mode mode = Mode::kBlock;
  std::size_t extra_loop_delay = 0;  // artificial latency, full-rate samples
  int decimation = 1;                // observer/learning-rate decimation
  std::size_t ortho_block = 1000;    // samples used to estimate W (frozen)
  double observer_stopband_db = 80.0;
  double observer_noise_rms = 0.0;
  double divergence_margin_db = 20.0;
  std::size_t align_max_lag = 64;       // learning-rate samples
  std::size_t realign_interval = 1000;  // learning-rate samples between aligns
  std::size_t history_stride = 1;       // record every k-th update
};

inline void validate(const LearningConfig& cfg) {
  if (!(cfg.mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (cfg.block_size < 1 || cfg.update_interval < cfg.block_size)
    throw std::invalid_argument("need 1 <= M <= L");
  if (cfg.max_updates < 1) throw std::invalid_argument("max_updates must be >= 1");
  if (cfg.decimation < 1) throw std::invalid_argument("decimation must be >= 1");
  if (cfg.extra_loop_delay % static_cast<std::size_t>(cfg.decimation) != 0)
    throw std::invalid_argument("extra loop delay must be a multiple of the decimation");
  if (cfg.ortho_block < 16) throw std::invalid_argument("ortho_block too small");
  if (cfg.history_stride < 1) throw std::invalid_argument("history_stride must be >= 1");
}

/// Per-update coefficient snapshots, residual sub-band powers and the raw
/// error/basis correlation statistics of each estimation window.
struct LearningHistory {
  std::vector<std::size_t> update_index;
  std::vector<double> residual_db;
  std::vector<cvec> coefficients;
  std::vector<cvec> gradient;          // sum_n s_bar(n) e*(n) per window
  std::vector<double> error_energy;    // sum_n |e(n)|^2 per window
  std::vector<std::vector<double>> component_energy;  // sum_n |s_bar_i(n)|^2
};

/// Normalized error/basis correlation per regressor component, accumulated
/// over the last `last_k` recorded update windows.
inline std::vector<double> history_correlation(const LearningHistory& h,
                                               std::size_t last_k) {
  if (h.gradient.empty()) throw ShapeError("history_correlation: empty history");
  const std::size_t n = h.gradient.size();
  const std::size_t k0 = last_k >= n ? 0 : n - last_k;
  const std::size_t width = h.gradient[0].size();
  cvec grad(width, cdouble(0.0, 0.0));
  std::vector<double> comp(width, 0.0);
  double err = 0.0;
  for (std::size_t w = k0; w < n; ++w) {
    for (std::size_t i = 0; i < width; ++i) {
      grad[i] += h.gradient[w][i];
      comp[i] += h.component_energy[w][i];
    }
    err += h.error_energy[w];
  }
  std::vector<double> corr(width, 0.0);
  for (std::size_t i = 0; i < width; ++i)
    corr[i] = std::abs(grad[i]) / std::sqrt(std::max(err * comp[i], 1e-300));
  return corr;
}

struct SubBandLearnResult {
  DpdCoefficients coeffs;
  OrthoTransform w;
  LearningHistory history;
  long acquired_lag = 0;  // learning-rate samples
  double initial_residual_db = 0.0;
  double final_residual_db = 0.0;
  ObserverConfig observer;
};

struct ClosedLoopResult {
  std::vector<SubBandLearnResult> bands;
  double sample_rate_hz = 0.0;
  double f_if_hz = 0.0;
};

struct TrainedSubBandDpd {
  DpdCoefficients coeffs;
  OrthoTransform w;
};

/// Open-loop DPD application through the public operations: regenerates the
/// orthogonalized basis with the frozen W, builds regressors and injects.
inline ComplexBasebandSignal compose_with_dpd(
    const ComplexBasebandSignal& x, const ComplexBasebandSignal& x1,
    const ComplexBasebandSignal& x2, std::span<const TrainedSubBandDpd> dpds,
    double f_if_hz) {
  std::vector<std::pair<SubBandId, ComplexBasebandSignal>> injections;
  for (const auto& dpd : dpds) {
    const BasisSet u = gen_basis(x1, x2, dpd.coeffs.sub_band, dpd.coeffs.q_order);
    const OrthoBasisSet s = apply_transform(dpd.w, u);
    const Regressor reg = build_regressor(s, dpd.coeffs.memory_depth);
    injections.emplace_back(dpd.coeffs.sub_band, injection_signal(dpd.coeffs, reg));
  }
  return compose_pa_input(x, injections, f_if_hz);
}

namespace detail {

/// Per-target state inside the closed loop.
struct LoopTarget {
  SubBandId band;
  BasisEval eval;
  OrthoTransform w;
  double c_reg = 0.0;
  cvec alpha;                // delay-major, K (N+1)
  std::vector<cvec> s_ring;  // s(n - l), l = 0..N
  std::vector<cdouble> u_tmp;
  std::vector<cdouble> s_tmp;
  double center_over_fs = 0.0;

  LoopTarget(SubBandId b, int q) : band(b), eval(b, q) {}
};

inline void lower_tri_apply(const OrthoTransform& w,
                            std::span<const cdouble> u, std::span<cdouble> s) {
  for (std::size_t i = 0; i < w.rows.size(); ++i) {
    cdouble acc(0.0, 0.0);
    for (std::size_t j = 0; j <= i; ++j) acc += w.rows[i][j] * u[j];
    s[i] = acc;
  }
}

}  // namespace detail

/// Full closed-loop simulation: compose input with current injections, run
/// the PA, observe one sub-band, align, update. Targets are learned
/// sequentially in listed order with earlier coefficients kept active.
/// Block mode applies coefficients estimated from block m at block m+1;
/// sample mode updates once per learning-rate sample.
inline ClosedLoopResult run_closed_loop(
    const PhModel& pa, const DualCarrierSpec& spec,
    const std::vector<SubBandId>& targets, int q_order, int memory_depth,
    const LearningConfig& cfg, std::uint64_t seed,
    std::span<const DpdCoefficients> warm_start = {}) {
  validate(pa);
  validate(cfg);
  if (targets.empty()) throw std::invalid_argument("run_closed_loop: no targets");
  for (const auto& t : targets) {
    validate(t);
    if (t.order > pa.order)
      throw BandError("target sub-band " + to_string(t) + " exceeds PA order");
    if (q_order < t.order)
      throw OrderError("DPD order below sub-band order for " + to_string(t));
  }
  if (memory_depth < 0) throw ShapeError("memory depth must be >= 0");

  DualCarrierSpec rate_spec = spec;
  for (const auto& t : targets)
    rate_spec.max_sub_band_order = std::max(rate_spec.max_sub_band_order, t.order);
  rate_spec.max_dpd_order = std::max(rate_spec.max_dpd_order, q_order);

  const double fs = derive_composite_rate(rate_spec);
  const double f_if = intermediate_freq_hz(rate_spec);
  const double b_wider = std::max(spec.cc_bandwidth_hz[0], spec.cc_bandwidth_hz[1]);
  const std::size_t d = static_cast<std::size_t>(cfg.decimation);

  // Samples composed per update and estimation-block size, at the learning
  // (decimated) rate; sample mode is the M = L = 1 special case.
  const std::size_t l_eff = cfg.mode == LearningConfig::Mode::kBlock
                                ? cfg.update_interval * d
                                : d;
  const std::size_t m_eff =
      cfg.mode == LearningConfig::Mode::kBlock ? cfg.block_size : 1;

  std::vector<ObserverConfig> obs_cfgs;
  std::size_t max_obs_taps = 0;
  for (const auto& t : targets) {
    ObserverConfig oc = default_observer(t, q_order, b_wider, f_if,
                                         cfg.observer_stopband_db);
    oc.decimation = cfg.decimation;
    oc.noise_rms = cfg.observer_noise_rms;
    validate(oc, f_if, fs);
    max_obs_taps = std::max(max_obs_taps,
                            design_observer_lowpass(oc, f_if, fs).size());
    obs_cfgs.push_back(oc);
  }

  const std::size_t align_need = 1000 + 2 * cfg.align_max_lag + 8;
  const std::size_t warm_len =
      max_obs_taps + cfg.extra_loop_delay + (align_need + 8) * d +
      static_cast<std::size_t>(memory_depth) + 64;
  const std::size_t phase_len = warm_len + cfg.max_updates * l_eff;
  const std::size_t n_total = cfg.ortho_block + targets.size() * phase_len + 64;

  const DualCarrierSignal dc = generate_dual_carrier(rate_spec, n_total, seed);
  const auto& x1 = dc.cc1.samples;
  const auto& x2 = dc.cc2.samples;
  const auto& x = dc.composite.samples;

  // Frozen per-target orthogonalization from the first training block, plus
  // the NLMS regularizer scale.
  std::vector<detail::LoopTarget> lts;
  lts.reserve(targets.size());
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    detail::LoopTarget lt(targets[ti], q_order);
    const std::size_t k = lt.eval.column_count();

    const ComplexBasebandSignal x1b = slice(dc.cc1, 0, cfg.ortho_block);
    const ComplexBasebandSignal x2b = slice(dc.cc2, 0, cfg.ortho_block);
    const BasisSet u0 = gen_basis(x1b, x2b, lt.band, q_order);
    auto [s0, w0] = orthogonalize(u0);
    lt.w = std::move(w0);

    double mean_row_norm = 0.0;
    for (std::size_t i = 0; i < cfg.ortho_block; ++i) {
      for (int l = 0; l <= memory_depth; ++l) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i) - l;
        if (idx < 0) continue;
        for (std::size_t c = 0; c < k; ++c)
          mean_row_norm += std::norm(s0.columns[c][static_cast<std::size_t>(idx)]);
      }
    }
    mean_row_norm /= static_cast<double>(cfg.ortho_block);
    lt.c_reg = cfg.regularizer_c >= 0.0 ? cfg.regularizer_c : 1e-8 * mean_row_norm;

    lt.alpha.assign(k * static_cast<std::size_t>(memory_depth + 1),
                    cdouble(0.0, 0.0));
    for (const auto& ws : warm_start) {
      if (ws.sub_band == lt.band) {
        if (ws.q_order != q_order || ws.memory_depth != memory_depth ||
            ws.taps.size() != lt.alpha.size())
          throw ShapeError("warm start coefficients do not match (Q, N)");
        lt.alpha = ws.taps;
      }
    }
    lt.s_ring.assign(static_cast<std::size_t>(memory_depth + 1),
                     cvec(k, cdouble(0.0, 0.0)));
    lt.u_tmp.resize(k);
    lt.s_tmp.resize(k);
    lt.center_over_fs = sub_band_center_hz(lt.band, f_if) / fs;
    lts.push_back(std::move(lt));
  }

  PhStream pa_stream(pa);
  std::size_t n = 0;          // global composition index
  std::size_t ring_head = 0;  // s_ring slot holding s(n)
  const std::size_t nd = static_cast<std::size_t>(memory_depth + 1);

  ClosedLoopResult result;
  result.sample_rate_hz = fs;
  result.f_if_hz = f_if;

  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    detail::LoopTarget& lt = lts[ti];
    const std::size_t k = lt.eval.column_count();
    const std::size_t row_w = k * nd;

    ObserverStream obs(obs_cfgs[ti], f_if, fs, cfg.extra_loop_delay,
                       Rng::derive_seed(seed, 0x0b5e72 + ti));
    const std::size_t g_delay = obs.group_delay();
    const std::size_t p0 = std::max(n, cfg.ortho_block);

    // Queues on the decimated learning grid, keyed by content index:
    // observer emissions (nominal group-delay-compensated label), regressor
    // rows, and the leading basis column used as the alignment reference.
    std::deque<std::pair<std::size_t, cdouble>> emitted;
    std::deque<std::pair<std::size_t, cvec>> rows;
    std::deque<std::pair<std::size_t, cdouble>> s0_hist;

    auto step_one = [&]() {
      ring_head = (ring_head + nd - 1) % nd;
      cdouble xt = x[n];
      for (auto& t : lts) {
        t.eval.eval(x1[n], x2[n], t.u_tmp);
        detail::lower_tri_apply(t.w, t.u_tmp, t.s_tmp);
        std::copy(t.s_tmp.begin(), t.s_tmp.end(), t.s_ring[ring_head].begin());
        cdouble inj(0.0, 0.0);
        const std::size_t kt = t.s_tmp.size();
        for (std::size_t l = 0; l < nd; ++l) {
          const auto& srow = t.s_ring[(ring_head + l) % nd];
          for (std::size_t c = 0; c < kt; ++c)
            inj += std::conj(t.alpha[l * kt + c]) * srow[c];
        }
        if (inj != cdouble(0.0, 0.0)) {
          const double cyc =
              std::fmod(t.center_over_fs * static_cast<double>(n), 1.0);
          const double phi = 2.0 * M_PI * cyc;
          xt += inj * cdouble(std::cos(phi), std::sin(phi));
        }
      }
      const cdouble y = pa_stream.push(xt);
      if (n >= p0) {
        const cdouble w = obs.push(y, n);
        if (n >= p0 + g_delay) {
          const std::size_t label = n - g_delay;
          if (label % d == 0) emitted.emplace_back(label, w);
        }
      }
      if (n % d == 0 && n >= p0) {
        cvec row(row_w);
        for (std::size_t l = 0; l < nd; ++l) {
          const auto& srow = lt.s_ring[(ring_head + l) % nd];
          for (std::size_t c = 0; c < k; ++c) row[l * k + c] = srow[c];
        }
        rows.emplace_back(n, std::move(row));
        s0_hist.emplace_back(n, lt.s_ring[ring_head][0]);
      }
      ++n;
    };
    auto advance_to = [&](std::size_t upto) {
      while (n < upto) step_one();
    };

    advance_to(p0 + warm_len);

    auto try_align = [&](long& lag_out) -> bool {
      if (emitted.size() < align_need) return false;
      const std::size_t take = std::min(emitted.size(), align_need + 512);
      const std::size_t e_begin = emitted.size() - take;
      const std::size_t base_label = emitted[e_begin].first;
      std::size_t r_idx = 0;
      while (r_idx < s0_hist.size() && s0_hist[r_idx].first < base_label) ++r_idx;
      ComplexBasebandSignal ref, ob;
      ref.sample_rate_hz = ob.sample_rate_hz = fs / static_cast<double>(d);
      for (std::size_t i = 0; i < take; ++i)
        ob.samples.push_back(emitted[e_begin + i].second);
      for (std::size_t i = 0; r_idx + i < s0_hist.size() && i < take; ++i)
        ref.samples.push_back(s0_hist[r_idx + i].second);
      const std::size_t common = std::min(ref.samples.size(), ob.samples.size());
      if (common < 1000 + 2 * cfg.align_max_lag) return false;
      ref.samples.resize(common);
      ob.samples.resize(common);
      const AlignResult ar = align(ref, ob, cfg.align_max_lag);
      lag_out = ar.lag;
      return true;
    };

    long lag = 0;
    if (!try_align(lag))
      throw AlignError("run_closed_loop: warm-up too short to acquire timing");

    SubBandLearnResult res;
    res.observer = obs_cfgs[ti];
    res.w = lt.w;
    res.acquired_lag = lag;

    double initial_residual_db = 0.0;
    std::size_t since_realign = 0;
    std::vector<cvec> s_block;
    cvec e_block;

    for (std::size_t it = 0; it < cfg.max_updates; ++it) {
      advance_to(n + l_eff);

      // Exercise the synchronization path periodically; hold the last good
      // lag once the converged residual decorrelates from the basis.
      since_realign += l_eff / d;
      if (since_realign >= cfg.realign_interval) {
        since_realign = 0;
        long new_lag = 0;
        try {
          if (try_align(new_lag)) lag = new_lag;
        } catch (const AlignError&) {
        }
      }

      // Estimation block: the M most recent pairs (s_bar(kk), e(kk + lag)).
      const long lag_full = lag * static_cast<long>(d);
      const long label_max = static_cast<long>(emitted.back().first);
      long k_end = label_max - lag_full;
      k_end -= ((k_end % static_cast<long>(d)) + static_cast<long>(d)) %
               static_cast<long>(d);
      const long k_start = k_end - static_cast<long>((m_eff - 1) * d);
      if (k_start < static_cast<long>(p0))
        throw AlignError("run_closed_loop: estimation window precedes warm-up");

      s_block.clear();
      e_block.clear();
      const long e_base = static_cast<long>(emitted.front().first);
      const long r_base = static_cast<long>(rows.front().first);
      for (long kk = k_start; kk <= k_end; kk += static_cast<long>(d)) {
        const long e_idx = (kk + lag_full - e_base) / static_cast<long>(d);
        const long r_idx = (kk - r_base) / static_cast<long>(d);
        if (e_idx < 0 || e_idx >= static_cast<long>(emitted.size()) ||
            r_idx < 0 || r_idx >= static_cast<long>(rows.size()))
          throw AlignError("run_closed_loop: estimation window out of range");
        e_block.push_back(emitted[static_cast<std::size_t>(e_idx)].second);
        s_block.push_back(rows[static_cast<std::size_t>(r_idx)].second);
      }

      const double residual = mean_power(std::span<const cdouble>(e_block));
      const double residual_db = 10.0 * std::log10(std::max(residual, 1e-300));
      if (it == 0) initial_residual_db = residual_db;
      if (!std::isfinite(residual) ||
          residual_db > initial_residual_db + cfg.divergence_margin_db)
        throw DivergenceError("run_closed_loop: residual grew by more than " +
                              std::to_string(cfg.divergence_margin_db) + " dB");

      if (cfg.mode == LearningConfig::Mode::kBlock) {
        block_adaptive_update_inplace(lt.alpha, s_block, e_block, cfg.mu, lt.c_reg);
      } else {
        sample_adaptive_step_inplace(lt.alpha, s_block[0], e_block[0], cfg.mu,
                                     lt.c_reg);
      }

      if (it % cfg.history_stride == 0 || it + 1 == cfg.max_updates) {
        res.history.update_index.push_back(it);
        res.history.residual_db.push_back(residual_db);
        res.history.coefficients.push_back(lt.alpha);
        cvec grad(row_w, cdouble(0.0, 0.0));
        std::vector<double> comp(row_w, 0.0);
        double err = 0.0;
        for (std::size_t m = 0; m < s_block.size(); ++m) {
          const cdouble ec = std::conj(e_block[m]);
          for (std::size_t i = 0; i < row_w; ++i) {
            grad[i] += s_block[m][i] * ec;
            comp[i] += std::norm(s_block[m][i]);
          }
          err += std::norm(e_block[m]);
        }
        res.history.gradient.push_back(std::move(grad));
        res.history.component_energy.push_back(std::move(comp));
        res.history.error_energy.push_back(err);
      }
      res.final_residual_db = residual_db;

      // Bound the queues: keep enough for the next estimation window, the
      // re-alignment window and the loop delay.
      const std::size_t keep = m_eff + align_need + 2 * cfg.align_max_lag +
                               (g_delay + cfg.extra_loop_delay) / d + 700;
      while (emitted.size() > keep) emitted.pop_front();
      while (rows.size() > keep) rows.pop_front();
      while (s0_hist.size() > keep) s0_hist.pop_front();
    }

    res.initial_residual_db = initial_residual_db;
    res.coeffs.sub_band = lt.band;
    res.coeffs.q_order = q_order;
    res.coeffs.memory_depth = memory_depth;
    res.coeffs.taps = lt.alpha;
    validate(res.coeffs);
    result.bands.push_back(std::move(res));
  }

  return result;
}

}  // namespace subdpd
