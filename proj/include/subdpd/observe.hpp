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

#include <cmath>
#include <deque>
#include <optional>

#include "subdpd/basis.hpp"
#include "subdpd/errors.hpp"
#include "subdpd/fir.hpp"
#include "subdpd/pa.hpp"
#include "subdpd/rng.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

/// Narrowband feedback receiver settings for one IM sub-band.
struct ObserverConfig {
  SubBandId sub_band;
  double obs_bandwidth_hz = 0.0;  // full passband width
  int decimation = 1;
  double stopband_atten_db = 80.0;
  double noise_rms = 0.0;  // optional AWGN at the observer output, default off
};

/// Observation bandwidth rule: Q times the wider CC bandwidth, clipped to
/// 80% of the 2 f_IF inter-sub-band spacing.
inline ObserverConfig default_observer(SubBandId band, int q_order,
                                       double wider_cc_bw_hz, double f_if_hz,
                                       double stopband_atten_db = 80.0) {
  const SubBandFilterSpec spec =
      sub_band_filter_spec(q_order, wider_cc_bw_hz, f_if_hz, stopband_atten_db);
  ObserverConfig cfg;
  cfg.sub_band = band;
  cfg.obs_bandwidth_hz = spec.passband_hz;
  cfg.stopband_atten_db = stopband_atten_db;
  return cfg;
}

inline void validate(const ObserverConfig& cfg, double f_if_hz, double f_s) {
  validate(cfg.sub_band);
  if (!(cfg.obs_bandwidth_hz > 0.0))
    throw std::invalid_argument("observer bandwidth must be positive");
  if (cfg.decimation < 1)
    throw std::invalid_argument("observer decimation must be >= 1");
  const double center = std::abs(sub_band_center_hz(cfg.sub_band, f_if_hz));
  if (center + cfg.obs_bandwidth_hz / 2.0 >= f_s / 2.0)
    throw RateError("observed sub-band does not fit inside Nyquist");
  if (f_s / cfg.decimation < 2.0 * cfg.obs_bandwidth_hz)
    throw RateError("decimated rate below 2x observation bandwidth");
}

inline std::vector<double> design_observer_lowpass(const ObserverConfig& cfg,
                                                   double f_if_hz, double f_s) {
  const double transition = 2.0 * f_if_hz - cfg.obs_bandwidth_hz;
  if (!(transition > 0.0))
    throw DesignError("observer passband reaches the neighboring sub-band");
  return design_lowpass(cfg.obs_bandwidth_hz / 2.0, cfg.stopband_atten_db,
                        transition, f_s);
}

/// Extracts one IM sub-band from the composite PA output: mix the sub-band
/// to DC, lowpass (delay-compensated), then decimate. This is the learner's
/// error signal e_m(n).
inline ComplexBasebandSignal observe_sub_band(const ComplexBasebandSignal& pa_out,
                                              const ObserverConfig& cfg,
                                              double f_if_hz) {
  validate(cfg, f_if_hz, pa_out.sample_rate_hz);
  const double center = sub_band_center_hz(cfg.sub_band, f_if_hz);
  ComplexBasebandSignal mixed = frequency_shift(pa_out, -center);
  ComplexBasebandSignal filtered =
      fir_filter(mixed, design_observer_lowpass(cfg, f_if_hz, pa_out.sample_rate_hz),
                 /*compensate_delay=*/true);
  if (cfg.decimation == 1) return filtered;

  ComplexBasebandSignal out;
  out.sample_rate_hz = pa_out.sample_rate_hz / cfg.decimation;
  out.samples.reserve(filtered.samples.size() / static_cast<std::size_t>(cfg.decimation) + 1);
  for (std::size_t n = 0; n < filtered.samples.size();
       n += static_cast<std::size_t>(cfg.decimation))
    out.samples.push_back(filtered.samples[n]);
  return out;
}

/// Streaming observer for the closed loop. Emits one sample per push; the
/// i-th emission is nominally the sub-band content at input index i (the
/// known filter group delay is compensated internally). Any extra loop
/// latency is NOT compensated here; the learner discovers it with align().
class ObserverStream {
 public:
  ObserverStream(const ObserverConfig& cfg, double f_if_hz, double f_s,
                 std::size_t extra_delay, std::uint64_t noise_seed = 0)
      : cfg_(cfg),
        center_over_fs_(sub_band_center_hz(cfg.sub_band, f_if_hz) / f_s),
        fir_(design_observer_lowpass(cfg, f_if_hz, f_s)),
        extra_delay_(extra_delay),
        noise_rng_(noise_seed) {
    validate(cfg, f_if_hz, f_s);
    pending_.assign(extra_delay_, cdouble(0.0, 0.0));
  }

  std::size_t group_delay() const { return fir_.group_delay(); }
  std::size_t warmup_length() const { return fir_.tap_count() + extra_delay_; }

  /// Push the PA output at absolute composite index n; returns the emitted
  /// observation (nominally content at n - group_delay, further delayed by
  /// the configured extra latency).
  cdouble push(cdouble y, std::size_t n) {
    const double cycles =
        std::fmod(center_over_fs_ * static_cast<double>(n), 1.0);
    const double phi = -2.0 * M_PI * cycles;
    cdouble v = y * cdouble(std::cos(phi), std::sin(phi));
    cdouble w = fir_.push(v);
    if (cfg_.noise_rms > 0.0) w += cfg_.noise_rms * noise_rng_.complex_gaussian();
    if (extra_delay_ == 0) return w;
    pending_.push_back(w);
    const cdouble out = pending_.front();
    pending_.pop_front();
    return out;
  }

 private:
  ObserverConfig cfg_;
  double center_over_fs_;
  FirStream<double> fir_;
  std::size_t extra_delay_;
  std::deque<cdouble> pending_;
  Rng noise_rng_;
};

}  // namespace subdpd
