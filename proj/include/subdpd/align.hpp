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
#include <cstdlib>
#include <span>

#include "subdpd/errors.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

struct AlignResult {
  long lag = 0;              // obs(n + lag) lines up with ref(n)
  cdouble phase_gain{1.0, 0.0};  // least-squares gain: obs ~= phase_gain * ref
  ComplexBasebandSignal aligned_obs;  // lag-shifted and divided by phase_gain
  double peak_correlation = 0.0;
};

/// Integer-lag timing and complex gain recovery by cross-correlation.
/// O(n * max_lag); intended for block-sized inputs.
inline AlignResult align(const ComplexBasebandSignal& ref,
                         const ComplexBasebandSignal& obs,
                         std::size_t max_lag) {
  if (ref.sample_rate_hz != obs.sample_rate_hz)
    throw RateError("align: sample rates differ");
  const auto& r = ref.samples;
  const auto& o = obs.samples;

  long best_lag = 0;
  double best_metric = -1.0;
  for (long lag = -static_cast<long>(max_lag); lag <= static_cast<long>(max_lag); ++lag) {
    // Overlap of ref(n) with obs(n + lag).
    const long n_lo = std::max<long>(0, -lag);
    const long n_hi = std::min<long>(static_cast<long>(r.size()),
                                     static_cast<long>(o.size()) - lag);
    if (n_hi - n_lo < 1000)
      continue;  // too little overlap to trust this lag
    cdouble xc(0.0, 0.0);
    double pr = 0.0, po = 0.0;
    for (long n = n_lo; n < n_hi; ++n) {
      const cdouble rv = r[static_cast<std::size_t>(n)];
      const cdouble ov = o[static_cast<std::size_t>(n + lag)];
      xc += std::conj(rv) * ov;
      pr += std::norm(rv);
      po += std::norm(ov);
    }
    if (pr == 0.0 || po == 0.0) continue;
    const double metric = std::abs(xc) / std::sqrt(pr * po);
    if (metric > best_metric) {
      best_metric = metric;
      best_lag = lag;
    }
  }

  if (best_metric < 0.1)
    throw AlignError("align: correlation peak below 0.1, signals unrelated");

  // Least-squares complex gain of the shifted observation onto the reference.
  cdouble num(0.0, 0.0);
  double den = 0.0;
  const long n_lo = std::max<long>(0, -best_lag);
  const long n_hi = std::min<long>(static_cast<long>(r.size()),
                                   static_cast<long>(o.size()) - best_lag);
  for (long n = n_lo; n < n_hi; ++n) {
    const cdouble rv = r[static_cast<std::size_t>(n)];
    num += std::conj(rv) * o[static_cast<std::size_t>(n + best_lag)];
    den += std::norm(rv);
  }
  const cdouble gain = num / den;
  if (!(std::abs(gain) > 0.0))
    throw AlignError("align: degenerate gain estimate");

  AlignResult res;
  res.lag = best_lag;
  res.phase_gain = gain;
  res.peak_correlation = best_metric;
  res.aligned_obs.sample_rate_hz = obs.sample_rate_hz;
  res.aligned_obs.samples.assign(r.size(), cdouble(0.0, 0.0));
  for (std::size_t n = 0; n < r.size(); ++n) {
    const long idx = static_cast<long>(n) + best_lag;
    if (idx >= 0 && idx < static_cast<long>(o.size()))
      res.aligned_obs.samples[n] = o[static_cast<std::size_t>(idx)] / gain;
  }
  return res;
}

}  // namespace subdpd
