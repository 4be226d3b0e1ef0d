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
#include <cstddef>
#include <span>
#include <vector>

#include "subdpd/errors.hpp"
#include "subdpd/fft.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

namespace detail {

inline double bessel_i0(double x) {
  // Power series; converges quickly for the beta range used here.
  double sum = 1.0, term = 1.0;
  const double x2 = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= x2 / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

inline double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0)
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

}  // namespace detail

/// Kaiser-windowed-sinc lowpass. `cutoff_hz` is the passband edge and the
/// stopband starts at cutoff_hz + transition_hz. Returns an odd-length,
/// symmetric, unit-DC-gain real tap vector with group delay (L-1)/2.
inline std::vector<double> design_lowpass(double cutoff_hz,
                                          double stopband_atten_db,
                                          double transition_hz, double f_s,
                                          std::size_t max_taps = 1u << 16) {
  if (!(f_s > 0.0)) throw DesignError("design_lowpass: sample rate must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < f_s / 2.0))
    throw DesignError("design_lowpass: cutoff must lie in (0, fs/2)");
  if (!(transition_hz > 0.0))
    throw DesignError("design_lowpass: transition width must be positive");
  if (cutoff_hz + transition_hz >= f_s / 2.0)
    throw DesignError("design_lowpass: stopband edge reaches Nyquist");
  if (!(stopband_atten_db > 0.0))
    throw DesignError("design_lowpass: attenuation must be positive");

  // Small design margin on both the ripple target and the length estimate so
  // the requested attenuation holds at the stopband edge itself.
  const double atten = stopband_atten_db + 2.0;
  const double beta = detail::kaiser_beta(atten);
  const double dw = 2.0 * M_PI * transition_hz / f_s;
  std::size_t n_taps =
      static_cast<std::size_t>(std::ceil((atten - 7.95) / (2.285 * dw) * 1.10)) + 3;
  if (n_taps % 2 == 0) ++n_taps;
  if (n_taps < 5) n_taps = 5;
  if (n_taps > max_taps)
    throw DesignError("design_lowpass: specification needs " +
                      std::to_string(n_taps) + " taps, max is " +
                      std::to_string(max_taps));

  const double fc = cutoff_hz + transition_hz / 2.0;  // ideal edge mid-transition
  const double wc = 2.0 * M_PI * fc / f_s;
  const std::size_t mid = (n_taps - 1) / 2;
  const double i0b = detail::bessel_i0(beta);

  std::vector<double> taps(n_taps);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_taps; ++i) {
    const double m = static_cast<double>(i) - static_cast<double>(mid);
    const double x = wc * m;
    const double sinc = (m == 0.0) ? wc / M_PI : std::sin(x) / (M_PI * m);
    const double r = m / static_cast<double>(mid);
    const double win = detail::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    taps[i] = sinc * win;
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;  // exact unity DC gain
  // Enforce exact symmetry against accumulated rounding.
  for (std::size_t i = 0; i < mid; ++i) {
    const double avg = 0.5 * (taps[i] + taps[n_taps - 1 - i]);
    taps[i] = avg;
    taps[n_taps - 1 - i] = avg;
  }
  return taps;
}

/// Complex frequency response of a tap vector at frequency f (Hz).
template <typename TapT>
cdouble fir_response(std::span<const TapT> taps, double f_hz, double f_s) {
  cdouble acc(0.0, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double phi = -2.0 * M_PI * (f_hz / f_s) * static_cast<double>(k);
    acc += cdouble(taps[k]) * cdouble(std::cos(phi), std::sin(phi));
  }
  return acc;
}

/// Linear convolution returning a signal of the same length as the input
/// (zero pre-history). With compensate_delay the output is advanced by
/// (L-1)/2 samples, making a symmetric filter effectively zero-delay.
template <typename TapT>
ComplexBasebandSignal fir_filter(const ComplexBasebandSignal& sig,
                                 std::span<const TapT> taps,
                                 bool compensate_delay = false) {
  if (taps.empty()) throw std::invalid_argument("fir_filter: empty taps");
  const cvec full = detail::convolve_full(std::span<const cdouble>(sig.samples), taps);
  const std::size_t offset = compensate_delay ? (taps.size() - 1) / 2 : 0;
  ComplexBasebandSignal out;
  out.sample_rate_hz = sig.sample_rate_hz;
  out.samples.assign(full.begin() + static_cast<std::ptrdiff_t>(offset),
                     full.begin() + static_cast<std::ptrdiff_t>(offset + sig.samples.size()));
  return out;
}

inline ComplexBasebandSignal fir_filter(const ComplexBasebandSignal& sig,
                                        const std::vector<double>& taps,
                                        bool compensate_delay = false) {
  return fir_filter(sig, std::span<const double>(taps), compensate_delay);
}

inline ComplexBasebandSignal fir_filter(const ComplexBasebandSignal& sig,
                                        const cvec& taps,
                                        bool compensate_delay = false) {
  return fir_filter(sig, std::span<const cdouble>(taps), compensate_delay);
}

/// Streaming direct-form FIR over complex samples, for sample-by-sample
/// closed-loop processing. State persists across pushes.
template <typename TapT>
class FirStream {
 public:
  explicit FirStream(std::vector<TapT> taps)
      : taps_(std::move(taps)), hist_(taps_.size(), cdouble(0.0, 0.0)) {
    if (taps_.empty()) throw std::invalid_argument("FirStream: empty taps");
  }

  cdouble push(cdouble x) {
    pos_ = (pos_ + hist_.size() - 1) % hist_.size();
    hist_[pos_] = x;
    cdouble acc(0.0, 0.0);
    std::size_t idx = pos_;
    for (std::size_t k = 0; k < taps_.size(); ++k) {
      acc += hist_[idx] * taps_[k];
      idx = (idx + 1) % hist_.size();
    }
    return acc;
  }

  std::size_t group_delay() const { return (taps_.size() - 1) / 2; }
  std::size_t tap_count() const { return taps_.size(); }

 private:
  std::vector<TapT> taps_;
  cvec hist_;
  std::size_t pos_ = 0;
};

}  // namespace subdpd
