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

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "subdpd/errors.hpp"
#include "subdpd/rng.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

/// Complex constellation points at the symbol rate. Symbol k corresponds to
/// sample k * (fs / symbol_rate_hz) of the matching baseband CC signal.
struct SymbolStream {
  cvec symbols;
  double symbol_rate_hz = 0.0;
};

/// Two-carrier waveform description. The composite rate derived from it must
/// cover the highest IM sub-band that will be simulated (max_sub_band_order)
/// plus the spectral regrowth of the DPD order (max_dpd_order).
struct DualCarrierSpec {
  std::array<double, 2> cc_bandwidth_hz{1e6, 1e6};  // occupied bandwidth per CC
  double carrier_spacing_hz = 10e6;                 // 2 * f_IF
  std::string modulation = "qpsk";
  std::array<double, 2> per_cc_power{1.0, 1.0};
  double guard_factor = 1.2;
  double rolloff = 0.22;
  int max_sub_band_order = 3;   // highest |m| to be simulated
  int max_dpd_order = 9;        // Q in the rate rule
  double max_sample_rate_hz = 2e9;
};

inline double intermediate_freq_hz(const DualCarrierSpec& spec) {
  return spec.carrier_spacing_hz / 2.0;
}

inline double symbol_rate_hz(const DualCarrierSpec& spec, int cc) {
  return spec.cc_bandwidth_hz[static_cast<std::size_t>(cc)] / (1.0 + spec.rolloff);
}

inline void validate(const DualCarrierSpec& spec) {
  const double bmax = std::max(spec.cc_bandwidth_hz[0], spec.cc_bandwidth_hz[1]);
  if (!(spec.cc_bandwidth_hz[0] > 0.0) || !(spec.cc_bandwidth_hz[1] > 0.0))
    throw std::invalid_argument("cc bandwidths must be positive");
  if (!(spec.carrier_spacing_hz > bmax))
    throw OverlapError("carrier spacing must exceed the wider CC bandwidth");
  if (!(spec.per_cc_power[0] > 0.0) || !(spec.per_cc_power[1] > 0.0))
    throw std::invalid_argument("per-CC powers must be positive");
  if (!(spec.guard_factor >= 1.0))
    throw std::invalid_argument("guard factor must be >= 1");
  if (spec.modulation != "qpsk")
    throw std::invalid_argument("unsupported modulation: " + spec.modulation);
  if (spec.max_sub_band_order < 1 || spec.max_sub_band_order % 2 == 0)
    throw OrderError("max_sub_band_order must be odd and positive");
  if (spec.max_dpd_order < 1 || spec.max_dpd_order % 2 == 0)
    throw OrderError("max_dpd_order must be odd and positive");
}

/// Minimum rate that keeps the highest simulated sub-band, including Q-th
/// order regrowth, inside Nyquist with the configured guard.
inline double min_composite_rate(const DualCarrierSpec& spec) {
  const double bmax = std::max(spec.cc_bandwidth_hz[0], spec.cc_bandwidth_hz[1]);
  const double f_if = intermediate_freq_hz(spec);
  return 2.0 * spec.guard_factor *
         (static_cast<double>(spec.max_sub_band_order) * f_if +
          static_cast<double>(spec.max_dpd_order) * bmax / 2.0);
}

/// Smallest rate of the form integer * symbol_rate(wider CC) satisfying the
/// rate rule, also an integer multiple of the other CC's symbol rate.
inline double derive_composite_rate(const DualCarrierSpec& spec) {
  validate(spec);
  const int wide = spec.cc_bandwidth_hz[0] >= spec.cc_bandwidth_hz[1] ? 0 : 1;
  const double r_wide = symbol_rate_hz(spec, wide);
  const double r_other = symbol_rate_hz(spec, 1 - wide);
  const double fs_min = min_composite_rate(spec);

  for (std::uint64_t k = static_cast<std::uint64_t>(std::ceil(fs_min / r_wide));; ++k) {
    const double fs = static_cast<double>(k) * r_wide;
    if (fs > spec.max_sample_rate_hz)
      throw RateError("derived composite rate exceeds configured maximum");
    const double ratio = fs / r_other;
    if (std::abs(ratio - std::round(ratio)) < 1e-6) return fs;
  }
}

/// Root-raised-cosine pulse sampled at `osf` samples per symbol, spanning
/// half_span_symbols each side of the peak. Unit energy.
inline std::vector<double> root_raised_cosine_taps(double rolloff, int osf,
                                                   int half_span_symbols = 8) {
  if (osf < 1 || half_span_symbols < 1)
    throw std::invalid_argument("root_raised_cosine_taps: bad geometry");
  const std::size_t half = static_cast<std::size_t>(half_span_symbols * osf);
  std::vector<double> taps(2 * half + 1);
  const double b = rolloff;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half)) /
                     static_cast<double>(osf);  // in symbol periods
    double v;
    if (std::abs(t) < 1e-12) {
      v = 1.0 - b + 4.0 * b / M_PI;
    } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-9) {
      v = (b / std::sqrt(2.0)) *
          ((1.0 + 2.0 / M_PI) * std::sin(M_PI / (4.0 * b)) +
           (1.0 - 2.0 / M_PI) * std::cos(M_PI / (4.0 * b)));
    } else {
      const double num = std::sin(M_PI * t * (1.0 - b)) +
                         4.0 * b * t * std::cos(M_PI * t * (1.0 + b));
      const double den = M_PI * t * (1.0 - (4.0 * b * t) * (4.0 * b * t));
      v = num / den;
    }
    taps[i] = v;
  }
  double energy = 0.0;
  for (double t : taps) energy += t * t;
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& t : taps) t *= scale;
  return taps;
}

/// Pulse-shape a symbol stream; symbol k peaks at output sample k * osf.
/// Output length is symbols * osf; pulse tails beyond that range are dropped.
inline cvec shape_symbols(std::span<const cdouble> symbols, int osf,
                          std::span<const double> taps) {
  const std::size_t half = (taps.size() - 1) / 2;
  const std::size_t n_out = symbols.size() * static_cast<std::size_t>(osf);
  cvec out(n_out, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const cdouble s = symbols[k];
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(k) * osf;
    const std::ptrdiff_t lo =
        std::max<std::ptrdiff_t>(0, center - static_cast<std::ptrdiff_t>(half));
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(n_out) - 1,
        center + static_cast<std::ptrdiff_t>(half));
    for (std::ptrdiff_t n = lo; n <= hi; ++n)
      out[static_cast<std::size_t>(n)] +=
          s * taps[static_cast<std::size_t>(n - center + static_cast<std::ptrdiff_t>(half))];
  }
  return out;
}

inline cvec qpsk_symbols(std::size_t count, Rng& rng) {
  cvec syms(count);
  std::uint64_t word = 0;
  int avail = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (avail < 2) {
      word = rng.bits();
      avail = 64;
    }
    const double re = (word & 1) ? M_SQRT1_2 : -M_SQRT1_2;
    const double im = (word & 2) ? M_SQRT1_2 : -M_SQRT1_2;
    word >>= 2;
    avail -= 2;
    syms[k] = {re, im};
  }
  return syms;
}

struct DualCarrierSignal {
  ComplexBasebandSignal composite;  // x(n) = x1 e^{+j2pi fIF n/fs} + x2 e^{-j...}
  ComplexBasebandSignal cc1;        // x1(n), baseband
  ComplexBasebandSignal cc2;        // x2(n), baseband
  std::array<SymbolStream, 2> symbols;
};

inline constexpr int kPulseHalfSpanSymbols = 8;

/// Deterministic dual-carrier synthesis. Each CC is RRC-shaped single-carrier
/// QPSK; measured power is normalized to per_cc_power over the returned
/// window. Identical (spec, n_samples, seed) gives bit-identical output.
inline DualCarrierSignal generate_dual_carrier(const DualCarrierSpec& spec,
                                               std::size_t n_samples,
                                               std::uint64_t seed) {
  const double fs = derive_composite_rate(spec);
  const double f_if = intermediate_freq_hz(spec);

  DualCarrierSignal out;
  for (int cc = 0; cc < 2; ++cc) {
    const double r_sym = symbol_rate_hz(spec, cc);
    const int osf = static_cast<int>(std::round(fs / r_sym));
    if (n_samples < 100 * static_cast<std::size_t>(osf))
      throw std::invalid_argument(
          "generate_dual_carrier: need at least 100 symbols per CC");
    const std::size_t n_sym_window =
        (n_samples + static_cast<std::size_t>(osf) - 1) / static_cast<std::size_t>(osf);
    const std::size_t n_sym_total = n_sym_window + 2 * kPulseHalfSpanSymbols + 2;

    Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(cc)));
    const cvec syms = qpsk_symbols(n_sym_total, rng);
    const std::vector<double> pulse =
        root_raised_cosine_taps(spec.rolloff, osf, kPulseHalfSpanSymbols);
    cvec shaped = shape_symbols(syms, osf, pulse);

    // Window past the pulse build-up so the returned signal is steady state;
    // symbol (halfspan + j) peaks at window sample j * osf.
    const std::size_t lead = static_cast<std::size_t>(kPulseHalfSpanSymbols * osf);
    cvec window(shaped.begin() + static_cast<std::ptrdiff_t>(lead),
                shaped.begin() + static_cast<std::ptrdiff_t>(lead + n_samples));

    const double p = mean_power(std::span<const cdouble>(window));
    const double scale =
        std::sqrt(spec.per_cc_power[static_cast<std::size_t>(cc)] / p);
    for (auto& v : window) v *= scale;

    SymbolStream stream;
    stream.symbol_rate_hz = r_sym;
    stream.symbols.assign(
        syms.begin() + kPulseHalfSpanSymbols,
        syms.begin() + static_cast<std::ptrdiff_t>(kPulseHalfSpanSymbols + n_sym_window));

    ComplexBasebandSignal sig{std::move(window), fs};
    if (cc == 0) {
      out.cc1 = std::move(sig);
      out.symbols[0] = std::move(stream);
    } else {
      out.cc2 = std::move(sig);
      out.symbols[1] = std::move(stream);
    }
  }

  out.composite.sample_rate_hz = fs;
  out.composite.samples.resize(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    out.composite.samples[n] =
        out.cc1.samples[n] * tone_sample(f_if, fs, n) +
        out.cc2.samples[n] * tone_sample(-f_if, fs, n);
  }
  return out;
}

}  // namespace subdpd
