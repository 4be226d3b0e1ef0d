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
#include <string>
#include <vector>

#include "subdpd/align.hpp"
#include "subdpd/basis.hpp"
#include "subdpd/errors.hpp"
#include "subdpd/fft.hpp"
#include "subdpd/fir.hpp"
#include "subdpd/signal.hpp"
#include "subdpd/waveform.hpp"

namespace subdpd {

struct Band {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

inline Band centered_band(double center_hz, double width_hz) {
  return {center_hz - width_hz / 2.0, center_hz + width_hz / 2.0};
}

/// Welch averaged-periodogram estimate, two-sided (complex baseband),
/// Hann window. density integrates to the signal's mean power (Parseval).
struct PsdEstimate {
  std::vector<double> frequencies_hz;  // fftshifted, ascending
  std::vector<double> density;         // power per Hz, relative units
  double sample_rate_hz = 0.0;
  std::size_t segment_length = 0;
  double overlap = 0.0;
  std::string window = "hann";
  std::string normalization = "two-sided power spectral density";
};

inline PsdEstimate psd(const ComplexBasebandSignal& sig,
                       std::size_t segment_len = 4096, double overlap = 0.5) {
  if (segment_len < 8 || (segment_len & (segment_len - 1)) != 0)
    throw ShapeError("psd: segment length must be a power of two >= 8");
  if (sig.samples.size() < segment_len)
    throw ShapeError("psd: signal shorter than one segment");
  if (!(overlap >= 0.0) || !(overlap < 1.0))
    throw std::invalid_argument("psd: overlap must be in [0, 1)");

  const std::size_t n = segment_len;
  std::vector<double> window(n);
  double u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                      static_cast<double>(n - 1)));
    u += window[i] * window[i];
  }

  const std::size_t hop =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(static_cast<double>(n) * (1.0 - overlap))));
  std::vector<double> acc(n, 0.0);
  std::size_t n_segments = 0;
  cvec seg(n);
  for (std::size_t start = 0; start + n <= sig.samples.size(); start += hop) {
    for (std::size_t i = 0; i < n; ++i) seg[i] = sig.samples[start + i] * window[i];
    detail::fft_radix2(seg, false);
    for (std::size_t i = 0; i < n; ++i) acc[i] += std::norm(seg[i]);
    ++n_segments;
  }

  PsdEstimate est;
  est.sample_rate_hz = sig.sample_rate_hz;
  est.segment_length = n;
  est.overlap = overlap;
  est.frequencies_hz.resize(n);
  est.density.resize(n);
  const double scale =
      1.0 / (static_cast<double>(n_segments) * sig.sample_rate_hz * u);
  const double df = sig.sample_rate_hz / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    // fftshift: bin 0 .. n-1 -> frequency (i - n/2) df
    const std::size_t src = (i + n / 2) % n;
    est.frequencies_hz[i] =
        (static_cast<double>(i) - static_cast<double>(n / 2)) * df;
    est.density[i] = acc[src] * scale;
  }
  return est;
}

/// Integrates the density over [lo, hi); bins are counted by center frequency.
inline double band_power(const PsdEstimate& est, const Band& band) {
  if (band.lo_hz >= band.hi_hz) throw BandError("band_power: empty band");
  if (band.lo_hz < est.frequencies_hz.front() ||
      band.hi_hz > est.frequencies_hz.back() + est.sample_rate_hz /
                                                   static_cast<double>(est.segment_length))
    throw BandError("band_power: band outside the PSD grid");
  const double df = est.sample_rate_hz / static_cast<double>(est.segment_length);
  double acc = 0.0;
  for (std::size_t i = 0; i < est.frequencies_hz.size(); ++i) {
    const double f = est.frequencies_hz[i];
    if (f >= band.lo_hz && f < band.hi_hz) acc += est.density[i] * df;
  }
  return acc;
}

inline double total_power(const PsdEstimate& est) {
  const double df = est.sample_rate_hz / static_cast<double>(est.segment_length);
  double acc = 0.0;
  for (double d : est.density) acc += d * df;
  return acc;
}

/// IMmR in dBc: wanted (stronger) CC band power over IM sub-band power,
/// both band-integrated from the same PSD.
inline double imr_dbc(const PsdEstimate& est, const Band& cc1_band,
                      const Band& cc2_band, const Band& im_band) {
  const double p_cc = std::max(band_power(est, cc1_band), band_power(est, cc2_band));
  const double p_im = band_power(est, im_band);
  if (p_im <= 0.0 || p_cc <= 0.0) throw BandError("imr_dbc: empty band power");
  return 10.0 * std::log10(p_cc / p_im);
}

inline double imr(const ComplexBasebandSignal& pa_out, SubBandId sub_band,
                  double f_if_hz, double cc_bandwidth_hz, double im_bandwidth_hz,
                  std::size_t segment_len = 4096, double overlap = 0.5) {
  const PsdEstimate est = psd(pa_out, segment_len, overlap);
  return imr_dbc(est, centered_band(f_if_hz, cc_bandwidth_hz),
                 centered_band(-f_if_hz, cc_bandwidth_hz),
                 centered_band(sub_band_center_hz(sub_band, f_if_hz), im_bandwidth_hz));
}

/// Band-integrated power on an absolute scale: the stated total TX power is
/// attached to the full-grid integral, then the scalar attenuation
/// (duplexer model) is subtracted.
inline double integrated_power_dbm(const PsdEstimate& est, const Band& band,
                                   double ref_dbm_per_total,
                                   double extra_atten_db) {
  const double p_band = band_power(est, band);
  const double p_total = total_power(est);
  if (p_band <= 0.0 || p_total <= 0.0)
    throw BandError("integrated_power_dbm: empty band power");
  return ref_dbm_per_total + 10.0 * std::log10(p_band / p_total) - extra_atten_db;
}

// -------------------------------------------------------------------------
// EVM

/// Data-aided EVM of one component carrier inside the composite `measured`
/// signal. The receiver downconverts the CC, aligns to the remodulated
/// reference (integer lag + one complex LS gain, the equalizer), applies an
/// adjacent-carrier reject filter plus the RRC matched filter, and samples
/// at symbol instants. The reference symbols carry the known TX/RX pulse
/// ISI, so a distortion-free input measures zero.
inline double evm_percent(const SymbolStream& ref,
                          const ComplexBasebandSignal& measured, int cc_select,
                          const DualCarrierSpec& spec,
                          std::size_t max_lag = 256) {
  if (cc_select != 0 && cc_select != 1)
    throw std::invalid_argument("evm_percent: cc_select must be 0 or 1");
  const double fs = measured.sample_rate_hz;
  const double f_if = intermediate_freq_hz(spec);
  const double r_sym = symbol_rate_hz(spec, cc_select);
  const int osf = static_cast<int>(std::round(fs / r_sym));
  const double cc_bw = spec.cc_bandwidth_hz[static_cast<std::size_t>(cc_select)];

  const std::size_t n_sym_available = measured.samples.size() / static_cast<std::size_t>(osf);
  if (std::min(n_sym_available, ref.symbols.size()) < 100)
    throw std::invalid_argument("evm_percent: need at least 100 symbols");

  // Downconvert the selected CC to baseband.
  const double center = cc_select == 0 ? f_if : -f_if;
  ComplexBasebandSignal bb = frequency_shift(measured, -center);

  // Timing: align against the remodulated reference.
  const std::vector<double> pulse =
      root_raised_cosine_taps(spec.rolloff, osf, kPulseHalfSpanSymbols);
  ComplexBasebandSignal remod;
  remod.sample_rate_hz = fs;
  remod.samples = shape_symbols(ref.symbols, osf, pulse);
  remod.samples.resize(std::min(remod.samples.size(), bb.samples.size()));
  const AlignResult timed = align(remod, bb, max_lag);

  // Adjacent-carrier rejection plus matched filter, both zero-delay.
  const double transition = 2.0 * f_if - 1.2 * cc_bw;
  const std::vector<double> reject =
      design_lowpass(0.6 * cc_bw, 80.0, transition, fs);
  ComplexBasebandSignal filtered = fir_filter(timed.aligned_obs, reject, true);
  filtered = fir_filter(filtered, pulse, true);

  // Known combined symbol-spaced response of TX pulse, reject filter and
  // matched filter; folded into the reference so pulse ISI is not counted
  // as transmitter error.
  cvec pulse_c(pulse.begin(), pulse.end());
  cvec chain = detail::convolve_full(std::span<const cdouble>(pulse_c),
                                     std::span<const double>(pulse));
  chain = detail::convolve_full(std::span<const cdouble>(chain),
                                std::span<const double>(reject));
  const std::size_t chain_mid = (chain.size() - 1) / 2;
  const int isi_half = static_cast<int>(chain_mid) / osf;
  std::vector<cdouble> isi(2 * static_cast<std::size_t>(isi_half) + 1);
  for (int k = -isi_half; k <= isi_half; ++k)
    isi[static_cast<std::size_t>(k + isi_half)] =
        chain[static_cast<std::size_t>(static_cast<int>(chain_mid) + k * osf)];

  const std::size_t n_sym =
      std::min(ref.symbols.size(), filtered.samples.size() / static_cast<std::size_t>(osf));
  // Drop edge symbols whose ISI window leaves the known range.
  const std::size_t first = static_cast<std::size_t>(isi_half) + 1;
  if (n_sym < first * 2 + 100)
    throw std::invalid_argument("evm_percent: too few interior symbols");
  cvec z, want;
  for (std::size_t j = first; j + first < n_sym; ++j) {
    z.push_back(filtered.samples[j * static_cast<std::size_t>(osf)]);
    cdouble acc(0.0, 0.0);
    for (int k = -isi_half; k <= isi_half; ++k)
      acc += isi[static_cast<std::size_t>(k + isi_half)] *
             ref.symbols[static_cast<std::size_t>(
                 static_cast<std::ptrdiff_t>(j) - k)];
    want.push_back(acc);
  }

  // Single complex LS gain (the equalizer), then the error/reference ratio.
  cdouble num(0.0, 0.0);
  double den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    num += std::conj(want[i]) * z[i];
    den += std::norm(want[i]);
  }
  const cdouble gain = num / den;
  double p_err = 0.0, p_ref = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p_err += std::norm(z[i] / gain - want[i]);
    p_ref += std::norm(want[i]);
  }
  return std::sqrt(p_err / p_ref) * 100.0;
}

// -------------------------------------------------------------------------
// Running-complexity model (FLOPs per sample and GFLOPS)

enum class DpdKind { kSubBand, kFullBand };

struct ComplexityReport {
  DpdKind kind = DpdKind::kSubBand;
  int sub_band_order = 3;  // m, for the sub-band kind
  int q_order = 9;
  int memory_depth = 1;
  double basis_flops_per_sample = 0.0;
  double filtering_flops_per_sample = 0.0;
  double total_flops_per_sample = 0.0;
  double sample_rate_hz = 0.0;
  double gflops = 0.0;
};

/// Ninth-order running-complexity table: basis-generation and DPD-filtering
/// FLOPs per sample, per sub-band and for the full-band reference.
inline ComplexityReport flops_model(DpdKind kind, int sub_band_order,
                                    int q_order, int memory_depth,
                                    double sample_rate_hz) {
  if (q_order != 9)
    throw UnsupportedOrderError("flops_model tabulates only Q = 9");
  if (memory_depth < 0) throw ShapeError("flops_model: memory depth >= 0");

  ComplexityReport rep;
  rep.kind = kind;
  rep.q_order = q_order;
  rep.memory_depth = memory_depth;
  rep.sample_rate_hz = sample_rate_hz;
  const double n1 = static_cast<double>(memory_depth + 1);
  if (kind == DpdKind::kFullBand) {
    rep.sub_band_order = 0;
    rep.basis_flops_per_sample = 11.0;
    rep.filtering_flops_per_sample = 40.0 * n1 - 2.0;
  } else {
    rep.sub_band_order = sub_band_order;
    switch (sub_band_order) {
      case 3:
        rep.basis_flops_per_sample = 37.0;
        rep.filtering_flops_per_sample = 32.0 * n1 - 2.0;
        break;
      case 5:
        rep.basis_flops_per_sample = 40.0;
        rep.filtering_flops_per_sample = 24.0 * n1 - 2.0;
        break;
      case 7:
        rep.basis_flops_per_sample = 45.0;
        rep.filtering_flops_per_sample = 16.0 * n1 - 2.0;
        break;
      case 9:
        rep.basis_flops_per_sample = 48.0;
        rep.filtering_flops_per_sample = 8.0 * n1 - 2.0;
        break;
      default:
        throw UnsupportedOrderError("flops_model: sub-band order must be 3, 5, 7 or 9");
    }
  }
  rep.total_flops_per_sample =
      rep.basis_flops_per_sample + rep.filtering_flops_per_sample;
  rep.gflops = rep.total_flops_per_sample * sample_rate_hz / 1e9;
  return rep;
}

}  // namespace subdpd
