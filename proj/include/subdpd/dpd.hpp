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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "subdpd/basis.hpp"
#include "subdpd/errors.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

/// Stacked complex DPD filter taps for one sub-band, delay-major layout:
/// [all orders at delay 0 | all orders at delay 1 | ... | delay N].
struct DpdCoefficients {
  SubBandId sub_band;
  int q_order = 3;
  int memory_depth = 0;  // N
  cvec taps;

  std::size_t orders() const {
    return basis_column_count(sub_band, q_order);
  }
  std::size_t expected_size() const {
    return orders() * static_cast<std::size_t>(memory_depth + 1);
  }
};

inline void validate(const DpdCoefficients& coeffs) {
  validate(coeffs.sub_band);
  if (coeffs.q_order < coeffs.sub_band.order || coeffs.q_order % 2 == 0)
    throw OrderError("DPD order must be odd and >= sub-band order");
  if (coeffs.memory_depth < 0) throw ShapeError("memory depth must be >= 0");
  if (coeffs.taps.size() != coeffs.expected_size())
    throw ShapeError("coefficient vector length does not match (Q, N, m)");
  if (!all_finite(coeffs.taps))
    throw std::invalid_argument("coefficients must be finite");
}

inline DpdCoefficients zero_coefficients(SubBandId band, int q_order,
                                         int memory_depth) {
  DpdCoefficients c;
  c.sub_band = band;
  c.q_order = q_order;
  c.memory_depth = memory_depth;
  c.taps.assign(c.expected_size(), cdouble(0.0, 0.0));
  validate(c);
  return c;
}

/// Row source for the stacked regressor s_bar(n) = [s(n); s(n-1); ...; s(n-N)]
/// with zero pre-history. Rows are materialized on demand.
struct Regressor {
  SubBandId sub_band;
  int q_order = 3;
  int memory_depth = 0;
  std::vector<cvec> basis_columns;  // orthogonalized columns s_p(n)
  double rate_hz = 0.0;

  std::size_t length() const {
    return basis_columns.empty() ? 0 : basis_columns[0].size();
  }
  std::size_t row_size() const {
    return basis_columns.size() * static_cast<std::size_t>(memory_depth + 1);
  }

  /// Fills out[l * K + c] = s_c(n - l); zero where n - l < 0.
  void row(std::size_t n, std::span<cdouble> out) const {
    const std::size_t k = basis_columns.size();
    if (out.size() != row_size()) throw ShapeError("Regressor::row: bad output size");
    for (int l = 0; l <= memory_depth; ++l) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(n) - l;
      for (std::size_t c = 0; c < k; ++c) {
        out[static_cast<std::size_t>(l) * k + c] =
            idx >= 0 ? basis_columns[c][static_cast<std::size_t>(idx)]
                     : cdouble(0.0, 0.0);
      }
    }
  }
};

inline Regressor build_regressor(const OrthoBasisSet& ortho, int memory_depth) {
  if (memory_depth < 0) throw ShapeError("build_regressor: N must be >= 0");
  Regressor reg;
  reg.sub_band = ortho.sub_band;
  reg.q_order = ortho.q_order;
  reg.memory_depth = memory_depth;
  reg.basis_columns = ortho.columns;
  reg.rate_hz = ortho.rate_hz;
  return reg;
}

/// Baseband injection signal x_tilde(n) = alpha^H s_bar(n).
inline ComplexBasebandSignal injection_signal(const DpdCoefficients& coeffs,
                                              const Regressor& reg) {
  validate(coeffs);
  if (coeffs.sub_band != reg.sub_band || coeffs.q_order != reg.q_order ||
      coeffs.memory_depth != reg.memory_depth ||
      coeffs.taps.size() != reg.row_size())
    throw ShapeError("injection_signal: coefficient/regressor shape mismatch");

  const std::size_t n = reg.length();
  ComplexBasebandSignal out;
  out.sample_rate_hz = reg.rate_hz;
  out.samples.resize(n);
  std::vector<cdouble> row(reg.row_size());
  for (std::size_t t = 0; t < n; ++t) {
    reg.row(t, row);
    cdouble acc(0.0, 0.0);
    for (std::size_t i = 0; i < row.size(); ++i)
      acc += std::conj(coeffs.taps[i]) * row[i];
    out.samples[t] = acc;
  }
  return out;
}

/// Composite PA input with sub-band injections placed at their IF offsets:
/// x_tilde(n) = x(n) + sum_m x_m(n) e^{j 2 pi (sign m) f_IF n / fs}.
inline ComplexBasebandSignal compose_pa_input(
    const ComplexBasebandSignal& x,
    const std::vector<std::pair<SubBandId, ComplexBasebandSignal>>& injections,
    double f_if_hz) {
  ComplexBasebandSignal out = x;
  for (const auto& [band, inj] : injections) {
    validate(band);
    if (inj.sample_rate_hz != x.sample_rate_hz)
      throw RateError("compose_pa_input: injection rate mismatch");
    if (inj.samples.size() != x.samples.size())
      throw ShapeError("compose_pa_input: injection length mismatch");
    const double f = sub_band_center_hz(band, f_if_hz);
    for (std::size_t n = 0; n < out.samples.size(); ++n)
      out.samples[n] += inj.samples[n] * tone_sample(f, x.sample_rate_hz, n);
  }
  return out;
}

// -------------------------------------------------------------------------
// Coefficient files: sub_band, Q, N, then interleaved real/imag taps.

inline void save_coefficients(const std::string& path, const DpdCoefficients& c) {
  validate(c);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write coefficient file: " + path);
  out << "# subdpd sub-band DPD coefficients\n";
  out << "sub_band " << to_string(c.sub_band) << "\n";
  out << "order " << c.q_order << "\n";
  out << "memory " << c.memory_depth << "\n";
  out << "taps";
  char buf[64];
  for (const auto& t : c.taps) {
    std::snprintf(buf, sizeof buf, " %.17g %.17g", t.real(), t.imag());
    out << buf;
  }
  out << "\n";
}

inline DpdCoefficients load_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coefficient file: " + path);
  DpdCoefficients c;
  bool have_band = false, have_q = false, have_n = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (key == "sub_band") {
      std::string label;
      ss >> label;
      c.sub_band = parse_sub_band(label);
      have_band = true;
    } else if (key == "order") {
      if (!(ss >> c.q_order)) throw ConfigError(where + ": bad order");
      have_q = true;
    } else if (key == "memory") {
      if (!(ss >> c.memory_depth)) throw ConfigError(where + ": bad memory");
      have_n = true;
    } else if (key == "taps") {
      double re = 0.0, im = 0.0;
      while (ss >> re) {
        if (!(ss >> im)) throw ConfigError(where + ": dangling real value");
        c.taps.emplace_back(re, im);
      }
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (!have_band || !have_q || !have_n)
    throw ConfigError(path + ": missing sub_band/order/memory");
  validate(c);
  return c;
}

}  // namespace subdpd
