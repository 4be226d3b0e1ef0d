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
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "subdpd/errors.hpp"

namespace subdpd {

using cdouble = std::complex<double>;
using cvec = std::vector<cdouble>;

/// Uniformly sampled complex envelope with an explicit sample rate. The
/// universal signal carrier of the library.
struct ComplexBasebandSignal {
  cvec samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
};

inline bool all_finite(std::span<const cdouble> v) {
  for (const auto& s : v) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
  }
  return true;
}

inline void validate(const ComplexBasebandSignal& sig) {
  if (!(sig.sample_rate_hz > 0.0))
    throw std::invalid_argument("signal sample rate must be positive");
  if (sig.samples.empty())
    throw std::invalid_argument("signal must contain at least one sample");
  if (!all_finite(sig.samples))
    throw std::invalid_argument("signal contains non-finite samples");
}

inline double mean_power(std::span<const cdouble> v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : v) acc += std::norm(s);
  return acc / static_cast<double>(v.size());
}

inline double mean_power(const ComplexBasebandSignal& sig) {
  return mean_power(std::span<const cdouble>(sig.samples));
}

/// Unit-magnitude carrier sample e^{j 2 pi (f/fs) n}, phase referenced to
/// n = 0. The phase argument is reduced modulo one cycle before sin/cos so
/// accuracy does not degrade with the sample index.
inline cdouble tone_sample(double f_hz, double fs_hz, std::size_t n) {
  const double cycles = std::fmod((f_hz / fs_hz) * static_cast<double>(n), 1.0);
  const double phi = 2.0 * M_PI * cycles;
  return {std::cos(phi), std::sin(phi)};
}

/// out(n) = in(n) e^{j 2 pi f_shift n / fs}.
inline ComplexBasebandSignal frequency_shift(const ComplexBasebandSignal& sig,
                                             double f_shift_hz) {
  if (!(std::abs(f_shift_hz) < sig.sample_rate_hz / 2.0))
    throw RateError("frequency shift aliases: |f_shift| must be < fs/2");
  ComplexBasebandSignal out;
  out.sample_rate_hz = sig.sample_rate_hz;
  out.samples.resize(sig.samples.size());
  for (std::size_t n = 0; n < sig.samples.size(); ++n)
    out.samples[n] = sig.samples[n] * tone_sample(f_shift_hz, sig.sample_rate_hz, n);
  return out;
}

/// 10 log10(sum|a-b|^2 / sum|b|^2), skipping `skip` samples at both ends.
inline double nmse_db(std::span<const cdouble> a, std::span<const cdouble> b,
                      std::size_t skip = 0) {
  if (a.size() != b.size()) throw ShapeError("nmse_db: length mismatch");
  if (a.size() <= 2 * skip) throw ShapeError("nmse_db: nothing left after skip");
  double err = 0.0, ref = 0.0;
  for (std::size_t n = skip; n < a.size() - skip; ++n) {
    err += std::norm(a[n] - b[n]);
    ref += std::norm(b[n]);
  }
  if (ref == 0.0) return err == 0.0 ? -400.0 : 400.0;
  if (err == 0.0) return -400.0;
  return 10.0 * std::log10(err / ref);
}

inline double nmse_db(const ComplexBasebandSignal& a,
                      const ComplexBasebandSignal& b, std::size_t skip = 0) {
  return nmse_db(std::span<const cdouble>(a.samples),
                 std::span<const cdouble>(b.samples), skip);
}

inline ComplexBasebandSignal slice(const ComplexBasebandSignal& sig,
                                   std::size_t start, std::size_t count) {
  if (start + count > sig.samples.size())
    throw ShapeError("slice: range out of bounds");
  ComplexBasebandSignal out;
  out.sample_rate_hz = sig.sample_rate_hz;
  out.samples.assign(sig.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     sig.samples.begin() + static_cast<std::ptrdiff_t>(start + count));
  return out;
}

}  // namespace subdpd
