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

#include "subdpd/signal.hpp"

namespace subdpd::detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place iterative radix-2 complex FFT. Size must be a power of two.
/// The inverse transform includes the 1/n scaling. No shared state, so
/// concurrent calls from different threads are safe.
inline void fft_radix2(cvec& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_radix2: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const cdouble wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cdouble u = a[i + k];
        const cdouble v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }

  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= s;
  }
}

/// Full linear convolution, length a+b-1. Switches to FFT when the direct
/// product of lengths gets large; the cutover changes only rounding at the
/// 1e-15 level, never semantics.
template <typename TapT>
cvec convolve_full(std::span<const cdouble> a, std::span<const TapT> b) {
  if (a.empty() || b.empty()) throw ShapeError("convolve_full: empty operand");
  const std::size_t out_len = a.size() + b.size() - 1;

  if (a.size() * b.size() <= (1u << 22)) {
    cvec out(out_len, cdouble(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const cdouble ai = a[i];
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
    }
    return out;
  }

  const std::size_t nfft = next_pow2(out_len);
  cvec fa(nfft, cdouble(0.0, 0.0));
  cvec fb(nfft, cdouble(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t j = 0; j < b.size(); ++j) fb[j] = cdouble(b[j]);
  fft_radix2(fa, false);
  fft_radix2(fb, false);
  for (std::size_t i = 0; i < nfft; ++i) fa[i] *= fb[i];
  fft_radix2(fa, true);
  fa.resize(out_len);
  return fa;
}

}  // namespace subdpd::detail
