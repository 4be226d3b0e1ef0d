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
#include <string>
#include <vector>

#include "subdpd/errors.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

/// One intermodulation sub-band: order m (odd, 3..11) and sign of the
/// center frequency sign * m * f_IF.
struct SubBandId {
  int order = 3;
  int sign = +1;  // +1 or -1

  bool operator==(const SubBandId&) const = default;
};

inline void validate(const SubBandId& band) {
  if (band.order < 3 || band.order > 11 || band.order % 2 == 0)
    throw OrderError("sub-band order must be odd and within 3..11");
  if (band.sign != 1 && band.sign != -1)
    throw OrderError("sub-band sign must be +1 or -1");
}

inline std::string to_string(const SubBandId& band) {
  return std::to_string(band.order) + (band.sign > 0 ? "+" : "-");
}

inline SubBandId parse_sub_band(const std::string& text) {
  if (text.size() < 2) throw ConfigError("bad sub-band label: " + text);
  const char sign_ch = text.back();
  if (sign_ch != '+' && sign_ch != '-')
    throw ConfigError("sub-band label must end in + or -: " + text);
  SubBandId band;
  try {
    band.order = std::stoi(text.substr(0, text.size() - 1));
  } catch (const std::exception&) {
    throw ConfigError("bad sub-band label: " + text);
  }
  band.sign = sign_ch == '+' ? 1 : -1;
  validate(band);
  return band;
}

/// Center frequency of the sub-band in the composite baseband.
inline double sub_band_center_hz(const SubBandId& band, double f_if_hz) {
  return static_cast<double>(band.sign) * static_cast<double>(band.order) * f_if_hz;
}

namespace detail {

/// Term coef * |x1|^(2i) * |x2|^(2j) of an envelope polynomial.
struct EnvelopeTerm {
  double coef;
  int i;
  int j;
};

/// Envelope polynomial multiplying the seed term u_{m,m} to form u_{m,p} at
/// a positive IM sub-band. Integer coefficients exactly as printed; a test
/// re-derives every table entry through the brute-force extraction oracle.
inline std::span<const EnvelopeTerm> im_basis_polynomial(int m, int p) {
  static const EnvelopeTerm one[] = {{1, 0, 0}};
  // IM3
  static const EnvelopeTerm m3p5[] = {{2, 1, 0}, {3, 0, 1}};
  static const EnvelopeTerm m3p7[] = {{3, 2, 0}, {6, 0, 2}, {12, 1, 1}};
  static const EnvelopeTerm m3p9[] = {{4, 3, 0}, {10, 0, 3}, {30, 2, 1}, {40, 1, 2}};
  static const EnvelopeTerm m3p11[] = {
      {5, 4, 0}, {15, 0, 4}, {60, 3, 1}, {100, 1, 3}, {150, 2, 2}};
  // IM5
  static const EnvelopeTerm m5p7[] = {{4, 0, 1}, {3, 1, 0}};
  static const EnvelopeTerm m5p9[] = {{10, 0, 2}, {6, 2, 0}, {20, 1, 1}};
  static const EnvelopeTerm m5p11[] = {{20, 0, 3}, {10, 3, 0}, {75, 1, 2}, {60, 2, 1}};
  // IM7
  static const EnvelopeTerm m7p9[] = {{5, 0, 1}, {4, 1, 0}};
  static const EnvelopeTerm m7p11[] = {{15, 0, 2}, {10, 2, 0}, {30, 1, 1}};
  // IM9
  static const EnvelopeTerm m9p11[] = {{6, 0, 1}, {5, 1, 0}};

  if (p == m) return one;
  if (m == 3 && p == 5) return m3p5;
  if (m == 3 && p == 7) return m3p7;
  if (m == 3 && p == 9) return m3p9;
  if (m == 3 && p == 11) return m3p11;
  if (m == 5 && p == 7) return m5p7;
  if (m == 5 && p == 9) return m5p9;
  if (m == 5 && p == 11) return m5p11;
  if (m == 7 && p == 9) return m7p9;
  if (m == 7 && p == 11) return m7p11;
  if (m == 9 && p == 11) return m9p11;
  throw OrderError("no basis polynomial for m=" + std::to_string(m) +
                   ", p=" + std::to_string(p));
}

}  // namespace detail

inline std::size_t basis_column_count(const SubBandId& band, int q_order) {
  return static_cast<std::size_t>((q_order - band.order) / 2 + 1);
}

/// Per-sample static-nonlinear basis evaluator for one sub-band. Negative
/// sub-bands interchange x1 and x2.
class BasisEval {
 public:
  BasisEval(SubBandId band, int q_order) : band_(band), q_(q_order) {
    validate(band_);
    if (q_ < band_.order || q_ % 2 == 0 || q_ > 11)
      throw OrderError("DPD order must be odd, >= sub-band order and <= 11");
    for (int p = band_.order; p <= q_; p += 2)
      tables_.push_back(detail::im_basis_polynomial(band_.order, p));
  }

  std::size_t column_count() const { return tables_.size(); }
  SubBandId sub_band() const { return band_; }
  int q_order() const { return q_; }

  /// Writes u_{m,p}(n) for p = m, m+2, ..., Q into `out`.
  void eval(cdouble x1, cdouble x2, std::span<cdouble> out) const {
    if (out.size() != tables_.size()) throw ShapeError("BasisEval: bad output size");
    const cdouble a = band_.sign > 0 ? x1 : x2;
    const cdouble b = band_.sign > 0 ? x2 : x1;
    const double ea = std::norm(a);
    const double eb = std::norm(b);

    // Seed term (b*)^{(m-1)/2} a^{(m+1)/2}.
    const int half = (band_.order - 1) / 2;
    cdouble seed = a;
    const cdouble cross = std::conj(b) * a;
    for (int k = 0; k < half; ++k) seed *= cross;

    const int max_e = (q_ - band_.order) / 2;
    double pow_a[6], pow_b[6];
    pow_a[0] = pow_b[0] = 1.0;
    for (int k = 1; k <= max_e; ++k) {
      pow_a[k] = pow_a[k - 1] * ea;
      pow_b[k] = pow_b[k - 1] * eb;
    }

    for (std::size_t c = 0; c < tables_.size(); ++c) {
      double mult = 0.0;
      for (const auto& t : tables_[c]) mult += t.coef * pow_a[t.i] * pow_b[t.j];
      out[c] = seed * mult;
    }
  }

 private:
  SubBandId band_;
  int q_;
  std::vector<std::span<const detail::EnvelopeTerm>> tables_;
};

/// Per-sample matrix of SNL basis functions u_{m,p}(n) for one sub-band,
/// columns ordered p = m, m+2, ..., Q.
struct BasisSet {
  SubBandId sub_band;
  int q_order = 3;
  std::vector<cvec> columns;
  double rate_hz = 0.0;
};

/// Lower-triangular orthogonalization transform; diagonal real positive.
struct OrthoTransform {
  std::vector<cvec> rows;  // rows[i] has size i+1

  std::size_t size() const { return rows.size(); }
};

/// Orthonormalized counterpart of a BasisSet: columns s = W u, unit RMS,
/// pairwise sample correlation below 1e-8 on the data W was estimated from.
struct OrthoBasisSet {
  SubBandId sub_band;
  int q_order = 3;
  std::vector<cvec> columns;
  double rate_hz = 0.0;
};

inline BasisSet gen_basis(const ComplexBasebandSignal& x1,
                          const ComplexBasebandSignal& x2, SubBandId band,
                          int q_order) {
  if (x1.samples.size() != x2.samples.size())
    throw ShapeError("gen_basis: CC signals differ in length");
  if (x1.sample_rate_hz != x2.sample_rate_hz)
    throw RateError("gen_basis: CC signals differ in rate");
  BasisEval eval(band, q_order);
  const std::size_t n = x1.samples.size();
  const std::size_t k = eval.column_count();

  BasisSet basis;
  basis.sub_band = band;
  basis.q_order = q_order;
  basis.rate_hz = x1.sample_rate_hz;
  basis.columns.assign(k, cvec(n));
  std::vector<cdouble> row(k);
  for (std::size_t i = 0; i < n; ++i) {
    eval.eval(x1.samples[i], x2.samples[i], row);
    for (std::size_t c = 0; c < k; ++c) basis.columns[c][i] = row[c];
  }
  return basis;
}

namespace detail {

inline cdouble mean_inner(std::span<const cdouble> a, std::span<const cdouble> b) {
  cdouble acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc / static_cast<double>(a.size());
}

inline double rms(std::span<const cdouble> a) {
  return std::sqrt(mean_power(a));
}

}  // namespace detail

/// Applies a frozen transform: s = W u, no re-estimation.
inline OrthoBasisSet apply_transform(const OrthoTransform& w, const BasisSet& basis) {
  if (w.size() != basis.columns.size())
    throw ShapeError("apply_transform: W dimension does not match basis");
  for (std::size_t i = 0; i < w.rows.size(); ++i)
    if (w.rows[i].size() != i + 1)
      throw ShapeError("apply_transform: W is not lower-triangular");

  const std::size_t n = basis.columns.empty() ? 0 : basis.columns[0].size();
  OrthoBasisSet out;
  out.sub_band = basis.sub_band;
  out.q_order = basis.q_order;
  out.rate_hz = basis.rate_hz;
  out.columns.assign(basis.columns.size(), cvec(n, cdouble(0.0, 0.0)));
  for (std::size_t i = 0; i < basis.columns.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const cdouble wij = w.rows[i][j];
      const auto& u = basis.columns[j];
      auto& s = out.columns[i];
      for (std::size_t t = 0; t < n; ++t) s[t] += wij * u[t];
    }
  }
  return out;
}

/// Gram-Schmidt with a reorthogonalization pass, under the mean (per-sample)
/// inner product so columns come out unit-RMS. The returned basis is
/// recomputed as W u, so reapplying W to the same data is bit-identical.
inline std::pair<OrthoBasisSet, OrthoTransform> orthogonalize(const BasisSet& basis) {
  const std::size_t k = basis.columns.size();
  if (k == 0) throw ShapeError("orthogonalize: empty basis");
  const std::size_t n = basis.columns[0].size();
  for (const auto& c : basis.columns)
    if (c.size() != n) throw ShapeError("orthogonalize: ragged columns");

  std::vector<cvec> s;  // working orthonormal columns
  s.reserve(k);
  OrthoTransform w;
  w.rows.reserve(k);

  for (std::size_t i = 0; i < k; ++i) {
    cvec v = basis.columns[i];
    cvec row(i + 1, cdouble(0.0, 0.0));
    row[i] = cdouble(1.0, 0.0);
    const double rms_in = detail::rms(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const cdouble c = detail::mean_inner(s[j], v);
        for (std::size_t t = 0; t < n; ++t) v[t] -= c * s[j][t];
        for (std::size_t t = 0; t <= j; ++t) row[t] -= c * w.rows[j][t];
      }
    }
    const double r = detail::rms(v);
    if (!(r > 1e-12 * rms_in))
      throw DegenerateBasisError("orthogonalize: column " + std::to_string(i) +
                                 " is linearly dependent");
    const double inv = 1.0 / r;
    for (auto& x : v) x *= inv;
    for (auto& x : row) x *= inv;
    s.push_back(std::move(v));
    w.rows.push_back(std::move(row));
  }

  return {apply_transform(w, basis), std::move(w)};
}

}  // namespace subdpd
