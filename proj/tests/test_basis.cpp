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

#include <catch2/catch_amalgamated.hpp>

#include "subdpd/basis.hpp"
#include "test_util.hpp"

using namespace subdpd;

namespace {

ComplexBasebandSignal constant_signal(cdouble value, std::size_t n = 64) {
  ComplexBasebandSignal sig;
  sig.sample_rate_hz = 1e6;
  sig.samples.assign(n, value);
  return sig;
}

double normalized_corr(const cvec& a, const cvec& b) {
  cdouble xc(0.0, 0.0);
  double pa = 0.0, pb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    xc += std::conj(a[i]) * b[i];
    pa += std::norm(a[i]);
    pb += std::norm(b[i]);
  }
  return std::abs(xc) / std::sqrt(pa * pb);
}

/// Independent modified-Gram-Schmidt oracle with a reorthogonalization pass,
/// kept free of the library's transform bookkeeping.
std::vector<cvec> mgs_oracle(const std::vector<cvec>& cols) {
  std::vector<cvec> s;
  const double n = static_cast<double>(cols[0].size());
  for (const auto& col : cols) {
    cvec v = col;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : s) {
        cdouble c(0.0, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) c += std::conj(q[i]) * v[i];
        c /= n;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
      }
    }
    double p = 0.0;
    for (const auto& x : v) p += std::norm(x);
    const double rms = std::sqrt(p / n);
    for (auto& x : v) x /= rms;
    s.push_back(std::move(v));
  }
  return s;
}

}  // namespace

TEST_CASE("sub-band labels parse and validate") {
  REQUIRE(parse_sub_band("3+") == SubBandId{3, +1});
  REQUIRE(parse_sub_band("11-") == SubBandId{11, -1});
  REQUIRE(to_string(SubBandId{5, -1}) == "5-");
  REQUIRE_THROWS_AS(parse_sub_band("4+"), OrderError);
  REQUIRE_THROWS_AS(parse_sub_band("13+"), OrderError);
  REQUIRE_THROWS_AS(parse_sub_band("x"), ConfigError);
}

TEST_CASE("basis columns match the printed closed forms on constants") {
  SECTION("x1 = x2 = 1, IM3+, Q = 7") {
    const auto b = gen_basis(constant_signal({1, 0}), constant_signal({1, 0}),
                             {3, +1}, 7);
    REQUIRE(b.columns.size() == 3);
    REQUIRE(b.columns[0][10] == cdouble(1.0, 0.0));    // u3
    REQUIRE(b.columns[1][10] == cdouble(5.0, 0.0));    // 2 + 3
    REQUIRE(b.columns[2][10] == cdouble(21.0, 0.0));   // 3 + 6 + 12
  }
  SECTION("x1 = 2, x2 = 1, IM5+, Q = 7") {
    const auto b = gen_basis(constant_signal({2, 0}), constant_signal({1, 0}),
                             {5, +1}, 7);
    REQUIRE(b.columns.size() == 2);
    REQUIRE(b.columns[0][5] == cdouble(8.0, 0.0));     // 1^2 * 2^3
    REQUIRE(b.columns[1][5] == cdouble(128.0, 0.0));   // 8 * (4*1 + 3*4)
  }
  SECTION("x1 = x2 = 1: seed values for every sub-band at Q = 11") {
    // The p = m column is 1 and the envelope polynomial sums the printed
    // integer coefficients.
    struct Case {
      int m;
      std::vector<double> expect;
    };
    const std::vector<Case> cases{
        {3, {1, 5, 21, 84, 330}},
        {5, {1, 7, 36, 165}},
        {7, {1, 9, 55}},
        {9, {1, 11}},
        {11, {1}},
    };
    for (const auto& c : cases) {
      const auto b = gen_basis(constant_signal({1, 0}), constant_signal({1, 0}),
                               {c.m, +1}, 11);
      REQUIRE(b.columns.size() == c.expect.size());
      for (std::size_t i = 0; i < c.expect.size(); ++i)
        REQUIRE(b.columns[i][3] == cdouble(c.expect[i], 0.0));
    }
  }
}

TEST_CASE("silent second carrier kills every basis column") {
  const auto x1 = test::random_signal(256, 1e6, 3);
  const auto x2 = constant_signal({0, 0}, 256);
  for (int m : {3, 5, 7, 9, 11}) {
    const auto b = gen_basis(x1, x2, {m, +1}, 11);
    for (const auto& col : b.columns)
      for (const auto& v : col) REQUIRE(v == cdouble(0.0, 0.0));
  }
}

TEST_CASE("order validation") {
  const auto x = test::random_signal(64, 1e6, 1);
  REQUIRE_THROWS_AS(gen_basis(x, x, {5, +1}, 3), OrderError);
  REQUIRE_THROWS_AS(gen_basis(x, x, {3, +1}, 4), OrderError);
  REQUIRE_THROWS_AS(gen_basis(x, x, {3, +1}, 13), OrderError);
}

TEST_CASE("negative sub-band equals interchanging the carriers") {
  const auto x1 = test::random_signal(512, 1e6, 10);
  const auto x2 = test::random_signal(512, 1e6, 20);
  for (int m : {3, 5, 7}) {
    const auto neg = gen_basis(x1, x2, {m, -1}, 11);
    const auto pos_swapped = gen_basis(x2, x1, {m, +1}, 11);
    REQUIRE(neg.columns == pos_swapped.columns);
  }
}

TEST_CASE("degree homogeneity: scaling both inputs by a scales column p by a^p") {
  const auto x1 = test::random_signal(256, 1e6, 30);
  const auto x2 = test::random_signal(256, 1e6, 31);
  const double a = 1.37;
  ComplexBasebandSignal x1s = x1, x2s = x2;
  for (auto& v : x1s.samples) v *= a;
  for (auto& v : x2s.samples) v *= a;

  const auto base = gen_basis(x1, x2, {3, +1}, 11);
  const auto scaled = gen_basis(x1s, x2s, {3, +1}, 11);
  for (std::size_t c = 0; c < base.columns.size(); ++c) {
    const int p = 3 + 2 * static_cast<int>(c);
    const double factor = std::pow(a, p);
    for (std::size_t i = 0; i < base.columns[c].size(); ++i) {
      REQUIRE(std::abs(scaled.columns[c][i] - factor * base.columns[c][i]) <=
              1e-12 * std::abs(factor * base.columns[c][i]) + 1e-300);
    }
  }
}

TEST_CASE("orthogonalization") {
  SECTION("single column of RMS 2 gives W = [0.5] and a unit-RMS column") {
    BasisSet b;
    b.sub_band = {3, +1};
    b.q_order = 3;
    b.rate_hz = 1e6;
    b.columns = {cvec(100, cdouble(2.0, 0.0))};
    const auto [s, w] = orthogonalize(b);
    REQUIRE(w.rows.size() == 1);
    REQUIRE(std::abs(w.rows[0][0] - cdouble(0.5, 0.0)) < 1e-15);
    REQUIRE(std::sqrt(mean_power(std::span<const cdouble>(s.columns[0]))) ==
            Catch::Approx(1.0).epsilon(1e-12));
  }
  SECTION("duplicated column is degenerate") {
    const auto x = test::random_signal(300, 1e6, 4);
    BasisSet b;
    b.sub_band = {3, +1};
    b.q_order = 5;
    b.rate_hz = 1e6;
    b.columns = {x.samples, x.samples};
    REQUIRE_THROWS_AS(orthogonalize(b), DegenerateBasisError);
  }
  SECTION("five-column basis: orthonormal and matching the MGS oracle") {
    const auto x1 = test::random_signal(4000, 1e6, 40);
    const auto x2 = test::random_signal(4000, 1e6, 41);
    const auto b = gen_basis(x1, x2, {3, +1}, 11);
    const auto [s, w] = orthogonalize(b);

    REQUIRE(w.rows.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      REQUIRE(w.rows[i].size() == i + 1);
      REQUIRE(w.rows[i][i].imag() == 0.0);
      REQUIRE(w.rows[i][i].real() > 0.0);
      REQUIRE(std::sqrt(mean_power(std::span<const cdouble>(s.columns[i]))) ==
              Catch::Approx(1.0).epsilon(1e-10));
      for (std::size_t j = 0; j < i; ++j)
        REQUIRE(normalized_corr(s.columns[i], s.columns[j]) <= 1e-8);
    }

    const auto oracle = mgs_oracle(b.columns);
    for (std::size_t i = 0; i < 5; ++i)
      REQUIRE(nmse_db(std::span<const cdouble>(s.columns[i]),
                      std::span<const cdouble>(oracle[i])) < -120.0);
  }
}

TEST_CASE("apply_transform") {
  const auto x1 = test::random_signal(2000, 1e6, 50);
  const auto x2 = test::random_signal(2000, 1e6, 51);
  const auto b = gen_basis(x1, x2, {3, +1}, 9);

  SECTION("identity transform reproduces the basis") {
    OrthoTransform eye;
    for (std::size_t i = 0; i < b.columns.size(); ++i) {
      cvec row(i + 1, cdouble(0.0, 0.0));
      row[i] = cdouble(1.0, 0.0);
      eye.rows.push_back(row);
    }
    const auto s = apply_transform(eye, b);
    REQUIRE(s.columns == b.columns);
  }
  SECTION("reapplying the estimated W to the same data is bit-identical") {
    const auto [s, w] = orthogonalize(b);
    const auto s2 = apply_transform(w, b);
    REQUIRE(s.columns == s2.columns);
  }
  SECTION("frozen W stays near-orthogonal on a fresh block") {
    const auto [s, w] = orthogonalize(b);
    const auto y1 = test::random_signal(2000, 1e6, 60);
    const auto y2 = test::random_signal(2000, 1e6, 61);
    const auto fresh = apply_transform(w, gen_basis(y1, y2, {3, +1}, 9));
    for (std::size_t i = 0; i < fresh.columns.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        REQUIRE(normalized_corr(fresh.columns[i], fresh.columns[j]) <= 1e-2);
  }
  SECTION("dimension mismatch is rejected") {
    const auto [s, w] = orthogonalize(b);
    const auto small = gen_basis(x1, x2, {3, +1}, 5);
    REQUIRE_THROWS_AS(apply_transform(w, small), ShapeError);
  }
}

TEST_CASE("span preservation: projections agree between u and s bases") {
  const auto x1 = test::random_signal(3000, 1e6, 70);
  const auto x2 = test::random_signal(3000, 1e6, 71);
  const auto b = gen_basis(x1, x2, {3, +1}, 11);
  const auto [s, w] = orthogonalize(b);

  // Target: an arbitrary mix of the columns plus something outside the span.
  cvec target(3000);
  Rng rng(72);
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = b.columns[0][i] * cdouble(0.3, -0.2) +
                b.columns[3][i] * cdouble(-0.05, 0.07) + rng.complex_gaussian();

  // Projection onto the orthonormal columns is a plain correlation sum.
  auto project_ortho = [&](const std::vector<cvec>& cols) {
    cvec proj(target.size(), cdouble(0.0, 0.0));
    const double n = static_cast<double>(target.size());
    for (const auto& col : cols) {
      cdouble c(0.0, 0.0);
      for (std::size_t i = 0; i < target.size(); ++i)
        c += std::conj(col[i]) * target[i];
      c /= n;
      for (std::size_t i = 0; i < target.size(); ++i) proj[i] += c * col[i];
    }
    return proj;
  };

  // Projection onto the raw columns via the normal equations (small dense
  // Hermitian solve by Gaussian elimination).
  auto project_raw = [&](const std::vector<cvec>& cols) {
    const std::size_t k = cols.size();
    std::vector<std::vector<cdouble>> g(k, std::vector<cdouble>(k + 1));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        cdouble acc(0.0, 0.0);
        for (std::size_t t = 0; t < target.size(); ++t)
          acc += std::conj(cols[i][t]) * cols[j][t];
        g[i][j] = acc;
      }
      cdouble rhs(0.0, 0.0);
      for (std::size_t t = 0; t < target.size(); ++t)
        rhs += std::conj(cols[i][t]) * target[t];
      g[i][k] = rhs;
    }
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r)
        if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
      std::swap(g[col], g[piv]);
      for (std::size_t r = 0; r < k; ++r) {
        if (r == col) continue;
        const cdouble f = g[r][col] / g[col][col];
        for (std::size_t cc = col; cc <= k; ++cc) g[r][cc] -= f * g[col][cc];
      }
    }
    cvec proj(target.size(), cdouble(0.0, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
      const cdouble c = g[i][k] / g[i][i];
      for (std::size_t t = 0; t < target.size(); ++t) proj[t] += c * cols[i][t];
    }
    return proj;
  };

  const cvec p_s = project_ortho(s.columns);
  const cvec p_u = project_raw(b.columns);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    err += std::norm(p_s[i] - p_u[i]);
    scale += std::norm(p_u[i]);
  }
  REQUIRE(std::sqrt(err / scale) < 1e-10);
}
