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

#include "subdpd/dpd.hpp"
#include "subdpd/observe.hpp"
#include "test_util.hpp"

using namespace subdpd;

namespace {
constexpr double kFs = 96e6;
constexpr double kFif = 6e6;
}  // namespace

TEST_CASE("tone responses through the observer") {
  ObserverConfig cfg = default_observer({3, +1}, 9, 1e6, kFif);

  SECTION("tone at the sub-band center becomes a constant") {
    const cdouble amp(0.7, -0.4);
    const auto probe = test::tone(3.0 * kFif, kFs, 40000, amp);
    const auto out = observe_sub_band(probe, cfg, kFif);
    for (std::size_t n = 2000; n + 2000 < out.samples.size(); ++n)
      REQUIRE(std::abs(out.samples[n] - amp) < 0.02 * std::abs(amp));
  }
  SECTION("zero input gives zero output") {
    ComplexBasebandSignal z;
    z.sample_rate_hz = kFs;
    z.samples.assign(8192, cdouble(0.0, 0.0));
    const auto out = observe_sub_band(z, cfg, kFif);
    for (const auto& v : out.samples) REQUIRE(v == cdouble(0.0, 0.0));
  }
  SECTION("neighboring sub-band tone is rejected by the stopband") {
    const auto probe = test::tone(5.0 * kFif, kFs, 40000);
    const auto out = observe_sub_band(probe, cfg, kFif);
    const double p_out = mean_power(
        std::span<const cdouble>(out.samples).subspan(2000, 36000));
    REQUIRE(10.0 * std::log10(p_out) <= -cfg.stopband_atten_db);
  }
}

TEST_CASE("observer round-trip recovers an in-band injection") {
  ObserverConfig cfg = default_observer({5, -1}, 9, 1e6, kFif);

  // Band-limited payload: noise filtered well inside the observation band.
  auto payload = test::random_signal(60000, kFs, 5);
  const auto shape = design_lowpass(0.3 * cfg.obs_bandwidth_hz, 80.0,
                                    0.2 * cfg.obs_bandwidth_hz, kFs);
  payload = fir_filter(payload, shape, true);

  ComplexBasebandSignal zero;
  zero.sample_rate_hz = kFs;
  zero.samples.assign(payload.samples.size(), cdouble(0.0, 0.0));
  const auto composed = compose_pa_input(zero, {{SubBandId{5, -1}, payload}}, kFif);
  const auto recovered = observe_sub_band(composed, cfg, kFif);

  REQUIRE(nmse_db(recovered, payload, 4000) <= -60.0);
}

TEST_CASE("observer is linear") {
  ObserverConfig cfg = default_observer({3, +1}, 9, 1e6, kFif);
  const auto a = test::random_signal(20000, kFs, 6);
  const auto b = test::random_signal(20000, kFs, 7);
  ComplexBasebandSignal sum;
  sum.sample_rate_hz = kFs;
  sum.samples.resize(a.samples.size());
  for (std::size_t n = 0; n < sum.samples.size(); ++n)
    sum.samples[n] = a.samples[n] + b.samples[n];

  const auto oa = observe_sub_band(a, cfg, kFif);
  const auto ob = observe_sub_band(b, cfg, kFif);
  const auto os = observe_sub_band(sum, cfg, kFif);
  double worst = 0.0;
  for (std::size_t n = 0; n < os.samples.size(); ++n)
    worst = std::max(worst,
                     std::abs(os.samples[n] - oa.samples[n] - ob.samples[n]));
  REQUIRE(worst < 1e-12);
}

TEST_CASE("decimation subsamples the full-rate observation") {
  ObserverConfig full = default_observer({3, +1}, 9, 1e6, kFif);
  ObserverConfig dec = full;
  dec.decimation = 4;
  const auto sig = test::random_signal(20000, kFs, 8);
  const auto of = observe_sub_band(sig, full, kFif);
  const auto od = observe_sub_band(sig, dec, kFif);
  REQUIRE(od.sample_rate_hz == Catch::Approx(kFs / 4.0));
  for (std::size_t k = 0; k < od.samples.size(); ++k)
    REQUIRE(od.samples[k] == of.samples[4 * k]);
}

TEST_CASE("observer validation") {
  SECTION("sub-band outside Nyquist") {
    ObserverConfig cfg = default_observer({9, +1}, 9, 1e6, kFif);
    ComplexBasebandSignal sig = test::random_signal(4096, 20e6, 9);
    REQUIRE_THROWS_AS(observe_sub_band(sig, cfg, kFif), RateError);
  }
  SECTION("decimated rate below twice the observation bandwidth") {
    ObserverConfig cfg = default_observer({3, +1}, 9, 1e6, kFif);
    cfg.decimation = 16;
    const auto sig = test::random_signal(4096, kFs, 10);
    REQUIRE_THROWS_AS(observe_sub_band(sig, cfg, kFif), RateError);
  }
}

TEST_CASE("streaming observer matches the batch path") {
  ObserverConfig cfg = default_observer({3, +1}, 9, 1e6, kFif);
  const auto sig = test::random_signal(12000, kFs, 11);
  const auto batch = observe_sub_band(sig, cfg, kFif);

  ObserverStream stream(cfg, kFif, kFs, 0);
  const std::size_t g = stream.group_delay();
  // The streaming emission after pushing sample n is the batch output at
  // n - group_delay (the batch path compensates the delay).
  for (std::size_t n = 0; n < sig.samples.size(); ++n) {
    const cdouble w = stream.push(sig.samples[n], n);
    if (n >= g) REQUIRE(std::abs(w - batch.samples[n - g]) < 1e-12);
  }
}
