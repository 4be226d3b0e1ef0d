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
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "subdpd/basis.hpp"
#include "subdpd/errors.hpp"
#include "subdpd/fir.hpp"
#include "subdpd/signal.hpp"

namespace subdpd {

/// Parallel Hammerstein PA: odd-order monomial nonlinearities, one FIR
/// branch filter per order. y(n) = sum_p f_{p,n} * (|x|^{p-1} x)(n).
struct PhModel {
  int order = 1;                  // P, odd
  std::map<int, cvec> branches;   // odd p -> taps f_{p,n}
};

inline void validate(const PhModel& model) {
  if (model.order < 1 || model.order % 2 == 0)
    throw OrderError("PH order must be odd and positive");
  if (!model.branches.count(1)) throw OrderError("PH model must have branch 1");
  for (const auto& [p, taps] : model.branches) {
    if (p < 1 || p % 2 == 0 || p > model.order)
      throw OrderError("PH branch order " + std::to_string(p) + " out of range");
    if (taps.empty()) throw ShapeError("PH branch " + std::to_string(p) + " has no taps");
    if (!all_finite(taps))
      throw std::invalid_argument("PH branch taps must be finite");
  }
}

/// Memoryless polynomial special case, y = f1 x + f3 |x|^2 x + f5 |x|^4 x.
struct MemorylessPoly {
  cdouble f1{1.0, 0.0};
  cdouble f3{0.0, 0.0};
  cdouble f5{0.0, 0.0};
};

inline void validate(const MemorylessPoly& model) {
  if (model.f1 == cdouble(0.0, 0.0))
    throw std::invalid_argument("memoryless PA needs f1 != 0");
}

inline PhModel to_ph(const MemorylessPoly& model) {
  validate(model);
  PhModel ph;
  ph.order = model.f5 != cdouble(0.0, 0.0) ? 5 : (model.f3 != cdouble(0.0, 0.0) ? 3 : 1);
  ph.branches[1] = {model.f1};
  if (model.f3 != cdouble(0.0, 0.0) || model.f5 != cdouble(0.0, 0.0))
    ph.branches[3] = {model.f3};
  if (model.f5 != cdouble(0.0, 0.0)) ph.branches[5] = {model.f5};
  return ph;
}

/// First samples of any branch output that still see zero pre-history;
/// excluded from metrics by callers.
inline std::size_t transient_length(const PhModel& model) {
  std::size_t max_taps = 1;
  for (const auto& [p, taps] : model.branches) max_taps = std::max(max_taps, taps.size());
  return max_taps - 1;
}

inline ComplexBasebandSignal ph_apply(const PhModel& model,
                                      const ComplexBasebandSignal& x) {
  validate(model);
  const std::size_t n = x.samples.size();
  ComplexBasebandSignal y;
  y.sample_rate_hz = x.sample_rate_hz;
  y.samples.assign(n, cdouble(0.0, 0.0));

  cvec v(n);
  for (const auto& [p, taps] : model.branches) {
    const int half = (p - 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::norm(x.samples[i]);
      double m = 1.0;
      for (int k = 0; k < half; ++k) m *= e;
      v[i] = x.samples[i] * m;
    }
    const cvec branch_out = detail::convolve_full(std::span<const cdouble>(v),
                                                  std::span<const cdouble>(taps));
    for (std::size_t i = 0; i < n; ++i) y.samples[i] += branch_out[i];
  }
  return y;
}

inline ComplexBasebandSignal memoryless_apply(const MemorylessPoly& model,
                                              const ComplexBasebandSignal& x) {
  validate(model);
  ComplexBasebandSignal y;
  y.sample_rate_hz = x.sample_rate_hz;
  y.samples.resize(x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    const cdouble s = x.samples[i];
    const double e = std::norm(s);
    y.samples[i] = model.f1 * s + model.f3 * e * s + model.f5 * e * e * s;
  }
  return y;
}

/// Streaming PH evaluation with persistent branch filter state, for
/// closed-loop block processing.
class PhStream {
 public:
  explicit PhStream(const PhModel& model) {
    validate(model);
    for (const auto& [p, taps] : model.branches)
      branches_.emplace_back((p - 1) / 2, FirStream<cdouble>(taps));
  }

  cdouble push(cdouble x) {
    const double e = std::norm(x);
    cdouble y(0.0, 0.0);
    for (auto& [half, fir] : branches_) {
      double m = 1.0;
      for (int k = 0; k < half; ++k) m *= e;
      y += fir.push(x * m);
    }
    return y;
  }

 private:
  std::vector<std::pair<int, FirStream<cdouble>>> branches_;
};

/// Branch taps spun to a sub-band: f_p(k) e^{-j 2 pi sign m f_IF k / fs}.
inline cvec modulated_branch_taps(const cvec& taps, const SubBandId& band,
                                  double f_if_hz, double f_s) {
  cvec out(taps.size());
  const double f = sub_band_center_hz(band, f_if_hz);
  for (std::size_t k = 0; k < taps.size(); ++k)
    out[k] = taps[k] * tone_sample(-f, f_s, k);
  return out;
}

/// Band-limiting filter geometry for one sub-band. The nominal passband is
/// P (or Q) times the wider CC bandwidth; it is clipped to 80% of the
/// 2 f_IF inter-sub-band spacing when that rule would overlap the neighbor,
/// and the clip is recorded.
struct SubBandFilterSpec {
  double passband_hz = 0.0;    // full width
  double transition_hz = 0.0;  // width from passband edge to stopband edge
  double stopband_atten_db = 80.0;
  bool clipped = false;
};

inline SubBandFilterSpec sub_band_filter_spec(int order, double wider_cc_bw_hz,
                                              double f_if_hz,
                                              double stopband_atten_db = 80.0) {
  const double nominal = static_cast<double>(order) * wider_cc_bw_hz;
  const double clip_limit = 0.8 * (2.0 * f_if_hz);
  SubBandFilterSpec spec;
  spec.clipped = nominal > clip_limit;
  spec.passband_hz = spec.clipped ? clip_limit : nominal;
  spec.transition_hz = 2.0 * f_if_hz - spec.passband_hz;
  spec.stopband_atten_db = stopband_atten_db;
  return spec;
}

inline std::vector<double> design_sub_band_lowpass(const SubBandFilterSpec& spec,
                                                   double f_s) {
  return design_lowpass(spec.passband_hz / 2.0, spec.stopband_atten_db,
                        spec.transition_hz, f_s);
}

/// Baseband-equivalent branch responses f_{m(sign),p,n} for p >= m. For a
/// single-tap branch the response is frequency-flat and returned as-is;
/// longer branches get the modulated taps convolved with the band-limiting
/// lowpass (delay-compensated).
inline std::map<int, cvec> sub_band_branch_response(const PhModel& model,
                                                    const SubBandId& band,
                                                    double f_if_hz, double f_s,
                                                    const SubBandFilterSpec& spec) {
  validate(model);
  validate(band);
  if (band.order > model.order)
    throw BandError("sub-band order exceeds PA order");

  std::map<int, cvec> result;
  std::vector<double> lpf;  // designed lazily, many fixtures are single-tap
  for (const auto& [p, taps] : model.branches) {
    if (p < band.order) continue;
    cvec mod = modulated_branch_taps(taps, band, f_if_hz, f_s);
    if (mod.size() == 1) {
      result[p] = std::move(mod);
      continue;
    }
    if (lpf.empty()) lpf = design_sub_band_lowpass(spec, f_s);
    const cvec full = detail::convolve_full(std::span<const cdouble>(mod),
                                            std::span<const double>(lpf));
    const std::size_t shift = (lpf.size() - 1) / 2;
    result[p] = cvec(full.begin() + static_cast<std::ptrdiff_t>(shift), full.end());
  }
  return result;
}

/// Model-side prediction of the PA output at one sub-band:
/// y_{IMm}(n) = sum_p f_{m,p,n} * u_{m,p}(n). The band-limiting lowpass is
/// applied once to the branch sum, which is algebraically identical to
/// filtering each branch response.
inline ComplexBasebandSignal sub_band_output_oracle(const PhModel& model,
                                                    const ComplexBasebandSignal& x1,
                                                    const ComplexBasebandSignal& x2,
                                                    const SubBandId& band,
                                                    double f_if_hz,
                                                    const SubBandFilterSpec& spec) {
  validate(model);
  validate(band);
  if (band.order > model.order)
    throw BandError("sub-band order exceeds PA order");

  const std::size_t n = x1.samples.size();
  const double f_s = x1.sample_rate_hz;
  ComplexBasebandSignal acc;
  acc.sample_rate_hz = f_s;
  acc.samples.assign(n, cdouble(0.0, 0.0));

  const BasisSet basis = gen_basis(x1, x2, band, model.order);
  for (const auto& [p, taps] : model.branches) {
    if (p < band.order) continue;
    const cvec mod = modulated_branch_taps(taps, band, f_if_hz, f_s);
    const std::size_t col = static_cast<std::size_t>((p - band.order) / 2);
    const cvec contrib = detail::convolve_full(
        std::span<const cdouble>(basis.columns[col]), std::span<const cdouble>(mod));
    for (std::size_t i = 0; i < n; ++i) acc.samples[i] += contrib[i];
  }

  const std::vector<double> lpf = design_sub_band_lowpass(spec, f_s);
  return fir_filter(acc, lpf, /*compensate_delay=*/true);
}

// -------------------------------------------------------------------------
// PH model fixture files: plain text, '#' comments, one `order` line and one
// `branch <p>` line per branch carrying real/imag tap pairs.

inline void save_ph_model(const std::string& path, const PhModel& model) {
  validate(model);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write PH model file: " + path);
  out << "# subdpd parallel-Hammerstein PA model\n";
  out << "order " << model.order << "\n";
  char buf[64];
  for (const auto& [p, taps] : model.branches) {
    out << "branch " << p;
    for (const auto& t : taps) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g", t.real(), t.imag());
      out << buf;
    }
    out << "\n";
  }
}

inline PhModel load_ph_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open PH model file: " + path);
  PhModel model;
  model.order = 0;
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
    if (key == "order") {
      if (!(ss >> model.order)) throw ConfigError(where + ": bad order line");
    } else if (key == "branch") {
      int p = 0;
      if (!(ss >> p)) throw ConfigError(where + ": bad branch order");
      cvec taps;
      double re = 0.0, im = 0.0;
      while (ss >> re) {
        if (!(ss >> im)) throw ConfigError(where + ": dangling real value");
        taps.emplace_back(re, im);
      }
      if (taps.empty()) throw ConfigError(where + ": branch has no taps");
      if (model.branches.count(p)) throw ConfigError(where + ": duplicate branch");
      model.branches[p] = std::move(taps);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (model.order == 0) throw ConfigError(path + ": missing order line");
  validate(model);
  return model;
}

}  // namespace subdpd
