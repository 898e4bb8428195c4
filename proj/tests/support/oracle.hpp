// Copyright 2026 The mrqc Authors
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

// Brute-force reference evaluation of the slice measures, written directly
// from the formulas with no shared code: plain loops, full sorts, two-pass
// moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mrqc/measures.hpp"

namespace mrqc::oracle {

struct Grid {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;
  double operator()(long r, long c) const {
    r = std::clamp<long>(r, 0, static_cast<long>(rows) - 1);
    c = std::clamp<long>(c, 0, static_cast<long>(cols) - 1);
    return v[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
  }
};

inline double mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double pop_sd(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

inline std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

inline std::vector<double> window(const Grid& g, std::size_t r0, std::size_t c0) {
  std::vector<double> out;
  for (std::size_t r = r0; r < r0 + 5; ++r)
    for (std::size_t c = c0; c < c0 + 5; ++c) out.push_back(g.v[r * g.cols + c]);
  return out;
}

inline MeasureValues evaluate(const Grid& g, const std::vector<std::uint8_t>& mask, const PatchPair& patches) {
  MeasureValues out;
  std::vector<double> F, B;
  for (std::size_t p = 0; p < g.v.size(); ++p) (mask[p] ? F : B).push_back(g.v[p]);
  const double muF = mean(F), sdF = pop_sd(F);

  out[0] = muF;
  out[1] = *std::max_element(F.begin(), F.end()) - *std::min_element(F.begin(), F.end());
  if (F.size() >= 2) {
    out[2] = sdF * sdF;
    out[3] = ratio(sdF, muF);
  }

  double lap = 0;
  double se = 0, fmax = -1e300;
  for (long r = 0; r < static_cast<long>(g.rows); ++r) {
    for (long c = 0; c < static_cast<long>(g.cols); ++c) {
      if (!mask[static_cast<std::size_t>(r) * g.cols + static_cast<std::size_t>(c)]) continue;
      double resp = 8.0 * g(r, c);
      for (long dr = -1; dr <= 1; ++dr)
        for (long dc = -1; dc <= 1; ++dc)
          if (dr || dc) resp -= g(r + dr, c + dc);
      lap += resp / 8.0;
      std::vector<double> nb;
      for (long dr = -2; dr <= 2; ++dr)
        for (long dc = -2; dc <= 2; ++dc) nb.push_back(g(r + dr, c + dc));
      const double diff = g(r, c) - median(nb);
      se += diff * diff;
      fmax = std::max(fmax, g(r, c));
    }
  }
  out[4] = lap / static_cast<double>(F.size());
  const double mse = se / static_cast<double>(F.size());
  if (mse > 0) out[5] = 10.0 * std::log10(fmax * fmax / mse);

  std::optional<std::vector<double>> FP, BP;
  if (patches.foreground) FP = window(g, patches.foreground->row, patches.foreground->col);
  if (patches.background) BP = window(g, patches.background->row, patches.background->col);
  const std::optional<double> sdB = B.size() ? std::optional<double>(pop_sd(B)) : std::nullopt;

  if (sdB) out[6] = ratio(sdF, *sdB);
  if (FP && sdB) out[7] = ratio(mean(*FP), *sdB);
  if (FP) {
    std::vector<double> centred;
    const double m = mean(*FP);
    for (double v : *FP) centred.push_back(v - m);
    out[8] = ratio(m, pop_sd(centred));
  }
  if (FP && BP) out[9] = ratio(mean(*FP), pop_sd(*BP));
  if (FP && BP) {
    std::vector<double> d;
    for (std::size_t i = 0; i < 25; ++i) d.push_back((*FP)[i] - (*BP)[i]);
    out[10] = ratio(mean(d), pop_sd(*BP));
  }
  if (FP) out[11] = ratio(pop_sd(*FP), mean(*FP));
  if (!B.empty()) {
    const double gap = std::abs(muF - mean(B));
    out[12] = ratio(sdF + *sdB, gap);
  }

  double energy = 0;
  for (double v : g.v) energy += v * v;
  if (energy > 0) {
    const double norm = std::sqrt(energy);
    double E = 0;
    for (double v : g.v) {
      const double x = std::abs(v) / norm;
      if (x > 0) E -= x * std::log(x);
    }
    const double nm = static_cast<double>(g.v.size());
    if (E > 0) out[13] = nm / std::sqrt(nm) * std::log(E / std::sqrt(nm));
  }
  if (!B.empty()) {
    std::vector<double> f2, b2;
    for (double v : F) f2.push_back(v * v);
    for (double v : B) b2.push_back(v * v);
    out[14] = ratio(median(f2), median(b2));
  }
  return out;
}

}  // namespace mrqc::oracle
