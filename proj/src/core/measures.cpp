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

#include "mrqc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrqc/random.hpp"

namespace mrqc {
namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Population SD; exactly zero for a constant sample.
double sd_of(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

std::optional<double> ratio(double numerator, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  const double r = numerator / denominator;
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

std::size_t clamp_index(std::ptrdiff_t v, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

/// Summed-area table over a 0/1 indicator, (rows+1) x (cols+1).
std::vector<std::uint32_t> integral(std::span<const std::uint8_t> mask, std::size_t rows, std::size_t cols,
                                    std::uint8_t wanted) {
  std::vector<std::uint32_t> s((rows + 1) * (cols + 1), 0);
  for (std::size_t i = 0; i < rows; ++i) {
    std::uint32_t row_sum = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      row_sum += mask[i * cols + j] == wanted;
      s[(i + 1) * (cols + 1) + j + 1] = s[i * (cols + 1) + j + 1] + row_sum;
    }
  }
  return s;
}

std::optional<Patch> draw_patch(Engine& engine, const std::vector<std::uint32_t>& table, std::size_t rows,
                                std::size_t cols) {
  if (rows < kPatchSize || cols < kPatchSize) return std::nullopt;
  const std::size_t w = cols + 1;
  for (int attempt = 0; attempt < kPatchAttempts; ++attempt) {
    const std::size_t r = uniform_index(engine, rows - kPatchSize + 1);
    const std::size_t c = uniform_index(engine, cols - kPatchSize + 1);
    const std::size_t r1 = r + kPatchSize, c1 = c + kPatchSize;
    const auto inside = table[r1 * w + c1] - table[r * w + c1] - table[r1 * w + c] + table[r * w + c];
    if (inside == kPatchSize * kPatchSize) return Patch{r, c};
  }
  return std::nullopt;
}

}  // namespace

PatchPair sample_patches(const SliceView& slice, std::span<const std::uint8_t> mask, std::uint64_t seed) {
  Engine engine(seed);
  PatchPair out;
  out.foreground = draw_patch(engine, integral(mask, slice.rows, slice.cols, 1), slice.rows, slice.cols);
  out.background = draw_patch(engine, integral(mask, slice.rows, slice.cols, 0), slice.rows, slice.cols);
  return out;
}

std::vector<double> patch_values(const SliceView& slice, const Patch& patch) {
  std::vector<double> out;
  out.reserve(kPatchSize * kPatchSize);
  for (std::size_t i = 0; i < kPatchSize; ++i) {
    for (std::size_t j = 0; j < kPatchSize; ++j) out.push_back(slice.at(patch.row + i, patch.col + j));
  }
  return out;
}

FirstOrder first_order(std::span<const double> f) {
  if (f.empty()) throw DegenerateInput("first_order: empty foreground");
  FirstOrder out;
  out.mean = mean_of(f);
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  out.range = *hi - *lo;
  if (f.size() >= 2) {
    const double sd = sd_of(f);
    out.variance = sd * sd;
    out.cv = ratio(sd, out.mean);
  }
  return out;
}

std::optional<double> contrast_per_pixel(const SliceView& s, std::span<const std::uint8_t> mask) {
  if (s.rows < 3 || s.cols < 3) return std::nullopt;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      if (!mask[i * s.cols + j]) continue;
      double neighbours = 0.0;
      for (std::ptrdiff_t di = -1; di <= 1; ++di) {
        for (std::ptrdiff_t dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          neighbours += s.at(clamp_index(static_cast<std::ptrdiff_t>(i) + di, s.rows),
                             clamp_index(static_cast<std::ptrdiff_t>(j) + dj, s.cols));
        }
      }
      sum += (8.0 * s.at(i, j) - neighbours) / 8.0;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> psnr(const SliceView& s, std::span<const std::uint8_t> mask) {
  double peak = -std::numeric_limits<double>::infinity();
  double squared_error = 0.0;
  std::size_t n = 0;
  std::array<double, 25> window;
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      if (!mask[i * s.cols + j]) continue;
      std::size_t k = 0;
      for (std::ptrdiff_t di = -2; di <= 2; ++di) {
        for (std::ptrdiff_t dj = -2; dj <= 2; ++dj) {
          window[k++] = s.at(clamp_index(static_cast<std::ptrdiff_t>(i) + di, s.rows),
                             clamp_index(static_cast<std::ptrdiff_t>(j) + dj, s.cols));
        }
      }
      std::nth_element(window.begin(), window.begin() + 12, window.end());
      const double d = s.at(i, j) - window[12];
      squared_error += d * d;
      peak = std::max(peak, s.at(i, j));
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  const double mse = squared_error / static_cast<double>(n);
  const auto r = ratio(peak * peak, mse);
  if (!r || *r <= 0.0) return std::nullopt;
  return 10.0 * std::log10(*r);
}

SnrSuite snr_suite(std::span<const double> f, std::span<const double> b,
                   std::optional<std::span<const double>> fp, std::optional<std::span<const double>> bp) {
  SnrSuite out;
  const bool have_f = !f.empty(), have_b = !b.empty();
  const double sd_b = have_b ? sd_of(b) : 0.0;
  if (have_f && have_b) out.snr1 = ratio(sd_of(f), sd_b);
  if (fp && !fp->empty()) {
    const double mean_fp = mean_of(*fp);
    if (have_b) out.snr2 = ratio(mean_fp, sd_b);
    std::vector<double> centred(fp->begin(), fp->end());
    for (auto& v : centred) v -= mean_fp;
    out.snr3 = ratio(mean_fp, sd_of(centred));
    if (bp && !bp->empty()) out.snr4 = ratio(mean_fp, sd_of(*bp));
  }
  return out;
}

std::optional<double> cnr(std::span<const double> fp, std::span<const double> bp) {
  if (fp.empty() || fp.size() != bp.size()) return std::nullopt;
  std::vector<double> diff(fp.size());
  for (std::size_t k = 0; k < fp.size(); ++k) diff[k] = fp[k] - bp[k];
  return ratio(mean_of(diff), sd_of(bp));
}

std::optional<double> cvp(std::span<const double> fp) {
  if (fp.empty()) return std::nullopt;
  return ratio(sd_of(fp), mean_of(fp));
}

std::optional<double> cjv(std::span<const double> f, std::span<const double> b) {
  if (f.empty() || b.empty()) return std::nullopt;
  return ratio(sd_of(f) + sd_of(b), std::abs(mean_of(f) - mean_of(b)));
}

std::optional<double> efc(const SliceView& s) {
  double energy = 0.0;
  for (double v : s.data) energy += v * v;
  if (energy == 0.0) return std::nullopt;
  const double f_max = std::sqrt(energy);
  double entropy = 0.0;
  for (double v : s.data) {
    const double x = std::abs(v) / f_max;
    if (x > 0.0) entropy -= x * std::log(x);
  }
  if (!(entropy > 0.0)) return std::nullopt;
  const double nm = static_cast<double>(s.size());
  const double root = std::sqrt(nm);
  return nm / root * std::log(entropy / root);
}

std::optional<double> fber(std::span<const double> f, std::span<const double> b) {
  if (f.empty() || b.empty()) return std::nullopt;
  std::vector<double> f2(f.begin(), f.end()), b2(b.begin(), b.end());
  for (auto& v : f2) v *= v;
  for (auto& v : b2) v *= v;
  return ratio(median_of(std::move(f2)), median_of(std::move(b2)));
}

MeasureValues measure_slice(const SliceView& slice, std::span<const std::uint8_t> mask, const PatchPair& patches) {
  std::vector<double> f, b;
  f.reserve(slice.size());
  for (std::size_t p = 0; p < slice.size(); ++p) (mask[p] ? f : b).push_back(slice.data[p]);

  std::optional<std::vector<double>> fp, bp;
  if (patches.foreground) fp = patch_values(slice, *patches.foreground);
  if (patches.background) bp = patch_values(slice, *patches.background);
  const auto view = [](const std::optional<std::vector<double>>& v) -> std::optional<std::span<const double>> {
    if (!v) return std::nullopt;
    return std::span<const double>(*v);
  };

  MeasureValues out;
  if (!f.empty()) {
    const FirstOrder fo = first_order(f);
    at(out, Measure::mean) = fo.mean;
    at(out, Measure::range) = fo.range;
    at(out, Measure::variance) = fo.variance;
    at(out, Measure::cv) = fo.cv;
    at(out, Measure::cpp) = contrast_per_pixel(slice, mask);
    at(out, Measure::psnr) = psnr(slice, mask);
  }
  const SnrSuite snr = snr_suite(f, b, view(fp), view(bp));
  at(out, Measure::snr1) = snr.snr1;
  at(out, Measure::snr2) = snr.snr2;
  at(out, Measure::snr3) = snr.snr3;
  at(out, Measure::snr4) = snr.snr4;
  if (fp && bp) at(out, Measure::cnr) = cnr(*fp, *bp);
  if (fp) at(out, Measure::cvp) = cvp(*fp);
  at(out, Measure::cjv) = cjv(f, b);
  at(out, Measure::efc) = efc(slice);
  at(out, Measure::fber) = fber(f, b);
  return out;
}

MeasureRecord compute_record(const Volume& volume, const ForegroundMask& mask, std::uint64_t seed) {
  if (!(mask.dims() == volume.dims())) throw Error("compute_record: mask and volume dims differ");
  std::array<double, kMeasureCount> sums{};
  MeasureRecord record;
  for (std::size_t z = 0; z < volume.dims().slices; ++z) {
    if (mask.status(z) == SliceStatus::degenerate || mask.foreground_count(z) == 0) continue;
    const SliceView slice = volume.slice(z);
    const auto bits = mask.slice(z);
    const PatchPair patches = sample_patches(slice, bits, derive_seed(seed, z));
    const MeasureValues values = measure_slice(slice, bits, patches);
    for (std::size_t m = 0; m < kMeasureCount; ++m) {
      if (values[m]) {
        sums[m] += *values[m];
        ++record.slices_used[m];
      }
    }
  }
  for (std::size_t m = 0; m < kMeasureCount; ++m) {
    if (record.slices_used[m] > 0) record.values[m] = sums[m] / static_cast<double>(record.slices_used[m]);
  }
  return record;
}

std::uint64_t dataset_seed(std::uint64_t run_seed, std::string_view dataset_id) {
  return derive_seed(run_seed, hash_string(dataset_id));
}

}  // namespace mrqc
