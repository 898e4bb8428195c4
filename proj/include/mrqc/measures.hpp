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

// Slice-level image quality measurements and their volume averages.
//
// Conventions shared by every measure:
//   - standard deviations are population SDs;
//   - a zero denominator, an empty region or a missing patch yields
//     std::nullopt, never an infinity;
//   - volume values are the mean of the slice values over slices where the
//     measure is defined.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mrqc/foreground.hpp"
#include "mrqc/volume.hpp"

namespace mrqc {

enum class Measure : std::size_t {
  mean, range, variance, cv, cpp, psnr, snr1, snr2, snr3, snr4, cnr, cvp, cjv, efc, fber,
};

inline constexpr std::size_t kMeasureCount = 15;

inline constexpr std::array<std::string_view, kMeasureCount> kMeasureNames = {
    "MEAN", "RNG", "VAR", "CV", "CPP", "PSNR", "SNR1", "SNR2",
    "SNR3", "SNR4", "CNR", "CVP", "CJV", "EFC", "FBER"};

using MeasureValues = std::array<std::optional<double>, kMeasureCount>;

inline std::optional<double>& at(MeasureValues& v, Measure m) { return v[static_cast<std::size_t>(m)]; }
inline const std::optional<double>& at(const MeasureValues& v, Measure m) {
  return v[static_cast<std::size_t>(m)];
}

inline constexpr std::size_t kPatchSize = 5;
inline constexpr int kPatchAttempts = 1000;

/// Top-left corner of a kPatchSize x kPatchSize window.
struct Patch {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Patch&) const = default;
};

struct PatchPair {
  std::optional<Patch> foreground;
  std::optional<Patch> background;
};

/// Rejection-samples one window inside the foreground and one inside the
/// background. A region with no acceptable draw after kPatchAttempts tries
/// leaves its patch empty.
PatchPair sample_patches(const SliceView& slice, std::span<const std::uint8_t> mask, std::uint64_t seed);

std::vector<double> patch_values(const SliceView& slice, const Patch& patch);

struct FirstOrder {
  double mean = 0.0;
  double range = 0.0;
  std::optional<double> variance;
  std::optional<double> cv;
};

/// MEAN, RNG, VAR, CV of the foreground sample. Throws DegenerateInput on an
/// empty sample.
FirstOrder first_order(std::span<const double> foreground);

/// Contrast per pixel: mean 3x3 Laplacian response (replicate edges) over the foreground.
std::optional<double> contrast_per_pixel(const SliceView& slice, std::span<const std::uint8_t> mask);

/// Peak SNR in dB against the 5x5 median-filtered slice (replicate edges), over the foreground.
std::optional<double> psnr(const SliceView& slice, std::span<const std::uint8_t> mask);

struct SnrSuite {
  std::optional<double> snr1, snr2, snr3, snr4;
};

SnrSuite snr_suite(std::span<const double> foreground, std::span<const double> background,
                   std::optional<std::span<const double>> fg_patch,
                   std::optional<std::span<const double>> bg_patch);

std::optional<double> cnr(std::span<const double> fg_patch, std::span<const double> bg_patch);
std::optional<double> cvp(std::span<const double> fg_patch);
std::optional<double> cjv(std::span<const double> foreground, std::span<const double> background);

/// Entropy focus criterion over the whole slice, on intensity magnitudes.
std::optional<double> efc(const SliceView& slice);

std::optional<double> fber(std::span<const double> foreground, std::span<const double> background);

/// All fifteen measures for one slice with explicit patch placements.
MeasureValues measure_slice(const SliceView& slice, std::span<const std::uint8_t> mask,
                            const PatchPair& patches);

struct MeasureRecord {
  MeasureValues values;
  /// Number of slices contributing to each value.
  std::array<std::size_t, kMeasureCount> slices_used{};
  bool operator==(const MeasureRecord&) const = default;
};

/// Per-slice measures averaged over the volume. Patch draws for slice z use
/// derive_seed(seed, z), so the record is independent of evaluation order.
MeasureRecord compute_record(const Volume& volume, const ForegroundMask& mask, std::uint64_t seed);

/// Patch seed for a dataset, from the run-wide seed and the dataset id.
std::uint64_t dataset_seed(std::uint64_t run_seed, std::string_view dataset_id);

}  // namespace mrqc
