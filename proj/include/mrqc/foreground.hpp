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

// Unsupervised per-slice foreground detection: Otsu thresholding of a blend
// of the normalized slice and its histogram-equalized version, closed by a
// convex hull.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mrqc/volume.hpp"

namespace mrqc {

enum class MaskMode { single_region, per_object };

/// Blend weights for the original and equalized estimates. Must sum to 1.
struct BlendWeights {
  double original = 0.5;
  double equalized = 0.5;
};

/// Throws Error unless both weights are in [0,1] and sum to 1 (within 1e-9).
void validate(const BlendWeights& weights);

enum class SliceStatus : std::uint8_t {
  ok,
  degenerate,  // constant slice, no threshold exists
};

/// Per-slice binary partition of a volume into foreground F and background B.
class ForegroundMask {
public:
  ForegroundMask() = default;
  ForegroundMask(Dims dims, MaskMode mode);

  const Dims& dims() const { return dims_; }
  MaskMode mode() const { return mode_; }

  std::span<const std::uint8_t> slice(std::size_t z) const {
    return std::span<const std::uint8_t>(bits_).subspan(z * dims_.slice_size(), dims_.slice_size());
  }
  std::span<std::uint8_t> slice(std::size_t z) {
    return std::span<std::uint8_t>(bits_).subspan(z * dims_.slice_size(), dims_.slice_size());
  }
  /// Thresholded mask before hull filling; input to split_objects.
  std::span<const std::uint8_t> thresholded(std::size_t z) const {
    return std::span<const std::uint8_t>(thresholded_).subspan(z * dims_.slice_size(), dims_.slice_size());
  }
  std::span<std::uint8_t> thresholded(std::size_t z) {
    return std::span<std::uint8_t>(thresholded_).subspan(z * dims_.slice_size(), dims_.slice_size());
  }

  std::size_t foreground_count(std::size_t z) const;
  std::size_t background_count(std::size_t z) const { return dims_.slice_size() - foreground_count(z); }

  int object_count(std::size_t z) const { return object_count_[z]; }
  void set_object_count(std::size_t z, int n) { object_count_[z] = n; }

  SliceStatus status(std::size_t z) const { return status_[z]; }
  void set_status(std::size_t z, SliceStatus s) { status_[z] = s; }

private:
  Dims dims_;
  MaskMode mode_ = MaskMode::single_region;
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint8_t> thresholded_;
  std::vector<int> object_count_;
  std::vector<SliceStatus> status_;
};

/// Cumulative-distribution mapping: each value becomes the fraction of samples
/// less than or equal to it. Output lies in (0,1]; ties map together, so the
/// mapping is rank-preserving. A constant input yields a constant output.
std::vector<double> equalize_histogram(std::span<const double> values);

/// Otsu threshold over a 256-bin histogram spanning [min, max]. Samples above
/// the returned value are the upper class. Throws DegenerateInput when fewer
/// than two distinct values are present.
double otsu_threshold(std::span<const double> values);

/// Non-throwing form of otsu_threshold.
std::optional<double> try_otsu_threshold(std::span<const double> values);

/// Full detection pipeline. Throws DatasetError when every slice is degenerate.
ForegroundMask detect_foreground(const Volume& volume, const BlendWeights& weights = {},
                                 MaskMode mode = MaskMode::single_region);

/// Minimum component area, as a fraction of slice area, kept by split_objects.
inline constexpr double kMinObjectFraction = 0.005;

/// Separates the thresholded mask into objects: 8-connected components per
/// slice (small ones dropped), linked across slices by overlap, each hull-filled
/// per slice. Objects are ordered by first slice, then centroid column, then row.
std::vector<ForegroundMask> split_objects(const ForegroundMask& mask);

/// Fills the convex hull of the set pixels (pixel centres) of a rows x cols mask.
std::vector<std::uint8_t> fill_convex_hull(std::span<const std::uint8_t> mask, std::size_t rows,
                                           std::size_t cols);

/// 8-connected component labels (0 = unset, 1..n in raster order of first pixel).
std::vector<int> label_components(std::span<const std::uint8_t> mask, std::size_t rows,
                                  std::size_t cols, int* count = nullptr);

}  // namespace mrqc
