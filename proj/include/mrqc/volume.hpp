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

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrqc {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A single dataset could not be loaded or processed. The cohort run continues.
class DatasetError : public Error {
public:
  using Error::Error;
};

/// Input that has no meaningful answer (constant sample, too few datasets, ...).
class DegenerateInput : public Error {
public:
  using Error::Error;
};

/// Grid extents, slice-major: (NUM slices, ROWS, COLS).
struct Dims {
  std::size_t slices = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t slice_size() const { return rows * cols; }
  std::size_t voxel_count() const { return slices * rows * cols; }
  bool operator==(const Dims&) const = default;
};

/// Voxel spacing in mm. A component absent from the source header stays empty.
struct Spacing {
  std::optional<double> x;  // VRX, along columns
  std::optional<double> y;  // VRY, along rows
  std::optional<double> z;  // VRZ, between slices
  bool operator==(const Spacing&) const = default;
};

inline constexpr std::size_t kMinInPlaneExtent = 8;

/// Read-only view of one 2-D slice, row-major.
struct SliceView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::size_t size() const { return data.size(); }
};

/// 3-D scalar intensity grid plus geometry. Immutable once constructed.
class Volume {
public:
  Volume() = default;
  Volume(std::string id, Dims dims, std::vector<double> voxels, Spacing spacing = {});

  const std::string& id() const { return id_; }
  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::span<const double> voxels() const { return voxels_; }

  SliceView slice(std::size_t z) const {
    return {std::span<const double>(voxels_).subspan(z * dims_.slice_size(), dims_.slice_size()),
            dims_.rows, dims_.cols};
  }
  double at(std::size_t z, std::size_t i, std::size_t j) const {
    return voxels_[(z * dims_.rows + i) * dims_.cols + j];
  }

  /// Same geometry and id, new intensities. Throws if the size differs.
  Volume with_voxels(std::vector<double> voxels) const;

  /// Throws DatasetError unless NUM >= 1 and ROWS, COLS >= kMinInPlaneExtent.
  void require_measurable() const;

private:
  std::string id_;
  Dims dims_;
  std::vector<double> voxels_;
  Spacing spacing_;
};

/// Header-level metadata (MFR ... NUM). Absent fields are std::nullopt, never zero.
struct MetadataRecord {
  std::optional<std::string> manufacturer;   // MFR
  std::optional<double> field_strength;      // MFS, tesla
  Spacing spacing;                           // VRX, VRY, VRZ
  std::size_t rows = 0;                      // ROWS
  std::size_t cols = 0;                      // COLS
  std::optional<double> repetition_time;     // TR, ms
  std::optional<double> echo_time;           // TE, ms
  std::size_t slices = 0;                    // NUM
  std::vector<std::pair<std::string, std::optional<std::string>>> extra;

  bool operator==(const MetadataRecord&) const = default;
};

}  // namespace mrqc
