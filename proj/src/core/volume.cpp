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

#include "mrqc/volume.hpp"

#include <fmt/format.h>

namespace mrqc {

Volume::Volume(std::string id, Dims dims, std::vector<double> voxels, Spacing spacing)
    : id_(std::move(id)), dims_(dims), voxels_(std::move(voxels)), spacing_(spacing) {
  if (voxels_.size() != dims_.voxel_count()) {
    throw Error(fmt::format("volume '{}': {} voxels do not match dims {}x{}x{}", id_,
                            voxels_.size(), dims_.slices, dims_.rows, dims_.cols));
  }
  for (const auto& s : {spacing_.x, spacing_.y, spacing_.z}) {
    if (s && !(*s > 0.0)) {
      throw Error(fmt::format("volume '{}': spacing components must be positive", id_));
    }
  }
}

Volume Volume::with_voxels(std::vector<double> voxels) const {
  return Volume(id_, dims_, std::move(voxels), spacing_);
}

void Volume::require_measurable() const {
  if (dims_.slices < 1 || dims_.rows < kMinInPlaneExtent || dims_.cols < kMinInPlaneExtent) {
    throw DatasetError(fmt::format("grid {}x{}x{} is below the measurable minimum (1x{}x{})",
                                   dims_.slices, dims_.rows, dims_.cols, kMinInPlaneExtent,
                                   kMinInPlaneExtent));
  }
}

}  // namespace mrqc
