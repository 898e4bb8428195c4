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

#include <cstdint>
#include <span>
#include <string>

#include "mrqc/volume.hpp"

namespace mrqc {

struct NiftiHeader {
  bool swap = false;
  int datatype = 0;
  std::size_t cols = 0, rows = 0, slices = 0;
  std::size_t extra_volumes = 1;
  std::size_t vox_offset = 0;
  double scl_slope = 0.0, scl_inter = 0.0;
  std::uint8_t xyzt_units = 0;
  Spacing spacing;
  std::string descrip, aux_file, intent_name;
};

NiftiHeader parse_nifti_header(std::span<const std::uint8_t> bytes);

}  // namespace mrqc
