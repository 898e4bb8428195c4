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

// Synthetic MR-like volumes with analytic ground truth and controlled artifacts.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mrqc/volume.hpp"

namespace mrqc {

/// Axis-aligned ellipse in pixel units; a disk when both radii are equal.
struct Ellipse {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius_row = 0.0;
  double radius_col = 0.0;

  static Ellipse disk(double row, double col, double radius) { return {row, col, radius, radius}; }
  bool contains(double row, double col) const;
};

struct GaussianNoise {
  double sigma = 0.0;
};
/// Multiplicative field falling linearly from 1 at the last column to 1 - strength at column 0.
struct LinearBias {
  double strength = 0.0;
};
/// (1 - alpha) * v + alpha * (v circularly shifted by shift rows).
struct Ghosting {
  long shift = 0;
  double alpha = 0.0;
};
using Artifact = std::variant<GaussianNoise, LinearBias, Ghosting>;

struct PhantomSpec {
  std::string id = "phantom";
  Dims dims{1, 128, 128};
  std::vector<Ellipse> shapes;
  double fg_intensity = 100.0;
  double bg_intensity = 0.0;
  std::vector<Artifact> artifacts;
  std::uint64_t seed = 0;
  Spacing spacing{1.0, 1.0, 1.0};
};

struct Phantom {
  Volume volume;
  /// Analytic foreground membership, one byte per voxel in volume order.
  std::vector<std::uint8_t> truth;
};

/// Throws Error on invalid geometry (shape outside the slice, equal fg/bg, empty shape list).
Phantom generate(const PhantomSpec& spec);

Volume apply_noise(const Volume& volume, double sigma, std::uint64_t seed);
Volume apply_bias(const Volume& volume, double strength);
Volume apply_ghosting(const Volume& volume, long shift, double alpha);

}  // namespace mrqc
