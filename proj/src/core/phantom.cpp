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

#include "mrqc/phantom.hpp"

#include <fmt/format.h>

#include "mrqc/random.hpp"

namespace mrqc {

bool Ellipse::contains(double row, double col) const {
  const double dr = (row - center_row) / radius_row;
  const double dc = (col - center_col) / radius_col;
  return dr * dr + dc * dc <= 1.0;
}

namespace {

void check_spec(const PhantomSpec& spec) {
  const Dims& d = spec.dims;
  if (d.slices < 1 || d.rows < 1 || d.cols < 1) throw Error("phantom: empty grid");
  if (spec.shapes.empty()) throw Error("phantom: at least one shape is required");
  if (spec.fg_intensity == spec.bg_intensity) throw Error("phantom: fg and bg intensities must differ");
  for (const auto& s : spec.shapes) {
    if (!(s.radius_row > 0.0 && s.radius_col > 0.0)) throw Error("phantom: radii must be positive");
    const bool fits = s.center_row - s.radius_row >= 0.0 && s.center_col - s.radius_col >= 0.0 &&
                      s.center_row + s.radius_row <= static_cast<double>(d.rows - 1) &&
                      s.center_col + s.radius_col <= static_cast<double>(d.cols - 1);
    if (!fits) throw Error(fmt::format("phantom: shape at ({}, {}) does not fit the slice", s.center_row, s.center_col));
  }
}

}  // namespace

Phantom generate(const PhantomSpec& spec) {
  check_spec(spec);
  const Dims& d = spec.dims;
  std::vector<double> voxels(d.voxel_count(), spec.bg_intensity);
  std::vector<std::uint8_t> truth(d.voxel_count(), 0);
  for (std::size_t i = 0; i < d.rows; ++i) {
    for (std::size_t j = 0; j < d.cols; ++j) {
      bool inside = false;
      for (const auto& s : spec.shapes) inside = inside || s.contains(static_cast<double>(i), static_cast<double>(j));
      if (!inside) continue;
      for (std::size_t z = 0; z < d.slices; ++z) {
        const std::size_t p = (z * d.rows + i) * d.cols + j;
        voxels[p] = spec.fg_intensity;
        truth[p] = 1;
      }
    }
  }
  Volume volume(spec.id, d, std::move(voxels), spec.spacing);
  for (std::size_t k = 0; k < spec.artifacts.size(); ++k) {
    volume = std::visit(
        [&](const auto& a) -> Volume {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, GaussianNoise>) return apply_noise(volume, a.sigma, derive_seed(spec.seed, k));
          else if constexpr (std::is_same_v<T, LinearBias>) return apply_bias(volume, a.strength);
          else return apply_ghosting(volume, a.shift, a.alpha);
        },
        spec.artifacts[k]);
  }
  return {std::move(volume), std::move(truth)};
}

Volume apply_noise(const Volume& volume, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("apply_noise: sigma must be non-negative");
  if (sigma == 0.0) return volume;
  Engine engine(seed);
  NormalSource normal;
  std::vector<double> out(volume.voxels().begin(), volume.voxels().end());
  for (auto& v : out) v += sigma * normal(engine);
  return volume.with_voxels(std::move(out));
}

Volume apply_bias(const Volume& volume, double strength) {
  if (!(strength >= 0.0 && strength < 1.0)) throw Error("apply_bias: strength must be in [0, 1)");
  if (strength == 0.0) return volume;
  const Dims& d = volume.dims();
  std::vector<double> out(volume.voxels().begin(), volume.voxels().end());
  const double last = d.cols > 1 ? static_cast<double>(d.cols - 1) : 1.0;
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double col = static_cast<double>(p % d.cols);
    out[p] *= (1.0 - strength) + strength * col / last;
  }
  return volume.with_voxels(std::move(out));
}

Volume apply_ghosting(const Volume& volume, long shift, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("apply_ghosting: alpha must be in (0, 1)");
  const Dims& d = volume.dims();
  const long rows = static_cast<long>(d.rows);
  const long s = ((shift % rows) + rows) % rows;
  if (s == 0) return volume;
  std::vector<double> out(volume.voxels().size());
  for (std::size_t z = 0; z < d.slices; ++z) {
    for (long i = 0; i < rows; ++i) {
      const long source = ((i - s) % rows + rows) % rows;
      for (std::size_t j = 0; j < d.cols; ++j) {
        const double v = volume.at(z, static_cast<std::size_t>(i), j);
        const double ghost = volume.at(z, static_cast<std::size_t>(source), j);
        out[(z * d.rows + static_cast<std::size_t>(i)) * d.cols + j] = (1.0 - alpha) * v + alpha * ghost;
      }
    }
  }
  return volume.with_voxels(std::move(out));
}

}  // namespace mrqc
