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

#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>
#include <zlib.h>

#include "mrqc/phantom.hpp"
#include "mrqc/random.hpp"
#include "mrqc/volume_io.hpp"

namespace mrqc::testing {

namespace fs = std::filesystem;

namespace {

template <typename T>
void append(std::string& out, T value, bool big_endian) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if (big_endian) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

void write_metaimage(const Volume& volume, const fs::path& path, const MetaImageOptions& options) {
  std::string data;
  for (double v : volume.voxels()) {
    if (options.element_type == "MET_UCHAR") append(data, static_cast<std::uint8_t>(v), options.big_endian);
    else if (options.element_type == "MET_SHORT") append(data, static_cast<std::int16_t>(v), options.big_endian);
    else if (options.element_type == "MET_FLOAT") append(data, static_cast<float>(v), options.big_endian);
    else if (options.element_type == "MET_DOUBLE") append(data, v, options.big_endian);
    else throw Error("unsupported test element type " + options.element_type);
  }
  if (options.compressed) {
    uLongf size = compressBound(static_cast<uLong>(data.size()));
    std::string packed(size, '\0');
    if (compress(reinterpret_cast<Bytef*>(packed.data()), &size, reinterpret_cast<const Bytef*>(data.data()),
                 static_cast<uLong>(data.size())) != Z_OK) {
      throw Error("zlib compress failed");
    }
    packed.resize(size);
    data = std::move(packed);
  }
  const auto& d = volume.dims();
  const auto& s = volume.spacing();
  std::ostringstream h;
  h << "ObjectType = Image\n";
  if (d.slices == 1) {
    h << "NDims = 2\nDimSize = " << d.cols << " " << d.rows << "\n";
    h << "ElementSpacing = " << s.x.value_or(1) << " " << s.y.value_or(1) << "\n";
  } else {
    h << "NDims = 3\nDimSize = " << d.cols << " " << d.rows << " " << d.slices << "\n";
    h << "ElementSpacing = " << s.x.value_or(1) << " " << s.y.value_or(1) << " " << s.z.value_or(1) << "\n";
  }
  h << "ElementByteOrderMSB = " << (options.big_endian ? "True" : "False") << "\n";
  if (options.compressed) h << "CompressedData = True\nCompressedDataSize = " << data.size() << "\n";
  for (const auto& [k, v] : options.extra) h << k << " = " << v << "\n";
  h << "ElementType = " << options.element_type << "\n";
  std::ofstream out(path, std::ios::binary);
  if (options.detached) {
    fs::path raw = path;
    raw.replace_extension(".raw");
    h << "ElementDataFile = " << raw.filename().string() << "\n";
    std::ofstream r(raw, std::ios::binary);
    r << data;
    out << h.str();
  } else {
    h << "ElementDataFile = LOCAL\n";
    out << h.str() << data;
  }
}

ScratchDir::ScratchDir(const std::string& name) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / fmt::format("mrqc-test-{}-{}-{}", name, ::getpid(), counter++);
  fs::remove_all(path_);
  fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PhantomSpec disk_spec(std::string id, std::size_t slices, std::size_t rows, std::size_t cols) {
  PhantomSpec spec;
  spec.id = std::move(id);
  spec.dims = {slices, rows, cols};
  const double radius = static_cast<double>(std::min(rows, cols)) / 4.0;
  spec.shapes = {Ellipse::disk(static_cast<double>(rows) / 2.0, static_cast<double>(cols) / 2.0, radius)};
  return spec;
}

std::vector<SiteProfile> site_profiles(bool homogenized) {
  if (homogenized) {
    const SiteProfile shared{"", {1.0, 1.0, 3.0}, 8.0};
    return {{"A", shared.spacing, shared.noise}, {"B", shared.spacing, shared.noise},
            {"C", shared.spacing, shared.noise}};
  }
  return {{"A", {0.5, 0.5, 1.0}, 3.0}, {"B", {1.0, 1.0, 3.0}, 8.0}, {"C", {0.8, 0.8, 5.0}, 15.0}};
}

PhantomSpec site_phantom(const SiteProfile& site, std::size_t site_index, std::size_t index) {
  Engine engine(derive_seed(0x5173, site_index * 1000 + index));
  PhantomSpec spec = disk_spec(fmt::format("{}{:02}", site.name, index), 4, 64, 64);
  spec.shapes[0].radius_row = spec.shapes[0].radius_col = uniform_real(engine, 13.0, 19.0);
  spec.fg_intensity = uniform_real(engine, 80.0, 120.0);
  spec.spacing = site.spacing;
  spec.seed = engine();
  spec.artifacts = {LinearBias{uniform_real(engine, 0.0, 0.3)}, GaussianNoise{site.noise}};
  return spec;
}

std::vector<std::string> write_site_cohort(const std::filesystem::path& input_dir,
                                           const std::filesystem::path& sites_file, bool homogenized,
                                           std::size_t sites, std::size_t per_site) {
  std::filesystem::create_directories(input_dir);
  const auto profiles = site_profiles(homogenized);
  std::vector<std::string> ids;
  std::string table = "id\tsite\n";
  for (std::size_t s = 0; s < sites; ++s) {
    for (std::size_t i = 0; i < per_site; ++i) {
      auto spec = site_phantom(profiles.at(s), s, i);
      // Homogenized profiles share a name; keep ids unique per site.
      spec.id = fmt::format("s{}_{:02}", s, i);
      write_nifti(generate(spec).volume, input_dir / (spec.id + ".nii.gz"));
      table += fmt::format("{}\tsite{}\n", spec.id, s);
      ids.push_back(spec.id);
    }
  }
  std::ofstream(sites_file, std::ios::binary) << table;
  return ids;
}

}  // namespace mrqc::testing
