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

// Test fixtures: MetaImage writer, scratch directories, synthetic cohorts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mrqc/phantom.hpp"
#include "mrqc/volume.hpp"

namespace mrqc::testing {

struct MetaImageOptions {
  std::string element_type = "MET_SHORT";  // MET_UCHAR, MET_SHORT, MET_FLOAT, MET_DOUBLE
  bool compressed = false;
  bool big_endian = false;
  bool detached = false;  // .mhd header plus .raw data
  std::map<std::string, std::string> extra;
};

/// Writes volume to path (.mha, or .mhd when detached).
void write_metaimage(const Volume& volume, const std::filesystem::path& path, const MetaImageOptions& options = {});

/// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
  explicit ScratchDir(const std::string& name);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
  std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);

/// Disk phantom spec: radius a quarter of the short edge, centred.
PhantomSpec disk_spec(std::string id, std::size_t slices, std::size_t rows, std::size_t cols);

struct SiteProfile {
  std::string name;
  Spacing spacing;
  double noise = 5.0;
};

/// Three acquisition sites that differ in spacing and noise, or share one
/// profile when homogenized. Each phantom draws its own intensity, radius and
/// shading so sites are not internally identical.
std::vector<SiteProfile> site_profiles(bool homogenized);

/// Phantom `index` of `site`, deterministic in (site, index).
PhantomSpec site_phantom(const SiteProfile& site, std::size_t site_index, std::size_t index);

/// Writes `per_site` phantoms for each of the first `sites` profiles as
/// <input_dir>/<id>.nii.gz and the id/site table to `sites_file`. Returns the ids.
std::vector<std::string> write_site_cohort(const std::filesystem::path& input_dir,
                                           const std::filesystem::path& sites_file, bool homogenized,
                                           std::size_t sites, std::size_t per_site);

}  // namespace mrqc::testing
