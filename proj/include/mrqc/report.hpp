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

// results.tsv and per-slice PNG thumbnails.
//
// results.tsv columns, in order:
//   id, object (per-object mode only), status,
//   MFR MFS VRX VRY VRZ ROWS COLS TR TE NUM,
//   MEAN RNG VAR CV CPP PSNR SNR1 SNR2 SNR3 SNR4 CNR CVP CJV EFC FBER,
//   tsne_x tsne_y umap_x umap_y, imputed, then one column per extra tag.
// Numbers use %.6g, missing values are the literal NA, lines end in LF.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrqc/embedding.hpp"
#include "mrqc/measures.hpp"
#include "mrqc/volume.hpp"

namespace mrqc {

struct CohortRow {
  std::string id;
  std::optional<int> object;  // 1-based, per-object mode
  std::string status = "ok";  // "ok" or "failed:<reason>"
  MetadataRecord metadata;
  MeasureValues measures;
  std::optional<Point2> tsne;
  std::optional<Point2> umap;
  bool imputed = false;

  bool ok() const { return status == "ok"; }
  bool operator==(const CohortRow&) const = default;
};

struct CohortTable {
  bool per_object = false;
  std::vector<std::string> extra_tags;
  std::vector<CohortRow> rows;

  bool operator==(const CohortTable&) const = default;
};

/// %.6g with -0 printed as 0; non-finite values print as NA.
std::string format_number(double value);

std::vector<std::string> result_columns(const CohortTable& table);

std::string format_results(const CohortTable& table);

/// Writes <cohort_dir>/results.tsv through a temporary file and a rename.
/// Throws Error when the directory cannot be written.
std::filesystem::path write_results(const CohortTable& table, const std::filesystem::path& cohort_dir);

/// Inverse of format_results. Throws Error on a malformed file.
CohortTable parse_results(std::string_view text);
CohortTable read_results(const std::filesystem::path& path);

/// Writes text to path via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

inline constexpr std::size_t kThumbnailMaxEdge = 256;

/// Thumbnail size for a rows x cols slice: long edge capped, aspect preserved.
std::pair<std::size_t, std::size_t> thumbnail_size(std::size_t rows, std::size_t cols);

/// One 8-bit PNG per slice at <cohort_dir>/<id>/<id>_<zero-padded z>.png,
/// windowed to the volume's [1st, 99th] percentile.
std::vector<std::filesystem::path> write_thumbnails(const Volume& volume, const std::filesystem::path& cohort_dir);

/// Linear-interpolated percentile (0..100) of a sample.
double percentile(std::vector<double> values, double pct);

}  // namespace mrqc
