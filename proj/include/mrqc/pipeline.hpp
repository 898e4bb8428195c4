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

// Cohort driver: discover, load, mask, measure, embed, report.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrqc/batch_effect.hpp"
#include "mrqc/foreground.hpp"
#include "mrqc/report.hpp"
#include "mrqc/volume_io.hpp"

namespace mrqc {

std::string_view version();

struct RunConfig {
  std::string output_name;
  std::filesystem::path input_dir;
  std::optional<std::filesystem::path> tags_file;
  bool per_object = false;
  std::uint64_t seed = 0;
  BlendWeights weights;
  unsigned jobs = 1;
  std::filesystem::path data_root = "UserInterface/Data";
  bool thumbnails = true;
};

enum class RunStatus : int {
  ok = 0,
  fatal = 1,
  partial = 2,  // some datasets failed; results still written
  empty = 3,    // no datasets found; header-only results written
};

struct DatasetTiming {
  std::string id;
  std::string status;
  double seconds = 0.0;
};

struct RunSummary {
  RunStatus status = RunStatus::ok;
  CohortTable table;
  std::filesystem::path cohort_dir;
  std::filesystem::path results_path;
  std::vector<DatasetTiming> timings;
  double seconds = 0.0;
};

/// Rows for one dataset (one per object in per-object mode). Never throws for
/// per-dataset problems: a failure becomes a single row with status
/// "failed:<reason>".
std::vector<CohortRow> process_dataset(const DatasetDescriptor& descriptor, const RunConfig& config,
                                       const std::vector<std::string>& tags);

/// Fills embedding coordinates and imputed flags for successful rows.
void embed_cohort(CohortTable& table, std::uint64_t seed);

/// Full run. Throws Error for fatal conditions (missing input, bad weights,
/// unwritable output).
RunSummary run(const RunConfig& config);

struct BatchConfig {
  std::filesystem::path results_path;
  std::filesystem::path sites_path;
  ConsensusOptions options;
};

struct BatchSummary {
  std::vector<std::string> ids;
  std::vector<std::string> sites;
  ConsensusResult consensus;
  OverlapResult overlap;
  std::filesystem::path matrix_path;
  std::filesystem::path summary_path;
};

/// Two-column TSV: dataset id, site. A header line "id<TAB>site" is skipped.
std::vector<std::pair<std::string, std::string>> read_sites(const std::filesystem::path& path);

/// Consensus clustering of the successful rows of results.tsv. Writes
/// consensus_matrix.tsv and consensus.json beside it.
BatchSummary analyze_batch(const BatchConfig& config);

}  // namespace mrqc
