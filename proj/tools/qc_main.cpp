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

// qc: command-line driver over the mrqc C API.
//
//   qc <output_name> <input_dir> [-t tags.txt] [-c True|False] [--seed N] ...
//   qc analyze-batch <results.tsv> <sites.tsv> -k K [--seed N] ...
//   qc phantom <out.nii[.gz]> [--dims S,R,C] [--disk ROW,COL,R] ...

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrqc/mrqc.h"

namespace {

int report_failure(mrqc_status status) {
  std::fprintf(stderr, "error: %s\n", mrqc_last_error());
  return status == MRQC_INVALID_ARGUMENT ? 1 : static_cast<int>(status);
}

bool parse_bool(const std::string& text, bool& out) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "true" || s == "1" || s == "yes") out = true;
  else if (s == "false" || s == "0" || s == "no") out = false;
  else return false;
  return true;
}

int run_cohort(int argc, char** argv) {
  CLI::App app{"MRI cohort quality control: foreground masks, quality measures, embeddings, results.tsv"};
  app.set_version_flag("--version", std::string(mrqc_version()));
  std::string output_name, input_dir, tags, per_object = "False", data_root = "UserInterface/Data";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::vector<double> weights;
  bool no_thumbnails = false, quiet = false;
  app.add_option("output_name", output_name, "Cohort name; results go to <data-root>/<output_name>/")->required();
  app.add_option("input_dir", input_dir, "Directory holding DICOM series, NIfTI or MetaImage files")
      ->required()
      ->check(CLI::ExistingDirectory);
  app.add_option("-t,--tags", tags, "File listing extra header tags to report, one per line")
      ->check(CLI::ExistingFile);
  app.add_option("-c,--per-object", per_object, "True to measure each foreground object separately")
      ->capture_default_str();
  app.add_option("--seed", seed, "Seed for patch sampling and embeddings")->capture_default_str();
  app.add_option("--jobs", jobs, "Datasets processed in parallel")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--weights", weights, "Blend weights w1,w2 for original and equalized estimates (sum to 1)")
      ->delimiter(',')
      ->expected(2);
  app.add_option("--data-root", data_root, "Root folder for cohort outputs")->capture_default_str();
  app.add_flag("--no-thumbnails", no_thumbnails, "Skip PNG thumbnails");
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  bool object_mode = false;
  if (!parse_bool(per_object, object_mode)) {
    std::fprintf(stderr, "error: -c expects True or False, got '%s'\n", per_object.c_str());
    return 1;
  }
  if (quiet) mrqc_set_log_level(MRQC_LOG_WARNING);

  mrqc_config* config = nullptr;
  mrqc_status status = mrqc_config_create(output_name.c_str(), input_dir.c_str(), &config);
  if (status != MRQC_OK) return report_failure(status);
  if (status == MRQC_OK && !tags.empty()) status = mrqc_config_set_tags_file(config, tags.c_str());
  if (status == MRQC_OK) status = mrqc_config_set_per_object(config, object_mode);
  if (status == MRQC_OK) status = mrqc_config_set_seed(config, seed);
  if (status == MRQC_OK) status = mrqc_config_set_jobs(config, jobs);
  if (status == MRQC_OK && !weights.empty()) status = mrqc_config_set_weights(config, weights[0], weights[1]);
  if (status == MRQC_OK) status = mrqc_config_set_data_root(config, data_root.c_str());
  if (status == MRQC_OK) status = mrqc_config_set_thumbnails(config, !no_thumbnails);
  if (status != MRQC_OK) {
    mrqc_config_destroy(config);
    return report_failure(status);
  }

  mrqc_run_result* result = nullptr;
  status = mrqc_run(config, &result);
  mrqc_config_destroy(config);
  if (!result) return report_failure(status);
  if (status == MRQC_EMPTY_COHORT) std::fprintf(stderr, "warning: no datasets found in %s\n", input_dir.c_str());
  mrqc_run_result_destroy(result);
  return static_cast<int>(status);
}

int run_analyze_batch(int argc, char** argv) {
  CLI::App app{"Consensus clustering of a cohort against site labels"};
  std::string results, sites;
  int k = 0, iterations = 1000;
  double subsample = 0.8;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  app.add_option("results", results, "results.tsv from a qc run")->required()->check(CLI::ExistingFile);
  app.add_option("sites", sites, "Two-column TSV: dataset id, site")->required()->check(CLI::ExistingFile);
  app.add_option("-k", k, "Number of clusters; must equal the number of sites")->required();
  app.add_option("--seed", seed, "Resampling seed")->capture_default_str();
  app.add_option("--iterations", iterations, "Resampling iterations")->capture_default_str();
  app.add_option("--subsample", subsample, "Fraction of datasets drawn per iteration")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  mrqc_batch_result* result = nullptr;
  const auto status =
      mrqc_analyze_batch(results.c_str(), sites.c_str(), k, seed, iterations, subsample, jobs, &result);
  if (status != MRQC_OK) return report_failure(status);
  for (size_t s = 0; s < mrqc_batch_result_sites(result); ++s) {
    std::printf("%s\t%.4f\n", mrqc_batch_result_site_name(result, s), mrqc_batch_result_accuracy(result, s));
  }
  std::fprintf(stderr, "wrote %s and %s\n", mrqc_batch_result_matrix_path(result),
               mrqc_batch_result_summary_path(result));
  mrqc_batch_result_destroy(result);
  return 0;
}

int run_phantom(int argc, char** argv) {
  CLI::App app{"Write a synthetic phantom volume"};
  std::string path, id = "phantom";
  std::vector<std::size_t> dims = {1, 128, 128};
  std::vector<double> disks, spacing, ghost;
  double noise = 0.0, bias = 0.0, fg = 100.0, bg = 0.0;
  std::uint64_t seed = 0;
  app.add_option("output", path, "Output .nii or .nii.gz")->required();
  app.add_option("--id", id, "Volume id")->capture_default_str();
  app.add_option("--dims", dims, "Slices,rows,cols")->delimiter(',')->expected(3);
  app.add_option("--disk", disks, "Disk as row,col,radius (repeatable)")->delimiter(',')->allow_extra_args(false);
  app.add_option("--spacing", spacing, "Voxel size x,y,z in mm")->delimiter(',')->expected(3);
  app.add_option("--noise", noise, "Gaussian noise sigma");
  app.add_option("--bias", bias, "Linear shading strength in [0, 1)");
  app.add_option("--ghost", ghost, "Ghost shift,alpha")->delimiter(',')->expected(2);
  app.add_option("--fg", fg, "Foreground intensity")->capture_default_str();
  app.add_option("--bg", bg, "Background intensity")->capture_default_str();
  app.add_option("--seed", seed, "Noise seed")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (disks.size() % 3 != 0) {
    std::fprintf(stderr, "error: --disk takes row,col,radius triples\n");
    return 1;
  }
  mrqc_phantom* p = nullptr;
  mrqc_status status = mrqc_phantom_create(id.c_str(), dims[0], dims[1], dims[2], fg, bg, seed, &p);
  if (status != MRQC_OK) return report_failure(status);
  if (disks.empty()) disks = {dims[1] / 2.0, dims[2] / 2.0, std::min(dims[1], dims[2]) / 4.0};
  for (std::size_t i = 0; status == MRQC_OK && i < disks.size(); i += 3) {
    status = mrqc_phantom_add_ellipse(p, disks[i], disks[i + 1], disks[i + 2], disks[i + 2]);
  }
  if (status == MRQC_OK && !spacing.empty()) status = mrqc_phantom_set_spacing(p, spacing[0], spacing[1], spacing[2]);
  if (status == MRQC_OK && bias > 0) status = mrqc_phantom_add_bias(p, bias);
  if (status == MRQC_OK && !ghost.empty()) {
    status = mrqc_phantom_add_ghosting(p, static_cast<long>(ghost[0]), ghost[1]);
  }
  if (status == MRQC_OK && noise > 0) status = mrqc_phantom_add_noise(p, noise);
  if (status == MRQC_OK) status = mrqc_phantom_write_nifti(p, path.c_str());
  mrqc_phantom_destroy(p);
  return status == MRQC_OK ? 0 : report_failure(status);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::strcmp(argv[1], "analyze-batch") == 0) return run_analyze_batch(argc - 1, argv + 1);
  if (argc > 1 && std::strcmp(argv[1], "phantom") == 0) return run_phantom(argc - 1, argv + 1);
  return run_cohort(argc, argv);
}
