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

#include "mrqc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "mrqc/log.hpp"
#include "mrqc/random.hpp"

#ifndef MRQC_VERSION
#define MRQC_VERSION "0.0.0"
#endif

namespace mrqc {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view version() { return MRQC_VERSION; }

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CohortRow failed_row(const DatasetDescriptor& descriptor, std::string_view reason) {
  CohortRow row;
  row.id = descriptor.id;
  row.status = fmt::format("failed:{}", reason);
  return row;
}

}  // namespace

std::vector<CohortRow> process_dataset(const DatasetDescriptor& descriptor, const RunConfig& config,
                                       const std::vector<std::string>& tags) {
  TagValues extra;
  for (const auto& t : tags) extra.emplace_back(t, std::nullopt);
  try {
    if (!tags.empty()) extra = resolve_tags(descriptor, tags);
  } catch (const std::exception& e) {
    log::warn("{}: could not read extra tags: {}", descriptor.id, e.what());
  }

  std::vector<CohortRow> rows;
  try {
    auto loaded = load_volume(descriptor);
    loaded.metadata.extra = extra;
    const Volume& volume = loaded.volume;
    const auto mode = config.per_object ? MaskMode::per_object : MaskMode::single_region;
    const auto mask = detect_foreground(volume, config.weights, mode);
    const auto seed = dataset_seed(config.seed, descriptor.id);
    if (config.per_object) {
      const auto objects = split_objects(mask);
      if (objects.empty()) throw DatasetError("no object above the minimum size");
      for (std::size_t k = 0; k < objects.size(); ++k) {
        CohortRow row;
        row.id = descriptor.id;
        row.object = static_cast<int>(k + 1);
        row.metadata = loaded.metadata;
        row.measures = compute_record(volume, objects[k], derive_seed(seed, k + 1)).values;
        rows.push_back(std::move(row));
      }
    } else {
      CohortRow row;
      row.id = descriptor.id;
      row.metadata = loaded.metadata;
      row.measures = compute_record(volume, mask, seed).values;
      rows.push_back(std::move(row));
    }
    if (config.thumbnails) write_thumbnails(volume, config.data_root / config.output_name);
  } catch (const std::exception& e) {
    log::warn("{}: {}", descriptor.id, e.what());
    auto row = failed_row(descriptor, e.what());
    row.metadata.extra = extra;
    return {std::move(row)};
  }
  return rows;
}

void embed_cohort(CohortTable& table, std::uint64_t seed) {
  std::vector<std::size_t> index;
  FeatureMatrix features;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (!row.ok()) continue;
    index.push_back(r);
    features.append_row(feature_row(row.metadata, row.measures));
  }
  if (index.size() < 2) {
    log::warn("embeddings skipped: {} successful dataset(s)", index.size());
    return;
  }
  const auto whitened = whiten(features);
  for (std::size_t k = 0; k < index.size(); ++k) table.rows[index[k]].imputed = whitened.imputed_rows()[k];

  if (index.size() >= kTsneMinRows) {
    const auto points = tsne(whitened, seed);
    for (std::size_t k = 0; k < index.size(); ++k) table.rows[index[k]].tsne = points[k];
  } else {
    log::warn("t-SNE skipped: needs {} datasets, have {}", kTsneMinRows, index.size());
  }
  if (index.size() >= kUmapMinRows) {
    const auto points = umap(whitened, seed);
    for (std::size_t k = 0; k < index.size(); ++k) table.rows[index[k]].umap = points[k];
  } else {
    log::warn("UMAP skipped: needs {} datasets, have {}", kUmapMinRows, index.size());
  }
}

namespace {

void write_manifest(const RunConfig& config, const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["version"] = std::string(version());
  j["config"] = {
      {"output_name", config.output_name},
      {"input_dir", config.input_dir.string()},
      {"tags_file", config.tags_file ? nlohmann::ordered_json(config.tags_file->string()) : nlohmann::ordered_json()},
      {"per_object", config.per_object},
      {"seed", config.seed},
      {"weights", {config.weights.original, config.weights.equalized}},
      {"jobs", config.jobs},
      {"data_root", config.data_root.string()},
      {"thumbnails", config.thumbnails},
  };
  auto datasets = nlohmann::ordered_json::array();
  for (const auto& t : summary.timings) {
    datasets.push_back({{"id", t.id}, {"status", t.status}, {"seconds", t.seconds}});
  }
  j["datasets"] = std::move(datasets);
  j["total_seconds"] = summary.seconds;
  j["exit_code"] = static_cast<int>(summary.status);
  write_file_atomic(summary.cohort_dir / "run_manifest.json", j.dump(2) + "\n");
}

}  // namespace

RunSummary run(const RunConfig& config) {
  const auto start = Clock::now();
  validate(config.weights);
  if (config.output_name.empty() || config.output_name.find('/') != std::string::npos) {
    throw Error(fmt::format("invalid output name '{}'", config.output_name));
  }
  std::error_code ec;
  if (!fs::is_directory(config.input_dir, ec)) {
    throw Error(fmt::format("input directory {} does not exist", config.input_dir.string()));
  }
  std::vector<std::string> tags;
  if (config.tags_file) tags = read_tag_list(*config.tags_file);

  RunSummary summary;
  summary.cohort_dir = config.data_root / config.output_name;
  summary.table.per_object = config.per_object;
  summary.table.extra_tags = tags;

  const auto datasets = discover_cohort(config.input_dir);
  const std::size_t n = datasets.size();
  log::info("{} dataset(s) found in {}", n, config.input_dir.string());

  std::vector<std::vector<CohortRow>> rows(n);
  summary.timings.resize(n);
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress;
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto t0 = Clock::now();
      rows[i] = process_dataset(datasets[i], config, tags);
      const double secs = seconds_since(t0);
      const auto& status = rows[i].front().status;
      summary.timings[i] = {datasets[i].id, status, secs};
      std::lock_guard lock(progress);
      log::info("[{}/{}] {} {} ({:.2f} s)", ++done, n, datasets[i].id, status, secs);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::size_t failed = 0;
  for (auto& r : rows) {
    if (!r.front().ok()) ++failed;
    for (auto& row : r) summary.table.rows.push_back(std::move(row));
  }
  embed_cohort(summary.table, config.seed);
  summary.results_path = write_results(summary.table, summary.cohort_dir);

  if (n == 0) summary.status = RunStatus::empty;
  else if (failed > 0) summary.status = RunStatus::partial;
  summary.seconds = seconds_since(start);
  write_manifest(config, summary);
  log::info("{} ok, {} failed, {:.2f} s total; wrote {}", n - failed, failed, summary.seconds,
            summary.results_path.string());
  return summary;
}

std::vector<std::pair<std::string, std::string>> read_sites(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (ln == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(fmt::format("{} line {}: expected two tab-separated fields", path.string(), ln));
    }
    std::string id = line.substr(0, tab), site = line.substr(tab + 1);
    if (ln == 1 && id == "id" && site == "site") continue;
    if (!seen.insert(id).second) throw Error(fmt::format("{}: duplicate id '{}'", path.string(), id));
    out.emplace_back(std::move(id), std::move(site));
  }
  return out;
}

BatchSummary analyze_batch(const BatchConfig& config) {
  const auto table = read_results(config.results_path);
  const auto sites = read_sites(config.sites_path);
  std::map<std::string, std::string> site_of(sites.begin(), sites.end());

  BatchSummary out;
  FeatureMatrix features;
  std::set<std::string> used;
  std::vector<std::string> unknown;
  for (const auto& row : table.rows) {
    if (!row.ok()) continue;
    const auto it = site_of.find(row.id);
    if (it == site_of.end()) {
      unknown.push_back(row.id);
      continue;
    }
    used.insert(row.id);
    out.ids.push_back(row.object ? fmt::format("{}#{}", row.id, *row.object) : row.id);
    out.sites.push_back(it->second);
    features.append_row(feature_row(row.metadata, row.measures));
  }
  std::vector<std::string> orphan;
  for (const auto& [id, site] : sites) {
    if (!used.count(id)) orphan.push_back(id);
  }
  if (!unknown.empty() || !orphan.empty()) {
    std::string msg = "dataset ids do not align";
    if (!unknown.empty()) msg += fmt::format("; without a site: {}", fmt::join(unknown, ", "));
    if (!orphan.empty()) msg += fmt::format("; not among successful results: {}", fmt::join(orphan, ", "));
    throw Error(msg);
  }
  std::set<std::string> distinct(out.sites.begin(), out.sites.end());
  if (distinct.size() != static_cast<std::size_t>(config.options.k)) {
    throw Error(fmt::format("k = {} but the site file names {} sites", config.options.k, distinct.size()));
  }

  out.consensus = consensus_cluster(whiten(features), config.options);
  out.overlap = overlap_accuracy(out.consensus.labels, out.sites);

  const auto dir = config.results_path.parent_path();
  std::string matrix = "id";
  for (const auto& id : out.ids) matrix += "\t" + id;
  matrix += '\n';
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    matrix += out.ids[i];
    for (std::size_t j = 0; j < out.ids.size(); ++j) {
      const auto v = out.consensus.at(i, j);
      matrix += '\t';
      matrix += v ? format_number(*v) : "NA";
    }
    matrix += '\n';
  }
  out.matrix_path = dir / "consensus_matrix.tsv";
  write_file_atomic(out.matrix_path, matrix);

  nlohmann::ordered_json j;
  j["k"] = config.options.k;
  j["iterations"] = config.options.iterations;
  j["subsample"] = config.options.subsample;
  j["seed"] = config.options.seed;
  j["ids"] = out.ids;
  j["labels"] = out.consensus.labels;
  auto per_site = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < out.overlap.sites.size(); ++s) {
    per_site.push_back({{"site", out.overlap.sites[s]},
                        {"cluster", out.overlap.matched_cluster[s]},
                        {"accuracy", out.overlap.accuracy[s]}});
  }
  j["overlap_accuracy"] = std::move(per_site);
  auto pairs = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < out.overlap.precision.size(); ++c) {
    for (std::size_t s = 0; s < out.overlap.sites.size(); ++s) {
      pairs.push_back({{"cluster", c + 1},
                       {"site", out.overlap.sites[s]},
                       {"precision", out.overlap.precision[c][s]},
                       {"recall", out.overlap.recall[c][s]}});
    }
  }
  j["pairs"] = std::move(pairs);
  std::vector<std::string> flagged;
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    if (out.consensus.zero_variance[i]) flagged.push_back(out.ids[i]);
  }
  j["zero_variance"] = flagged;
  out.summary_path = dir / "consensus.json";
  write_file_atomic(out.summary_path, j.dump(2) + "\n");
  return out;
}

}  // namespace mrqc
