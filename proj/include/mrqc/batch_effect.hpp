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

// Resampled hierarchical consensus clustering and cluster/site overlap.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrqc/embedding.hpp"

namespace mrqc {

/// Dense symmetric n x n matrix.
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  const std::vector<double>& values() const { return values_; }
  bool operator==(const SquareMatrix&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct PearsonDistances {
  SquareMatrix distance;
  /// Rows with zero variance; their distance to every other row is 1.
  std::vector<bool> zero_variance;
};

/// 1 - Pearson correlation between rows, over the columns not flagged constant.
/// Throws DegenerateInput with fewer than 2 rows or 2 usable columns.
PearsonDistances pearson_distance(const FeatureMatrix& features);

/// Average-linkage agglomeration cut to k clusters. Ties merge the pair with
/// the lowest indices first. Labels are 1..k, numbered by first appearance.
std::vector<int> average_linkage_labels(const SquareMatrix& distance, int k);

struct ConsensusOptions {
  int k = 2;
  int iterations = 1000;
  double subsample = 0.8;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct ConsensusResult {
  int k = 0;
  /// Co-cluster / co-sample frequency; nullopt for pairs never sampled together.
  std::vector<std::optional<double>> consensus;
  std::size_t n = 0;
  std::vector<int> labels;
  std::vector<bool> zero_variance;

  std::optional<double> at(std::size_t i, std::size_t j) const { return consensus[i * n + j]; }
  bool operator==(const ConsensusResult&) const = default;
};

/// Each iteration draws ceil(subsample * n) rows without replacement using
/// derive_seed(seed, iteration) and clusters them on Pearson distance. The
/// result does not depend on options.jobs.
ConsensusResult consensus_cluster(const FeatureMatrix& features, const ConsensusOptions& options);

/// Same, starting from a precomputed distance matrix.
ConsensusResult consensus_cluster(const SquareMatrix& distance, const ConsensusOptions& options);

struct OverlapResult {
  std::vector<std::string> sites;  // sorted
  std::vector<double> accuracy;    // per site
  std::vector<int> matched_cluster;
  /// [cluster - 1][site]
  std::vector<std::vector<double>> precision;
  std::vector<std::vector<double>> recall;
};

/// Greedy highest-F1 matching of clusters to sites. Throws Error when the
/// cluster count differs from the site count.
OverlapResult overlap_accuracy(const std::vector<int>& labels, const std::vector<std::string>& sites);

}  // namespace mrqc
