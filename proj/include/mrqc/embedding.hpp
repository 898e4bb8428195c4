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

// Cohort feature matrix and 2-D embeddings (t-SNE, UMAP) for batch-effect
// visualization.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mrqc/measures.hpp"
#include "mrqc/volume.hpp"

namespace mrqc {

inline constexpr std::size_t kMetadataFeatureCount = 8;
inline constexpr std::size_t kFeatureCount = kMetadataFeatureCount + kMeasureCount;

/// Column order: VRX VRY VRZ ROWS COLS TR TE NUM, then MEAN ... FBER.
std::array<std::string_view, kFeatureCount> feature_names();

/// Row-major dataset x feature matrix with a missing-value mask.
class FeatureMatrix {
public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t rows, std::size_t cols = kFeatureCount);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::optional<double> get(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, std::optional<double> value);
  /// Raw stored value; 0 for missing entries.
  double value(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  bool missing(std::size_t r, std::size_t c) const { return missing_[r * cols_ + c] != 0; }

  void append_row(const std::vector<std::optional<double>>& row);

  /// Set by whiten: columns with no spread, zeroed and excluded from distances.
  const std::vector<bool>& constant_columns() const { return constant_; }
  /// Set by whiten: rows that had at least one imputed entry.
  const std::vector<bool>& imputed_rows() const { return imputed_; }

private:
  friend FeatureMatrix whiten(const FeatureMatrix& features);
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<bool> constant_;
  std::vector<bool> imputed_;
};

/// The 23-feature row for one dataset (or object).
std::vector<std::optional<double>> feature_row(const MetadataRecord& metadata, const MeasureValues& measures);

/// Per-column z-score with population SD. Missing entries are imputed with
/// the column mean first (so they become 0); constant columns become all 0 and
/// are flagged. Throws DegenerateInput with fewer than two rows.
FeatureMatrix whiten(const FeatureMatrix& features);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  int exaggeration_iterations = 250;
  double early_exaggeration = 12.0;
  /// 0 selects n / (4 * early_exaggeration).
  double learning_rate = 0.0;
};

inline constexpr std::size_t kTsneMinRows = 5;

/// Exact t-SNE on squared Euclidean distances. Perplexity is reduced to
/// (n - 1) / 3 for small cohorts. Throws DegenerateInput below kTsneMinRows.
std::vector<Point2> tsne(const FeatureMatrix& whitened, std::uint64_t seed, const TsneOptions& options = {});

struct UmapOptions {
  std::size_t neighbors = 15;
  double min_dist = 0.1;
  double spread = 1.0;
  int epochs = 500;
  double negative_sample_rate = 5.0;
};

inline constexpr std::size_t kUmapMinRows = 3;

/// UMAP with exact neighbours, fuzzy-union graph and SGD layout. The
/// neighbour count shrinks to n - 1 for small cohorts. Throws DegenerateInput
/// below kUmapMinRows.
std::vector<Point2> umap(const FeatureMatrix& whitened, std::uint64_t seed, const UmapOptions& options = {});

/// Least-squares fit of 1 / (1 + a d^(2b)) to the UMAP target membership curve.
std::pair<double, double> fit_umap_curve(double min_dist, double spread);

}  // namespace mrqc
