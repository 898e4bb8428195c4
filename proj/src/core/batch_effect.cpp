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

#include "mrqc/batch_effect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "mrqc/log.hpp"
#include "mrqc/random.hpp"

namespace mrqc {

PearsonDistances pearson_distance(const FeatureMatrix& features) {
  const std::size_t n = features.rows();
  std::vector<std::size_t> columns;
  const auto& constant = features.constant_columns();
  for (std::size_t c = 0; c < features.cols(); ++c) {
    if (constant.empty() || !constant[c]) columns.push_back(c);
  }
  if (n < 2 || columns.size() < 2) {
    throw DegenerateInput(fmt::format("Pearson distance needs 2 rows and 2 usable features, got {} and {}", n,
                                      columns.size()));
  }
  const std::size_t m = columns.size();
  std::vector<double> centred(n * m);
  std::vector<double> norm(n, 0.0);
  PearsonDistances out{SquareMatrix(n, 0.0), std::vector<bool>(n, false)};
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto c : columns) {
      const double v = features.value(r, c);
      mean += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    mean /= static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double v = features.value(r, columns[k]) - mean;
      centred[r * m + k] = v;
      norm[r] += v * v;
    }
    norm[r] = std::sqrt(norm[r]);
    if (lo == hi || !(norm[r] > 0.0)) out.zero_variance[r] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 1.0;
      if (!out.zero_variance[i] && !out.zero_variance[j]) {
        double dot = 0.0;
        for (std::size_t k = 0; k < m; ++k) dot += centred[i * m + k] * centred[j * m + k];
        const double r = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
        d = 1.0 - r;
      }
      out.distance(i, j) = out.distance(j, i) = d;
    }
  }
  return out;
}

std::vector<int> average_linkage_labels(const SquareMatrix& distance, int k) {
  const std::size_t n = distance.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(fmt::format("cannot cut {} items into {} clusters", n, k));
  }
  SquareMatrix d = distance;
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> owner(n);
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  for (std::size_t clusters = n; clusters > static_cast<std::size_t>(k); --clusters) {
    std::size_t best_a = 0, best_b = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (active[b] && d(a, b) < best) {
          best = d(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    const double wa = static_cast<double>(size[best_a]), wb = static_cast<double>(size[best_b]);
    for (std::size_t x = 0; x < n; ++x) {
      if (!active[x] || x == best_a || x == best_b) continue;
      const double merged = (wa * d(best_a, x) + wb * d(best_b, x)) / (wa + wb);
      d(best_a, x) = d(x, best_a) = merged;
    }
    size[best_a] += size[best_b];
    active[best_b] = false;
    for (auto& o : owner) {
      if (o == best_b) o = best_a;
    }
  }
  std::vector<int> labels(n, 0);
  std::map<std::size_t, int> numbering;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = numbering.try_emplace(owner[i], static_cast<int>(numbering.size()) + 1);
    labels[i] = it->second;
  }
  return labels;
}

namespace {

struct Counts {
  std::vector<std::uint32_t> together, sampled;
  explicit Counts(std::size_t n) : together(n * n, 0), sampled(n * n, 0) {}
};

void run_iterations(const SquareMatrix& distance, const ConsensusOptions& options, std::size_t draw,
                    int first, int stride, Counts& counts) {
  const std::size_t n = distance.size();
  std::vector<std::size_t> pool(n);
  for (int it = first; it < options.iterations; it += stride) {
    Engine engine(derive_seed(options.seed, static_cast<std::uint64_t>(it)));
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t s = 0; s < draw; ++s) {
      const auto pick = s + uniform_index(engine, n - s);
      std::swap(pool[s], pool[pick]);
    }
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(draw));
    std::sort(chosen.begin(), chosen.end());
    SquareMatrix sub(draw);
    for (std::size_t a = 0; a < draw; ++a) {
      for (std::size_t b = 0; b < draw; ++b) sub(a, b) = distance(chosen[a], chosen[b]);
    }
    const auto labels = average_linkage_labels(sub, options.k);
    for (std::size_t a = 0; a < draw; ++a) {
      for (std::size_t b = a + 1; b < draw; ++b) {
        const std::size_t idx = chosen[a] * n + chosen[b];
        ++counts.sampled[idx];
        if (labels[a] == labels[b]) ++counts.together[idx];
      }
    }
  }
}

}  // namespace

ConsensusResult consensus_cluster(const SquareMatrix& distance, const ConsensusOptions& options) {
  const std::size_t n = distance.size();
  if (options.k < 2) throw Error("consensus clustering needs k >= 2");
  if (n < 2 * static_cast<std::size_t>(options.k)) {
    throw Error(fmt::format("consensus clustering with k={} needs at least {} datasets, got {}", options.k,
                            2 * options.k, n));
  }
  if (options.iterations < 1) throw Error("consensus clustering needs at least one iteration");
  if (!(options.subsample > 0.0 && options.subsample <= 1.0)) throw Error("subsample fraction must be in (0, 1]");

  bool uniform = true;
  for (std::size_t i = 0; i < n && uniform; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(i, j) != distance(0, 1)) {
        uniform = false;
        break;
      }
    }
  }
  if (uniform) log::warn("all pairwise distances are equal; the clustering has no structure to recover");

  const auto draw = std::clamp(static_cast<std::size_t>(std::ceil(options.subsample * static_cast<double>(n) - 1e-9)),
                               static_cast<std::size_t>(options.k), n);
  const unsigned jobs = std::clamp(options.jobs, 1u, static_cast<unsigned>(options.iterations));
  std::vector<Counts> partial(jobs, Counts(n));
  if (jobs == 1) {
    run_iterations(distance, options, draw, 0, 1, partial[0]);
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < jobs; ++t) {
      workers.emplace_back(run_iterations, std::cref(distance), std::cref(options), draw, static_cast<int>(t),
                           static_cast<int>(jobs), std::ref(partial[t]));
    }
    for (auto& w : workers) w.join();
  }

  ConsensusResult result;
  result.k = options.k;
  result.n = n;
  result.consensus.assign(n * n, std::nullopt);
  SquareMatrix final_distance(n, 0.0);
  std::size_t never = 0;
  for (std::size_t i = 0; i < n; ++i) {
    result.consensus[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      std::uint64_t together = 0, sampled = 0;
      for (const auto& c : partial) {
        together += c.together[i * n + j];
        sampled += c.sampled[i * n + j];
      }
      std::optional<double> value;
      if (sampled > 0) value = static_cast<double>(together) / static_cast<double>(sampled);
      else ++never;
      result.consensus[i * n + j] = result.consensus[j * n + i] = value;
      final_distance(i, j) = final_distance(j, i) = value ? 1.0 - *value : 1.0;
    }
  }
  if (never > 0) log::warn("{} dataset pairs were never sampled together; treated as distance 1", never);
  result.labels = average_linkage_labels(final_distance, options.k);
  return result;
}

ConsensusResult consensus_cluster(const FeatureMatrix& features, const ConsensusOptions& options) {
  auto pearson = pearson_distance(features);
  const auto flagged = std::count(pearson.zero_variance.begin(), pearson.zero_variance.end(), true);
  if (flagged > 0) log::warn("{} datasets have zero feature variance; Pearson distance set to 1", flagged);
  auto result = consensus_cluster(pearson.distance, options);
  result.zero_variance = std::move(pearson.zero_variance);
  return result;
}

OverlapResult overlap_accuracy(const std::vector<int>& labels, const std::vector<std::string>& sites) {
  if (labels.size() != sites.size()) throw Error("label and site counts differ");
  OverlapResult out;
  out.sites = sites;
  std::sort(out.sites.begin(), out.sites.end());
  out.sites.erase(std::unique(out.sites.begin(), out.sites.end()), out.sites.end());
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  if (static_cast<std::size_t>(k) != out.sites.size()) {
    throw Error(fmt::format("cluster count {} differs from site count {}", k, out.sites.size()));
  }
  const std::size_t s_count = out.sites.size();
  std::vector<std::vector<std::size_t>> overlap(k, std::vector<std::size_t>(s_count, 0));
  std::vector<std::size_t> cluster_size(k, 0), site_size(s_count, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > k) throw Error("cluster labels must be in 1..k");
    const auto s = static_cast<std::size_t>(
        std::lower_bound(out.sites.begin(), out.sites.end(), sites[i]) - out.sites.begin());
    ++overlap[labels[i] - 1][s];
    ++cluster_size[labels[i] - 1];
    ++site_size[s];
  }
  out.precision.assign(k, std::vector<double>(s_count, 0.0));
  out.recall.assign(k, std::vector<double>(s_count, 0.0));
  struct Pair {
    double f1;
    int cluster;
    std::size_t site;
  };
  std::vector<Pair> pairs;
  for (int c = 0; c < k; ++c) {
    for (std::size_t s = 0; s < s_count; ++s) {
      const double tp = static_cast<double>(overlap[c][s]);
      const double p = cluster_size[c] ? tp / static_cast<double>(cluster_size[c]) : 0.0;
      const double r = tp / static_cast<double>(site_size[s]);
      out.precision[c][s] = p;
      out.recall[c][s] = r;
      pairs.push_back({p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0, c, s});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.f1 > b.f1; });
  out.accuracy.assign(s_count, 0.0);
  out.matched_cluster.assign(s_count, 0);
  std::vector<bool> cluster_used(k, false), site_used(s_count, false);
  for (const auto& p : pairs) {
    if (cluster_used[p.cluster] || site_used[p.site]) continue;
    cluster_used[p.cluster] = site_used[p.site] = true;
    out.matched_cluster[p.site] = p.cluster + 1;
    out.accuracy[p.site] = static_cast<double>(overlap[p.cluster][p.site]) / static_cast<double>(site_size[p.site]);
  }
  return out;
}

}  // namespace mrqc
