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

#include "mrqc/foreground.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace mrqc {

void validate(const BlendWeights& w) {
  const bool in_range = w.original >= 0.0 && w.original <= 1.0 && w.equalized >= 0.0 && w.equalized <= 1.0;
  if (!in_range || std::abs(w.original + w.equalized - 1.0) > 1e-9) {
    throw Error(fmt::format("blend weights ({}, {}) must be non-negative and sum to 1", w.original,
                            w.equalized));
  }
}

ForegroundMask::ForegroundMask(Dims dims, MaskMode mode)
    : dims_(dims),
      mode_(mode),
      bits_(dims.voxel_count(), 0),
      thresholded_(dims.voxel_count(), 0),
      object_count_(dims.slices, 0),
      status_(dims.slices, SliceStatus::ok) {}

std::size_t ForegroundMask::foreground_count(std::size_t z) const {
  const auto s = slice(z);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), std::uint8_t{1}));
}

std::vector<double> equalize_histogram(std::span<const double> values) {
  if (values.empty()) throw Error("equalize_histogram: empty input");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(values.size());
  const double n = static_cast<double>(values.size());
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t end = k;
    while (end < order.size() && values[order[end]] == values[order[k]]) ++end;
    const double cdf = static_cast<double>(end) / n;
    for (std::size_t m = k; m < end; ++m) out[order[m]] = cdf;
    k = end;
  }
  return out;
}

std::optional<double> try_otsu_threshold(std::span<const double> values) {
  constexpr int kBins = 256;
  if (values.empty()) return std::nullopt;
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it, hi = *max_it;
  if (!(hi > lo)) return std::nullopt;
  const double width = (hi - lo) / kBins;

  std::array<double, kBins> count{};
  std::array<double, kBins> bin_min, bin_max;
  bin_min.fill(std::numeric_limits<double>::infinity());
  bin_max.fill(-std::numeric_limits<double>::infinity());
  for (double v : values) {
    const int b = std::min(kBins - 1, static_cast<int>((v - lo) / width));
    count[b] += 1.0;
    bin_min[b] = std::min(bin_min[b], v);
    bin_max[b] = std::max(bin_max[b], v);
  }
  double total = 0.0, total_sum = 0.0;
  for (int b = 0; b < kBins; ++b) {
    total += count[b];
    total_sum += count[b] * (lo + (b + 0.5) * width);
  }
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int b = 0; b < kBins - 1; ++b) {
    w0 += count[b];
    sum0 += count[b] * (lo + (b + 0.5) * width);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (total_sum - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  // Midway between the largest lower-class sample and the smallest upper-class
  // sample, so `v > t` reproduces the histogram split exactly.
  double lower = -std::numeric_limits<double>::infinity(), upper = std::numeric_limits<double>::infinity();
  for (int b = 0; b <= best_bin; ++b) lower = std::max(lower, bin_max[b]);
  for (int b = best_bin + 1; b < kBins; ++b) upper = std::min(upper, bin_min[b]);
  return 0.5 * (lower + upper);
}

double otsu_threshold(std::span<const double> values) {
  const auto t = try_otsu_threshold(values);
  if (!t) throw DegenerateInput("otsu_threshold: fewer than two distinct values");
  return *t;
}

std::vector<int> label_components(std::span<const std::uint8_t> mask, std::size_t rows, std::size_t cols,
                                  int* count) {
  std::vector<int> labels(mask.size(), 0);
  std::vector<std::size_t> stack;
  int next = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels[start]) continue;
    labels[start] = ++next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(p / cols), j = static_cast<std::ptrdiff_t>(p % cols);
      for (std::ptrdiff_t di = -1; di <= 1; ++di) {
        for (std::ptrdiff_t dj = -1; dj <= 1; ++dj) {
          const std::ptrdiff_t ni = i + di, nj = j + dj;
          if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(rows) || nj >= static_cast<std::ptrdiff_t>(cols)) continue;
          const std::size_t q = static_cast<std::size_t>(ni) * cols + static_cast<std::size_t>(nj);
          if (mask[q] && !labels[q]) {
            labels[q] = next;
            stack.push_back(q);
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

namespace {

struct Point {
  double x, y;
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Point> monotone_chain(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
              return a.x == b.x && a.y == b.y;
            }), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

std::vector<std::uint8_t> fill_convex_hull(std::span<const std::uint8_t> mask, std::size_t rows,
                                           std::size_t cols) {
  std::vector<std::uint8_t> out(mask.size(), 0);
  std::vector<Point> extremes;
  for (std::size_t i = 0; i < rows; ++i) {
    std::ptrdiff_t first = -1, last = -1;
    for (std::size_t j = 0; j < cols; ++j) {
      if (mask[i * cols + j]) {
        if (first < 0) first = static_cast<std::ptrdiff_t>(j);
        last = static_cast<std::ptrdiff_t>(j);
      }
    }
    if (first >= 0) {
      extremes.push_back({static_cast<double>(first), static_cast<double>(i)});
      extremes.push_back({static_cast<double>(last), static_cast<double>(i)});
    }
  }
  if (extremes.empty()) return out;
  const auto hull = monotone_chain(std::move(extremes));
  const std::size_t m = hull.size();
  constexpr double kEps = 1e-9;
  double ymin = hull[0].y, ymax = hull[0].y;
  for (const auto& p : hull) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  for (auto y = static_cast<std::size_t>(ymin); y <= static_cast<std::size_t>(ymax); ++y) {
    const double yy = static_cast<double>(y);
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    for (std::size_t e = 0; e < m; ++e) {
      const Point& p = hull[e];
      const Point& q = hull[(e + 1) % m];
      if (yy < std::min(p.y, q.y) - kEps || yy > std::max(p.y, q.y) + kEps) continue;
      if (p.y == q.y) {
        xmin = std::min({xmin, p.x, q.x});
        xmax = std::max({xmax, p.x, q.x});
      } else {
        const double x = p.x + (yy - p.y) * (q.x - p.x) / (q.y - p.y);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
      }
    }
    if (xmin > xmax) continue;
    const auto from = static_cast<std::ptrdiff_t>(std::ceil(xmin - kEps));
    const auto to = static_cast<std::ptrdiff_t>(std::floor(xmax + kEps));
    for (auto x = std::max<std::ptrdiff_t>(0, from); x <= to && x < static_cast<std::ptrdiff_t>(cols); ++x) {
      out[y * cols + static_cast<std::size_t>(x)] = 1;
    }
  }
  return out;
}

namespace {

std::size_t min_object_area(const Dims& dims) {
  return static_cast<std::size_t>(std::ceil(kMinObjectFraction * static_cast<double>(dims.slice_size())));
}

/// Keeps components at or above the area floor; returns the surviving label ids.
std::vector<int> kept_components(const std::vector<int>& labels, int count, std::size_t floor) {
  std::vector<std::size_t> area(static_cast<std::size_t>(count) + 1, 0);
  for (int l : labels) {
    if (l) ++area[static_cast<std::size_t>(l)];
  }
  std::vector<int> kept;
  for (int l = 1; l <= count; ++l) {
    if (area[static_cast<std::size_t>(l)] >= floor) kept.push_back(l);
  }
  return kept;
}

std::vector<std::uint8_t> hull_per_component(const std::vector<int>& labels, const std::vector<int>& kept,
                                             std::size_t rows, std::size_t cols) {
  std::vector<std::uint8_t> out(labels.size(), 0);
  std::vector<std::uint8_t> single(labels.size());
  for (int l : kept) {
    for (std::size_t p = 0; p < labels.size(); ++p) single[p] = labels[p] == l;
    const auto hull = fill_convex_hull(single, rows, cols);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] |= hull[p];
  }
  return out;
}

}  // namespace

ForegroundMask detect_foreground(const Volume& volume, const BlendWeights& weights, MaskMode mode) {
  validate(weights);
  const Dims& dims = volume.dims();
  const std::size_t area = dims.slice_size();
  ForegroundMask mask(dims, mode);

  std::vector<std::vector<double>> normalized(dims.slices), equalized(dims.slices);
  std::vector<std::optional<double>> t_norm(dims.slices), t_eq(dims.slices);
  for (std::size_t z = 0; z < dims.slices; ++z) {
    const SliceView s = volume.slice(z);
    const auto [lo, hi] = std::minmax_element(s.data.begin(), s.data.end());
    if (!(*hi > *lo)) {
      mask.set_status(z, SliceStatus::degenerate);
      continue;
    }
    auto& norm = normalized[z];
    norm.resize(area);
    const double span = *hi - *lo;
    for (std::size_t p = 0; p < area; ++p) norm[p] = (s.data[p] - *lo) / span;
    equalized[z] = equalize_histogram(norm);
    t_norm[z] = try_otsu_threshold(norm);
    t_eq[z] = try_otsu_threshold(equalized[z]);
  }

  const auto mean_of = [](const std::vector<std::optional<double>>& ts) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : ts) {
      if (t) {
        sum += *t;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  const auto volume_t_norm = mean_of(t_norm);
  const auto volume_t_eq = mean_of(t_eq);
  if (!volume_t_norm || !volume_t_eq) {
    throw DatasetError("foreground detection failed: every slice is degenerate");
  }

  std::vector<double> combined(area);
  const std::size_t floor = min_object_area(dims);
  for (std::size_t z = 0; z < dims.slices; ++z) {
    if (mask.status(z) == SliceStatus::degenerate) continue;
    const auto& norm = normalized[z];
    const auto& eq = equalized[z];
    for (std::size_t p = 0; p < area; ++p) {
      const double first = norm[p] > *volume_t_norm ? norm[p] : 0.0;
      const double second = eq[p] > *volume_t_eq ? eq[p] : 0.0;
      combined[p] = weights.original * first + weights.equalized * second;
    }
    auto thresholded = mask.thresholded(z);
    if (const auto t = try_otsu_threshold(combined)) {
      for (std::size_t p = 0; p < area; ++p) thresholded[p] = combined[p] > *t;
    } else {
      // Constant blend: either everything survived both estimates or nothing did.
      const std::uint8_t all = combined[0] > 0.0;
      std::fill(thresholded.begin(), thresholded.end(), all);
    }

    auto out = mask.slice(z);
    if (mode == MaskMode::single_region) {
      // Isolated noise pixels would stretch the hull; drop components under
      // the object floor unless that leaves nothing.
      int n_raw = 0;
      const auto labels = label_components(thresholded, dims.rows, dims.cols, &n_raw);
      const auto kept = kept_components(labels, n_raw, floor);
      std::vector<std::uint8_t> hull_input(thresholded.begin(), thresholded.end());
      if (!kept.empty() && static_cast<int>(kept.size()) < n_raw) {
        for (std::size_t p = 0; p < area; ++p) {
          hull_input[p] = labels[p] && std::find(kept.begin(), kept.end(), labels[p]) != kept.end();
        }
      }
      const auto hull = fill_convex_hull(hull_input, dims.rows, dims.cols);
      std::copy(hull.begin(), hull.end(), out.begin());
      int n = 0;
      label_components(out, dims.rows, dims.cols, &n);
      mask.set_object_count(z, n);
    } else {
      int n = 0;
      const auto labels = label_components(thresholded, dims.rows, dims.cols, &n);
      const auto kept = kept_components(labels, n, floor);
      const auto hulls = hull_per_component(labels, kept, dims.rows, dims.cols);
      std::copy(hulls.begin(), hulls.end(), out.begin());
      mask.set_object_count(z, static_cast<int>(kept.size()));
    }
  }
  return mask;
}

std::vector<ForegroundMask> split_objects(const ForegroundMask& mask) {
  const Dims& dims = mask.dims();
  const std::size_t area = dims.slice_size();
  const std::size_t floor = min_object_area(dims);

  // Node = (slice, component label) for every component above the floor.
  struct Node {
    std::size_t z;
    int label;
    double centroid_row, centroid_col;
  };
  std::vector<Node> nodes;
  std::vector<std::vector<int>> labels(dims.slices);
  std::vector<std::map<int, std::size_t>> node_of(dims.slices);
  for (std::size_t z = 0; z < dims.slices; ++z) {
    if (mask.status(z) == SliceStatus::degenerate) continue;
    int n = 0;
    labels[z] = label_components(mask.thresholded(z), dims.rows, dims.cols, &n);
    std::vector<double> sum_r(static_cast<std::size_t>(n) + 1, 0.0), sum_c(sum_r.size(), 0.0);
    std::vector<std::size_t> count(sum_r.size(), 0);
    for (std::size_t p = 0; p < area; ++p) {
      const auto l = static_cast<std::size_t>(labels[z][p]);
      if (!l) continue;
      sum_r[l] += static_cast<double>(p / dims.cols);
      sum_c[l] += static_cast<double>(p % dims.cols);
      ++count[l];
    }
    for (int l : kept_components(labels[z], n, floor)) {
      const auto li = static_cast<std::size_t>(l);
      node_of[z][l] = nodes.size();
      nodes.push_back({z, l, sum_r[li] / static_cast<double>(count[li]), sum_c[li] / static_cast<double>(count[li])});
    }
  }

  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t z = 1; z < dims.slices; ++z) {
    if (labels[z].empty() || labels[z - 1].empty()) continue;
    for (std::size_t p = 0; p < area; ++p) {
      const auto a = node_of[z - 1].find(labels[z - 1][p]);
      const auto b = node_of[z].find(labels[z][p]);
      if (a == node_of[z - 1].end() || b == node_of[z].end()) continue;
      const std::size_t ra = find(a->second), rb = find(b->second);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  // Roots are the earliest node of each object; order by its slice and centroid.
  std::vector<std::size_t> roots;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (find(k) == k) roots.push_back(k);
  }
  std::stable_sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) {
    if (nodes[a].z != nodes[b].z) return nodes[a].z < nodes[b].z;
    if (nodes[a].centroid_col != nodes[b].centroid_col) return nodes[a].centroid_col < nodes[b].centroid_col;
    return nodes[a].centroid_row < nodes[b].centroid_row;
  });

  std::vector<ForegroundMask> objects;
  objects.reserve(roots.size());
  for (std::size_t root : roots) {
    ForegroundMask object(dims, MaskMode::per_object);
    for (std::size_t z = 0; z < dims.slices; ++z) object.set_status(z, mask.status(z));
    std::vector<std::vector<int>> members(dims.slices);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (find(k) == root) members[nodes[k].z].push_back(nodes[k].label);
    }
    for (std::size_t z = 0; z < dims.slices; ++z) {
      if (members[z].empty()) continue;
      auto thresholded = object.thresholded(z);
      for (std::size_t p = 0; p < area; ++p) {
        thresholded[p] = std::find(members[z].begin(), members[z].end(), labels[z][p]) != members[z].end();
      }
      const auto hulls = hull_per_component(labels[z], members[z], dims.rows, dims.cols);
      auto out = object.slice(z);
      std::copy(hulls.begin(), hulls.end(), out.begin());
      object.set_object_count(z, static_cast<int>(members[z].size()));
    }
    objects.push_back(std::move(object));
  }
  return objects;
}

}  // namespace mrqc
