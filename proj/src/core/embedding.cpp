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

#include "mrqc/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mrqc/random.hpp"

namespace mrqc {

std::array<std::string_view, kFeatureCount> feature_names() {
  std::array<std::string_view, kFeatureCount> names = {"VRX", "VRY", "VRZ", "ROWS", "COLS", "TR", "TE", "NUM"};
  for (std::size_t m = 0; m < kMeasureCount; ++m) names[kMetadataFeatureCount + m] = kMeasureNames[m];
  return names;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0), missing_(rows * cols, 1) {}

std::optional<double> FeatureMatrix::get(std::size_t r, std::size_t c) const {
  if (missing(r, c)) return std::nullopt;
  return values_[r * cols_ + c];
}

void FeatureMatrix::set(std::size_t r, std::size_t c, std::optional<double> value) {
  const bool usable = value && std::isfinite(*value);
  values_[r * cols_ + c] = usable ? *value : 0.0;
  missing_[r * cols_ + c] = usable ? 0 : 1;
}

void FeatureMatrix::append_row(const std::vector<std::optional<double>>& row) {
  if (rows_ == 0 && cols_ == 0) cols_ = row.size();
  if (row.size() != cols_) throw Error("FeatureMatrix: row width mismatch");
  ++rows_;
  values_.resize(rows_ * cols_, 0.0);
  missing_.resize(rows_ * cols_, 1);
  for (std::size_t c = 0; c < cols_; ++c) set(rows_ - 1, c, row[c]);
}

std::vector<std::optional<double>> feature_row(const MetadataRecord& m, const MeasureValues& measures) {
  std::vector<std::optional<double>> row = {
      m.spacing.x, m.spacing.y, m.spacing.z,
      static_cast<double>(m.rows), static_cast<double>(m.cols),
      m.repetition_time, m.echo_time, static_cast<double>(m.slices)};
  row.insert(row.end(), measures.begin(), measures.end());
  return row;
}

FeatureMatrix whiten(const FeatureMatrix& in) {
  if (in.rows() < 2) throw DegenerateInput("whiten: at least two datasets are required");
  FeatureMatrix out(in.rows(), in.cols());
  out.constant_.assign(in.cols(), false);
  out.imputed_.assign(in.rows(), false);
  for (std::size_t c = 0; c < in.cols(); ++c) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t n = 0;
    for (std::size_t r = 0; r < in.rows(); ++r) {
      if (in.missing(r, c)) continue;
      const double v = in.value(r, c);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++n;
    }
    for (std::size_t r = 0; r < in.rows(); ++r) {
      if (n > 0 && in.missing(r, c)) out.imputed_[r] = true;
    }
    double sd = 0.0, mean = 0.0;
    if (n > 0 && lo != hi) {
      mean = sum / static_cast<double>(n);
      double ss = 0.0;
      // Imputed entries sit at the mean and add nothing to the sum of squares.
      for (std::size_t r = 0; r < in.rows(); ++r) {
        if (!in.missing(r, c)) ss += (in.value(r, c) - mean) * (in.value(r, c) - mean);
      }
      sd = std::sqrt(ss / static_cast<double>(in.rows()));
    }
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      out.constant_[c] = true;
      for (std::size_t r = 0; r < in.rows(); ++r) out.set(r, c, 0.0);
      continue;
    }
    for (std::size_t r = 0; r < in.rows(); ++r) {
      out.set(r, c, in.missing(r, c) ? 0.0 : (in.value(r, c) - mean) / sd);
    }
  }
  return out;
}

namespace {

std::vector<double> squared_distances(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double diff = x.value(i, c) - x.value(j, c);
        s += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = s;
    }
  }
  return d;
}

/// Row-conditional affinities matching the target perplexity, then symmetrized.
std::vector<double> joint_probabilities(const std::vector<double>& d2, std::size_t n, double perplexity) {
  const double target = std::log(perplexity);
  std::vector<double> p(n * n, 0.0);
  // Sums run over distances in sorted order so rows with equal distance
  // multisets (duplicates) get bit-identical conditionals.
  std::vector<std::pair<double, std::size_t>> others(n - 1);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, o = 0; j < n; ++j) {
      if (j != i) others[o++] = {d2[i * n + j], j};
    }
    std::sort(others.begin(), others.end());
    const double dmin = others.front().first;
    double beta = 1.0, lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 200; ++step) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t o = 0; o < others.size(); ++o) {
        const double shifted = others[o].first - dmin;
        row[o] = std::exp(-shifted * beta);
        sum += row[o];
        weighted += shifted * row[o];
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : 0.5 * (beta + lo);
      }
    }
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (std::size_t o = 0; o < others.size(); ++o) p[i * n + others[o].second] = row[o] / sum;
  }
  std::vector<double> joint(n * n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      joint[i * n + j] = p[i * n + j] + p[j * n + i];
      total += joint[i * n + j];
    }
  }
  for (auto& v : joint) v = std::max(v / total, 1e-12);
  for (std::size_t i = 0; i < n; ++i) joint[i * n + i] = 0.0;
  return joint;
}

/// First two principal-component scores, sign-fixed so each axis' largest
/// loading is positive. Empty when the data has no spread.
std::vector<Point2> pca_scores(const FeatureMatrix& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) m(i, c) = x.value(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
  }
  m.rowwise() -= m.colwise().mean();
  const Eigen::MatrixXd cov = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success || d < 2) return {};
  Eigen::MatrixXd axes(d, 2);
  axes.col(0) = solver.eigenvectors().col(d - 1);
  axes.col(1) = solver.eigenvectors().col(d - 2);
  if (!(solver.eigenvalues()(d - 1) > 1e-12)) return {};
  for (int k = 0; k < 2; ++k) {
    Eigen::Index arg = 0;
    axes.col(k).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, k) < 0) axes.col(k) *= -1.0;
  }
  const Eigen::MatrixXd scores = m * axes;
  std::vector<Point2> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {scores(i, 0), scores(i, 1)};
  return out;
}

}  // namespace

std::vector<Point2> tsne(const FeatureMatrix& x, std::uint64_t seed, const TsneOptions& options) {
  const std::size_t n = x.rows();
  if (n < kTsneMinRows) {
    throw DegenerateInput(fmt::format("t-SNE needs at least {} datasets, got {}", kTsneMinRows, n));
  }
  const double perplexity = std::min(options.perplexity, static_cast<double>(n - 1) / 3.0);
  const auto p = joint_probabilities(squared_distances(x), n, perplexity);

  std::vector<Point2> y = pca_scores(x);
  if (y.empty()) {
    Engine engine(seed);
    NormalSource normal;
    y.resize(n);
    for (auto& pt : y) pt = {normal(engine), normal(engine)};
  }
  double mean0 = 0.0;
  for (const auto& pt : y) mean0 += pt.x;
  mean0 /= static_cast<double>(n);
  double var0 = 0.0;
  for (const auto& pt : y) var0 += (pt.x - mean0) * (pt.x - mean0);
  const double sd0 = std::sqrt(var0 / static_cast<double>(n));
  const double scale = sd0 > 0.0 ? 1e-4 / sd0 : 1e-4;
  for (auto& pt : y) pt = {pt.x * scale, pt.y * scale};

  const double learning_rate = options.learning_rate > 0.0
                                   ? options.learning_rate
                                   : static_cast<double>(n) / options.early_exaggeration / 4.0;
  std::vector<Point2> update(n), gains(n, Point2{1.0, 1.0}), grad(n);
  std::vector<double> num(n * n, 0.0);
  for (int it = 0; it < options.iterations; ++it) {
    const bool early = it < options.exaggeration_iterations;
    const double exaggeration = early ? options.early_exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;

    double num_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[i].x - y[j].x, dy = y[i].y - y[j].y;
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = v;
        num_sum += 2.0 * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = std::max(num[i * n + j] / num_sum, 1e-12);
        const double coeff = (exaggeration * p[i * n + j] - q) * num[i * n + j];
        gx += coeff * (y[i].x - y[j].x);
        gy += coeff * (y[i].y - y[j].y);
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
    }
    const auto step = [&](double& g_dim, double& gain, double& upd, double& pos) {
      gain = upd * g_dim < 0.0 ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, 0.01);
      upd = momentum * upd - learning_rate * gain * g_dim;
      pos += upd;
    };
    for (std::size_t i = 0; i < n; ++i) {
      step(grad[i].x, gains[i].x, update[i].x, y[i].x);
      step(grad[i].y, gains[i].y, update[i].y, y[i].y);
    }
  }
  return y;
}

std::pair<double, double> fit_umap_curve(double min_dist, double spread) {
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples), ys(kSamples);
  for (int k = 0; k < kSamples; ++k) {
    xs[k] = 3.0 * spread * k / (kSamples - 1);
    ys[k] = xs[k] < min_dist ? 1.0 : std::exp(-(xs[k] - min_dist) / spread);
  }
  const auto residual_norm = [&](double a, double b) {
    double s = 0.0;
    for (int k = 0; k < kSamples; ++k) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[k], 2.0 * b)) - ys[k];
      s += r * r;
    }
    return s;
  };
  // Levenberg-Marquardt on (a, b).
  double a = 1.0, b = 1.0, lambda = 1e-3;
  double cost = residual_norm(a, b);
  for (int it = 0; it < 500; ++it) {
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
    for (int k = 0; k < kSamples; ++k) {
      const double x = xs[k];
      const double x2b = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double denom = 1.0 + a * x2b;
      const double f = 1.0 / denom;
      const double r = f - ys[k];
      const double da = -x2b / (denom * denom);
      const double db = x > 0.0 ? -a * x2b * 2.0 * std::log(x) / (denom * denom) : 0.0;
      jtj00 += da * da;
      jtj01 += da * db;
      jtj11 += db * db;
      jtr0 += da * r;
      jtr1 += db * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      const double m00 = jtj00 * (1.0 + lambda), m11 = jtj11 * (1.0 + lambda);
      const double det = m00 * m11 - jtj01 * jtj01;
      const double step_a = -(m11 * jtr0 - jtj01 * jtr1) / det;
      const double step_b = -(m00 * jtr1 - jtj01 * jtr0) / det;
      const double trial = residual_norm(a + step_a, b + step_b);
      if (trial < cost) {
        const double gain = cost - trial;
        a += step_a;
        b += step_b;
        cost = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = gain > 1e-15 * std::max(cost, 1e-300);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {a, b};
}

namespace {

struct Edge {
  std::size_t head, tail;
  double weight;
};

std::vector<Edge> fuzzy_graph(const FeatureMatrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  auto d = squared_distances(x);
  for (auto& v : d) v = std::sqrt(v);

  std::vector<double> membership(n * n, 0.0);
  const double target = std::log2(static_cast<double>(k));
  double mean_all = 0.0;
  for (double v : d) mean_all += v;
  mean_all /= static_cast<double>(n * n);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return d[i * n + a] != d[i * n + b] ? d[i * n + a] < d[i * n + b] : a < b;
                      });
    order.resize(k);
    double rho = 0.0, mean_knn = 0.0;
    for (auto j : order) {
      mean_knn += d[i * n + j];
      if (rho == 0.0 && d[i * n + j] > 0.0) rho = d[i * n + j];
    }
    mean_knn /= static_cast<double>(k);

    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), sigma = 1.0;
    for (int step = 0; step < 64; ++step) {
      double psum = 0.0;
      for (auto j : order) {
        const double gap = d[i * n + j] - rho;
        psum += gap > 0.0 ? std::exp(-gap / sigma) : 1.0;
      }
      if (std::abs(psum - target) < 1e-5) break;
      if (psum > target) {
        hi = sigma;
        sigma = 0.5 * (lo + hi);
      } else {
        lo = sigma;
        sigma = std::isinf(hi) ? sigma * 2.0 : 0.5 * (lo + hi);
      }
    }
    sigma = std::max(sigma, 1e-3 * (rho > 0.0 ? mean_knn : mean_all));
    if (!(sigma > 0.0)) sigma = 1e-3;
    for (auto j : order) membership[i * n + j] = std::exp(-std::max(0.0, d[i * n + j] - rho) / sigma);
  }

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = membership[i * n + j], b = membership[j * n + i];
      const double w = a + b - a * b;
      if (w > 0.0) edges.push_back({i, j, w});
    }
  }
  return edges;
}

std::vector<Point2> spectral_layout(const std::vector<Edge>& edges, std::size_t n, Engine& engine) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) w(static_cast<Eigen::Index>(e.head), static_cast<Eigen::Index>(e.tail)) = e.weight;
  const Eigen::VectorXd degree = w.rowwise().sum();
  std::vector<Point2> out;
  if (n < 4 || (degree.array() <= 0.0).any()) return out;
  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd laplacian = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
                                    inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) return out;
  Eigen::MatrixXd axes(static_cast<Eigen::Index>(n), 2);
  axes.col(0) = solver.eigenvectors().col(1);
  axes.col(1) = solver.eigenvectors().col(2);
  for (int k = 0; k < 2; ++k) {
    Eigen::Index arg = 0;
    axes.col(k).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, k) < 0) axes.col(k) *= -1.0;
  }
  const double max_abs = axes.cwiseAbs().maxCoeff();
  if (!(max_abs > 0.0)) return out;
  axes *= 10.0 / max_abs;
  NormalSource normal;
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {axes(static_cast<Eigen::Index>(i), 0) + 1e-4 * normal(engine),
              axes(static_cast<Eigen::Index>(i), 1) + 1e-4 * normal(engine)};
  }
  return out;
}

double clip(double v) { return std::clamp(v, -4.0, 4.0); }

std::vector<Point2> umap_layout(const FeatureMatrix& x, std::uint64_t seed, const UmapOptions& options);

}  // namespace

std::vector<Point2> umap(const FeatureMatrix& x, std::uint64_t seed, const UmapOptions& options) {
  const std::size_t n = x.rows();
  if (n < kUmapMinRows) {
    throw DegenerateInput(fmt::format("UMAP needs at least {} datasets, got {}", kUmapMinRows, n));
  }
  // Identical rows share one point.
  std::vector<std::size_t> representative(n), unique_rows;
  for (std::size_t r = 0; r < n; ++r) {
    representative[r] = unique_rows.size();
    for (std::size_t u = 0; u < unique_rows.size(); ++u) {
      bool same = true;
      for (std::size_t c = 0; c < x.cols() && same; ++c) same = x.value(r, c) == x.value(unique_rows[u], c);
      if (same) {
        representative[r] = u;
        break;
      }
    }
    if (representative[r] == unique_rows.size()) unique_rows.push_back(r);
  }
  if (unique_rows.size() == n || unique_rows.size() < kUmapMinRows) return umap_layout(x, seed, options);

  FeatureMatrix distinct(unique_rows.size(), x.cols());
  for (std::size_t u = 0; u < unique_rows.size(); ++u)
    for (std::size_t c = 0; c < x.cols(); ++c) distinct.set(u, c, x.value(unique_rows[u], c));
  const auto layout = umap_layout(distinct, seed, options);
  std::vector<Point2> out(n);
  for (std::size_t r = 0; r < n; ++r) out[r] = layout[representative[r]];
  return out;
}

namespace {

std::vector<Point2> umap_layout(const FeatureMatrix& x, std::uint64_t seed, const UmapOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t k = std::min(options.neighbors, n - 1);
  const auto [a, b] = fit_umap_curve(options.min_dist, options.spread);
  Engine engine(seed);

  std::vector<Edge> edges = fuzzy_graph(x, k);
  std::vector<Point2> y = spectral_layout(edges, n, engine);
  if (y.empty()) {
    y.resize(n);
    for (auto& pt : y) pt = {uniform_real(engine, -10.0, 10.0), uniform_real(engine, -10.0, 10.0)};
  }
  // Rescale each axis to [0, 10].
  for (int axis = 0; axis < 2; ++axis) {
    const auto get = [axis](Point2& p) -> double& { return axis == 0 ? p.x : p.y; };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto& p : y) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& p : y) get(p) = 10.0 * (get(p) - lo) / span;
  }

  const int epochs = options.epochs;
  double max_weight = 0.0;
  for (const auto& e : edges) max_weight = std::max(max_weight, e.weight);
  std::erase_if(edges, [&](const Edge& e) { return e.weight < max_weight / epochs; });

  const std::size_t m = edges.size();
  std::vector<double> per_sample(m), next_sample(m), per_negative(m), next_negative(m);
  for (std::size_t e = 0; e < m; ++e) {
    per_sample[e] = max_weight / edges[e].weight;
    next_sample[e] = per_sample[e];
    per_negative[e] = per_sample[e] / options.negative_sample_rate;
    next_negative[e] = per_negative[e];
  }

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / epochs;
    const double now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < m; ++e) {
      if (next_sample[e] > now) continue;
      Point2& yi = y[edges[e].head];
      Point2& yj = y[edges[e].tail];
      double dx = yi.x - yj.x, dy = yi.y - yj.y;
      double d2 = dx * dx + dy * dy;
      double coeff = 0.0;
      if (d2 > 0.0) coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
      const double gx = clip(coeff * dx), gy = clip(coeff * dy);
      yi.x += gx * alpha;
      yi.y += gy * alpha;
      yj.x -= gx * alpha;
      yj.y -= gy * alpha;
      next_sample[e] += per_sample[e];

      const auto negatives = static_cast<int>((now - next_negative[e]) / per_negative[e]);
      for (int s = 0; s < negatives; ++s) {
        const std::size_t other = uniform_index(engine, n);
        if (other == edges[e].head) continue;
        const Point2& yk = y[other];
        dx = yi.x - yk.x;
        dy = yi.y - yk.y;
        d2 = dx * dx + dy * dy;
        if (d2 > 0.0) {
          coeff = 2.0 * b / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0));
          yi.x += clip(coeff * dx) * alpha;
          yi.y += clip(coeff * dy) * alpha;
        } else {
          yi.x += 4.0 * alpha;
          yi.y += 4.0 * alpha;
        }
      }
      next_negative[e] += negatives * per_negative[e];
    }
  }
  return y;
}

}  // namespace

}  // namespace mrqc
