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

#include "mrqc/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <png.h>

namespace mrqc {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMissing = "NA";
constexpr std::array<std::string_view, 10> kMetadataColumns = {"MFR", "MFS", "VRX", "VRY", "VRZ",
                                                               "ROWS", "COLS", "TR", "TE", "NUM"};
constexpr std::array<std::string_view, 5> kTrailingColumns = {"tsne_x", "tsne_y", "umap_x", "umap_y", "imputed"};

std::string sanitize(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(kMissing); }
std::string cell(const std::optional<std::string>& v) {
  return v && !v->empty() ? sanitize(*v) : std::string(kMissing);
}
std::string count_cell(std::size_t v) { return v > 0 ? fmt::format("{}", v) : std::string(kMissing); }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s, std::size_t line) {
  if (s == kMissing) return std::nullopt;
  const std::string text(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw Error(fmt::format("results.tsv line {}: '{}' is not a number", line, text));
  }
  return v;
}

std::optional<std::string> parse_text(std::string_view s) {
  if (s == kMissing) return std::nullopt;
  return std::string(s);
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  const auto v = parse_number(s, line);
  if (!v) return 0;
  if (*v < 0 || *v != std::floor(*v)) throw Error(fmt::format("results.tsv line {}: bad count '{}'", line, s));
  return static_cast<std::size_t>(*v);
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::string(kMissing);
  if (value == 0.0) return "0";
  return fmt::format("{:.6g}", value);
}

std::vector<std::string> result_columns(const CohortTable& table) {
  std::vector<std::string> cols = {"id"};
  if (table.per_object) cols.emplace_back("object");
  cols.emplace_back("status");
  for (auto c : kMetadataColumns) cols.emplace_back(c);
  for (auto c : kMeasureNames) cols.emplace_back(c);
  for (auto c : kTrailingColumns) cols.emplace_back(c);
  for (const auto& t : table.extra_tags) cols.push_back(sanitize(t));
  return cols;
}

std::string format_results(const CohortTable& table) {
  std::string out;
  const auto header = result_columns(table);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += '\t';
    out += header[i];
  }
  out += '\n';
  std::vector<std::string> fields;
  for (const auto& row : table.rows) {
    fields.clear();
    fields.push_back(sanitize(row.id));
    if (table.per_object) fields.push_back(row.object ? fmt::format("{}", *row.object) : std::string(kMissing));
    fields.push_back(sanitize(row.status));
    const auto& m = row.metadata;
    fields.push_back(cell(m.manufacturer));
    fields.push_back(cell(m.field_strength));
    fields.push_back(cell(m.spacing.x));
    fields.push_back(cell(m.spacing.y));
    fields.push_back(cell(m.spacing.z));
    fields.push_back(count_cell(m.rows));
    fields.push_back(count_cell(m.cols));
    fields.push_back(cell(m.repetition_time));
    fields.push_back(cell(m.echo_time));
    fields.push_back(count_cell(m.slices));
    for (const auto& v : row.measures) fields.push_back(cell(v));
    const auto point = [&](const std::optional<Point2>& p) {
      fields.push_back(p ? format_number(p->x) : std::string(kMissing));
      fields.push_back(p ? format_number(p->y) : std::string(kMissing));
    };
    point(row.tsne);
    point(row.umap);
    fields.push_back(row.imputed ? "1" : "0");
    for (const auto& tag : table.extra_tags) {
      std::optional<std::string> value;
      for (const auto& [name, v] : m.extra) {
        if (name == tag) value = v;
      }
      fields.push_back(cell(value));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += '\t';
      out += fields[i];
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(fmt::format("write failed for {}", tmp.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
  }
}

fs::path write_results(const CohortTable& table, const fs::path& cohort_dir) {
  const auto path = cohort_dir / "results.tsv";
  write_file_atomic(path, format_results(table));
  return path;
}

CohortTable parse_results(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  if (lines.empty()) throw Error("results.tsv is empty");
  const auto header = split_tabs(lines[0]);
  CohortTable table;
  table.per_object = header.size() > 1 && header[1] == "object";
  const auto expected = result_columns(table);
  const std::size_t fixed = expected.size();
  if (header.size() < fixed) throw Error("results.tsv header is missing columns");
  for (std::size_t i = 0; i < fixed; ++i) {
    if (header[i] != expected[i]) {
      throw Error(fmt::format("results.tsv column {} is '{}', expected '{}'", i + 1, header[i], expected[i]));
    }
  }
  for (std::size_t i = fixed; i < header.size(); ++i) table.extra_tags.emplace_back(header[i]);

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = split_tabs(lines[ln]);
    if (f.size() != header.size()) {
      throw Error(fmt::format("results.tsv line {} has {} fields, expected {}", ln + 1, f.size(), header.size()));
    }
    CohortRow row;
    std::size_t i = 0;
    row.id = std::string(f[i++]);
    if (table.per_object) {
      const auto obj = parse_number(f[i++], ln + 1);
      if (obj) row.object = static_cast<int>(*obj);
    }
    row.status = std::string(f[i++]);
    auto& m = row.metadata;
    m.manufacturer = parse_text(f[i++]);
    m.field_strength = parse_number(f[i++], ln + 1);
    m.spacing.x = parse_number(f[i++], ln + 1);
    m.spacing.y = parse_number(f[i++], ln + 1);
    m.spacing.z = parse_number(f[i++], ln + 1);
    m.rows = parse_count(f[i++], ln + 1);
    m.cols = parse_count(f[i++], ln + 1);
    m.repetition_time = parse_number(f[i++], ln + 1);
    m.echo_time = parse_number(f[i++], ln + 1);
    m.slices = parse_count(f[i++], ln + 1);
    for (auto& v : row.measures) v = parse_number(f[i++], ln + 1);
    const auto point = [&]() -> std::optional<Point2> {
      const auto x = parse_number(f[i++], ln + 1);
      const auto y = parse_number(f[i++], ln + 1);
      if (x && y) return Point2{*x, *y};
      return std::nullopt;
    };
    row.tsne = point();
    row.umap = point();
    row.imputed = f[i++] == "1";
    for (const auto& tag : table.extra_tags) m.extra.emplace_back(tag, parse_text(f[i++]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CohortTable read_results(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_results(buffer.str());
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw DegenerateInput("percentile of an empty sample");
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (b - a) * (pos - static_cast<double>(lo));
}

std::pair<std::size_t, std::size_t> thumbnail_size(std::size_t rows, std::size_t cols) {
  const std::size_t edge = std::max(rows, cols);
  if (edge <= kThumbnailMaxEdge) return {rows, cols};
  const double scale = static_cast<double>(kThumbnailMaxEdge) / static_cast<double>(edge);
  const auto shrink = [&](std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(n) * scale)));
  };
  return {shrink(rows), shrink(cols)};
}

namespace {

void write_png(const fs::path& path, const std::vector<std::uint8_t>& pixels, std::size_t rows, std::size_t cols) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(fmt::format("cannot write {}: {}", path.string(), std::strerror(errno)));
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    std::fclose(fp);
    throw Error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(fmt::format("PNG encoding failed for {}", path.string()));
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * cols));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw Error(fmt::format("cannot close {}", path.string()));
}

}  // namespace

std::vector<fs::path> write_thumbnails(const Volume& volume, const fs::path& cohort_dir) {
  const auto& dims = volume.dims();
  const auto& voxels = volume.voxels();
  std::vector<double> sample(voxels.begin(), voxels.end());
  const double lo = percentile(sample, 1.0);
  const double hi = percentile(std::move(sample), 99.0);

  const auto dir = cohort_dir / volume.id();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  const auto [out_rows, out_cols] = thumbnail_size(dims.rows, dims.cols);
  const int width = std::max(3, static_cast<int>(std::to_string(dims.slices - 1).size()));
  std::vector<std::uint8_t> pixels(out_rows * out_cols);
  std::vector<fs::path> paths;
  for (std::size_t z = 0; z < dims.slices; ++z) {
    const auto slice = volume.slice(z);
    for (std::size_t r = 0; r < out_rows; ++r) {
      const std::size_t r0 = r * dims.rows / out_rows;
      const std::size_t r1 = std::max(r0 + 1, (r + 1) * dims.rows / out_rows);
      for (std::size_t c = 0; c < out_cols; ++c) {
        const std::size_t c0 = c * dims.cols / out_cols;
        const std::size_t c1 = std::max(c0 + 1, (c + 1) * dims.cols / out_cols);
        double sum = 0.0;
        for (std::size_t i = r0; i < r1; ++i) {
          for (std::size_t j = c0; j < c1; ++j) sum += slice.at(i, j);
        }
        const double mean = sum / static_cast<double>((r1 - r0) * (c1 - c0));
        double level = 128.0;
        if (hi > lo) level = std::clamp((mean - lo) / (hi - lo), 0.0, 1.0) * 255.0;
        pixels[r * out_cols + c] = static_cast<std::uint8_t>(std::lround(level));
      }
    }
    auto path = dir / fmt::format("{}_{:0{}}.png", volume.id(), z, width);
    write_png(path, pixels, out_rows, out_cols);
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace mrqc
