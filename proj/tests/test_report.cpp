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

#include <doctest.h>
#include <png.h>

#include <cmath>
#include <fstream>

#include "mrqc/report.hpp"
#include "mrqc/random.hpp"
#include "support/fixtures.hpp"

using namespace mrqc;
using mrqc::testing::ScratchDir;

namespace {

struct Gray {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;
};

Gray read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  REQUIRE(png_image_begin_read_from_file(&image, path.c_str()) != 0);
  CHECK((image.format & PNG_FORMAT_FLAG_COLOR) == 0);
  image.format = PNG_FORMAT_GRAY;
  Gray g{image.width, image.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(image))};
  REQUIRE(png_image_finish_read(&image, nullptr, g.pixels.data(), 0, nullptr) != 0);
  return g;
}

CohortRow sample_row(const std::string& id, double scale) {
  CohortRow row;
  row.id = id;
  row.metadata.manufacturer = "SIEMENS";
  row.metadata.field_strength = 1.5;
  row.metadata.spacing = {0.9375, 0.9375, 3.0};
  row.metadata.rows = 256;
  row.metadata.cols = 256;
  row.metadata.repetition_time = 2000.0;
  row.metadata.slices = 24;
  for (std::size_t m = 0; m < kMeasureCount; ++m) row.measures[m] = scale * (static_cast<double>(m) + 0.123456789);
  row.measures[static_cast<std::size_t>(Measure::snr3)] = std::nullopt;
  row.tsne = Point2{-12.3456789, 4.5};
  row.umap = Point2{3.0, 1e-7};
  return row;
}

CohortTable sample_table() {
  CohortTable t;
  t.rows = {sample_row("b_case", 1.0), sample_row("a_case", 1234.5)};
  t.rows[1].imputed = true;
  CohortRow failed;
  failed.id = "c_case";
  failed.status = "failed:truncated NIfTI data";
  t.rows.push_back(failed);
  return t;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out(1);
  for (char c : s) {
    if (c == sep) out.emplace_back();
    else out.back() += c;
  }
  return out;
}

}  // namespace

TEST_SUITE("format") {
  TEST_CASE("six significant digits") {
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-12.3456789) == "-12.3457");
    CHECK(format_number(1e-7) == "1e-07");
    CHECK(format_number(26.0205999) == "26.0206");
  }
  TEST_CASE("signed zero and non-finite") {
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(NAN) == "NA");
    CHECK(format_number(INFINITY) == "NA");
  }
}

TEST_SUITE("results.tsv") {
  TEST_CASE("column names and order") {
    CohortTable t;
    t.extra_tags = {"StationName", "0018|0087"};
    const auto cols = result_columns(t);
    const std::vector<std::string> expected = {
        "id",   "status", "MFR",  "MFS",  "VRX",  "VRY",    "VRZ",    "ROWS",   "COLS",   "TR",    "TE",
        "NUM",  "MEAN",   "RNG",  "VAR",  "CV",   "CPP",    "PSNR",   "SNR1",   "SNR2",   "SNR3",  "SNR4",
        "CNR",  "CVP",    "CJV",  "EFC",  "FBER", "tsne_x", "tsne_y", "umap_x", "umap_y", "imputed",
        "StationName", "0018|0087"};
    CHECK(cols == expected);
    t.per_object = true;
    CHECK(result_columns(t)[1] == "object");
  }

  TEST_CASE("layout: header plus one line per row, LF, NA tokens") {
    const auto text = format_results(sample_table());
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
    const auto lines = split(text.substr(0, text.size() - 1), '\n');
    REQUIRE(lines.size() == 4);
    const auto header = split(lines[0], '\t');
    for (const auto& line : lines) CHECK(split(line, '\t').size() == header.size());
    const auto col = [&](const std::string& name) {
      return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    const auto first = split(lines[1], '\t');
    CHECK(first[col("id")] == "b_case");
    CHECK(first[col("TE")] == "NA");
    CHECK(first[col("TR")] == "2000");
    CHECK(first[col("VRX")] == "0.9375");
    CHECK(first[col("SNR3")] == "NA");
    CHECK(first[col("MEAN")] == "0.123457");
    CHECK(first[col("imputed")] == "0");
    CHECK(split(lines[2], '\t')[col("imputed")] == "1");
    const auto failed = split(lines[3], '\t');
    CHECK(failed[col("status")] == "failed:truncated NIfTI data");
    CHECK(failed[col("MEAN")] == "NA");
    CHECK(failed[col("MFR")] == "NA");
    CHECK(failed[col("ROWS")] == "NA");
    CHECK(failed[col("tsne_x")] == "NA");
  }

  TEST_CASE("tabs and newlines in text fields are flattened") {
    CohortTable t;
    t.extra_tags = {"StationName"};
    auto row = sample_row("x", 1.0);
    row.metadata.manufacturer = "GE\tMEDICAL\nSYSTEMS";
    row.metadata.extra = {{"StationName", "ROOM\t1"}};
    t.rows = {row};
    const auto text = format_results(t);
    const auto lines = split(text.substr(0, text.size() - 1), '\n');
    REQUIRE(lines.size() == 2);
    CHECK(split(lines[1], '\t').size() == split(lines[0], '\t').size());
    CHECK(text.find("GE MEDICAL SYSTEMS") != std::string::npos);
  }

  TEST_CASE("parse recovers values to printed precision and every NA") {
    const auto table = sample_table();
    const auto text = format_results(table);
    const auto back = parse_results(text);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& a = table.rows[r];
      const auto& b = back.rows[r];
      CHECK(a.id == b.id);
      CHECK(a.status == b.status);
      CHECK(a.imputed == b.imputed);
      CHECK(a.metadata.manufacturer == b.metadata.manufacturer);
      CHECK(a.metadata.echo_time.has_value() == b.metadata.echo_time.has_value());
      for (std::size_t m = 0; m < kMeasureCount; ++m) {
        REQUIRE(a.measures[m].has_value() == b.measures[m].has_value());
        if (a.measures[m]) CHECK(*b.measures[m] == doctest::Approx(*a.measures[m]).epsilon(5e-6));
      }
      CHECK(a.tsne.has_value() == b.tsne.has_value());
    }
    CHECK(format_results(back) == text);
  }

  TEST_CASE("malformed text is rejected") {
    CHECK_THROWS_AS(parse_results("id\tstatus\n"), Error);
    auto text = format_results(sample_table());
    text.insert(text.find('\n') + 1, "extra\t");
    CHECK_THROWS_AS(parse_results(text), Error);
  }

  TEST_CASE("write is byte-identical on rerun and leaves no temp file") {
    ScratchDir dir("report");
    const auto path = write_results(sample_table(), dir.path() / "cohort");
    CHECK(path == dir.path() / "cohort" / "results.tsv");
    const auto first = mrqc::testing::read_text(path);
    write_results(sample_table(), dir.path() / "cohort");
    CHECK(mrqc::testing::read_text(path) == first);
    CHECK(read_results(path) == parse_results(first));
    std::size_t files = 0;
    for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir.path() / "cohort")) ++files;
    CHECK(files == 1);
  }

  TEST_CASE("unwritable destination is an error") {
    ScratchDir dir("report");
    std::ofstream(dir.path() / "blocker") << "x";
    CHECK_THROWS_AS(write_results(sample_table(), dir.path() / "blocker" / "cohort"), Error);
  }
}

TEST_SUITE("thumbnails") {
  TEST_CASE("percentile uses linear interpolation") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i + 1;
    CHECK(percentile(v, 1) == doctest::Approx(1.99));
    CHECK(percentile(v, 99) == doctest::Approx(99.01));
    CHECK(percentile(v, 0) == 1.0);
    CHECK(percentile(v, 100) == 100.0);
    CHECK(percentile({7.0}, 50) == 7.0);
  }

  TEST_CASE("size caps the long edge and keeps aspect") {
    CHECK(thumbnail_size(256, 128) == std::pair<std::size_t, std::size_t>{256, 128});
    CHECK(thumbnail_size(512, 512) == std::pair<std::size_t, std::size_t>{256, 256});
    CHECK(thumbnail_size(512, 128) == std::pair<std::size_t, std::size_t>{256, 64});
    CHECK(thumbnail_size(128, 1024) == std::pair<std::size_t, std::size_t>{32, 256});
    CHECK(thumbnail_size(100, 50) == std::pair<std::size_t, std::size_t>{100, 50});
    CHECK(thumbnail_size(2000, 3).second >= 1);
  }

  TEST_CASE("one PNG per slice with zero-padded names") {
    ScratchDir dir("thumbs");
    std::vector<double> v(5 * 16 * 16);
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = static_cast<double>(p % 97);
    const Volume vol("case7", {5, 16, 16}, v);
    const auto paths = write_thumbnails(vol, dir.path());
    REQUIRE(paths.size() == 5);
    for (int z = 0; z < 5; ++z) {
      const auto expected = dir.path() / "case7" / ("case7_00" + std::to_string(z) + ".png");
      CHECK(paths[z] == expected);
      CHECK(std::filesystem::exists(expected));
    }
  }

  TEST_CASE("constant volume gives uniform gray") {
    ScratchDir dir("thumbs");
    const Volume vol("flat", {2, 10, 12}, std::vector<double>(240, 42.0));
    for (const auto& path : write_thumbnails(vol, dir.path())) {
      const auto g = read_png(path);
      CHECK(g.width == 12);
      CHECK(g.height == 10);
      CHECK(std::all_of(g.pixels.begin(), g.pixels.end(), [&](auto p) { return p == g.pixels.front(); }));
    }
  }

  TEST_CASE("aspect preserved and long edge capped") {
    ScratchDir dir("thumbs");
    const Volume tall("tall", {1, 256, 128}, std::vector<double>(256 * 128, 1.0));
    auto g = read_png(write_thumbnails(tall, dir.path()).front());
    CHECK(g.height == 256);
    CHECK(g.width == 128);
    std::vector<double> big(512 * 512);
    for (std::size_t p = 0; p < big.size(); ++p) big[p] = static_cast<double>(p % 512);
    const Volume wide("big", {1, 512, 512}, big);
    g = read_png(write_thumbnails(wide, dir.path()).front());
    CHECK(g.height == 256);
    CHECK(g.width == 256);
  }

  TEST_CASE("window clips to the 1st and 99th percentile") {
    ScratchDir dir("thumbs");
    std::vector<double> v(20 * 20);
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = static_cast<double>(p);
    v[0] = -1e6;
    v[399] = 1e6;
    const Volume vol("ramp", {1, 20, 20}, v);
    const auto g = read_png(write_thumbnails(vol, dir.path()).front());
    REQUIRE(g.pixels.size() == 400);
    CHECK(g.pixels[0] == 0);
    CHECK(g.pixels[1] == 0);
    CHECK(g.pixels[399] == 255);
    CHECK(g.pixels[398] == 255);
    for (std::size_t p = 2; p < 398; ++p) CHECK(g.pixels[p] >= g.pixels[p - 1]);
    CHECK(g.pixels[200] > 100);
    CHECK(g.pixels[200] < 155);
  }
}
