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

#include <cstring>
#include <fstream>

#include <zlib.h>

#include "mrqc/log.hpp"
#include "mrqc/phantom.hpp"
#include "mrqc/volume_io.hpp"
#include "support/dicom_writer.hpp"
#include "support/fixtures.hpp"

using namespace mrqc;
using mrqc::testing::ScratchDir;

namespace {

Volume ramp(std::string id, Dims dims, Spacing spacing = {1.0, 1.0, 1.0}) {
  std::vector<double> v(dims.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 251);
  return Volume(std::move(id), dims, std::move(v), spacing);
}

// Hand-assembled NIfTI headers, independent of the library writer.
template <typename T>
void store(std::vector<char>& buf, std::size_t offset, T value, bool big_endian) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if (big_endian) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(buf.data() + offset, bytes, sizeof(T));
}

std::vector<char> nifti1_int16(const Dims& d, const std::vector<std::int16_t>& data, bool big_endian,
                               float slope = 0.0f, float inter = 0.0f, std::uint8_t units = 2,
                               std::int16_t ndim = 3, std::int16_t nt = 1) {
  std::vector<char> buf(352, 0);
  store<std::int32_t>(buf, 0, 348, big_endian);
  store<std::int16_t>(buf, 40, ndim, big_endian);
  store<std::int16_t>(buf, 42, static_cast<std::int16_t>(d.cols), big_endian);
  store<std::int16_t>(buf, 44, static_cast<std::int16_t>(d.rows), big_endian);
  store<std::int16_t>(buf, 46, static_cast<std::int16_t>(d.slices), big_endian);
  store<std::int16_t>(buf, 48, nt, big_endian);
  for (int k = 5; k < 8; ++k) store<std::int16_t>(buf, 40 + 2 * k, 1, big_endian);
  store<std::int16_t>(buf, 70, 4, big_endian);
  store<std::int16_t>(buf, 72, 16, big_endian);
  store<float>(buf, 80, 0.9f, big_endian);
  store<float>(buf, 84, 1.1f, big_endian);
  store<float>(buf, 88, 2.5f, big_endian);
  store<float>(buf, 108, 352.0f, big_endian);
  store<float>(buf, 112, slope, big_endian);
  store<float>(buf, 116, inter, big_endian);
  buf[123] = static_cast<char>(units);
  std::memcpy(buf.data() + 148, "scanner ZX", 10);
  std::memcpy(buf.data() + 344, "n+1", 4);
  for (auto v : data) {
    buf.resize(buf.size() + 2);
    store<std::int16_t>(buf, buf.size() - 2, v, big_endian);
  }
  return buf;
}

std::vector<char> nifti2_float64(const Dims& d, const std::vector<double>& data, bool big_endian) {
  std::vector<char> buf(544, 0);
  store<std::int32_t>(buf, 0, 540, big_endian);
  std::memcpy(buf.data() + 4, "n+2\0\r\n\032\n", 8);
  store<std::int16_t>(buf, 12, 64, big_endian);
  store<std::int16_t>(buf, 14, 64, big_endian);
  store<std::int64_t>(buf, 16, 3, big_endian);
  store<std::int64_t>(buf, 24, static_cast<std::int64_t>(d.cols), big_endian);
  store<std::int64_t>(buf, 32, static_cast<std::int64_t>(d.rows), big_endian);
  store<std::int64_t>(buf, 40, static_cast<std::int64_t>(d.slices), big_endian);
  for (int k = 4; k < 8; ++k) store<std::int64_t>(buf, 16 + 8 * k, 1, big_endian);
  store<double>(buf, 112, 0.7, big_endian);
  store<double>(buf, 120, 0.7, big_endian);
  store<double>(buf, 128, 4.0, big_endian);
  store<std::int64_t>(buf, 168, 544, big_endian);
  store<std::int32_t>(buf, 500, 2, big_endian);
  for (double v : data) {
    buf.resize(buf.size() + 8);
    store<double>(buf, buf.size() - 8, v, big_endian);
  }
  return buf;
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct QuietLog {
  std::vector<std::string> messages;
  QuietLog() {
    log::set_sink([this](log::Level level, std::string_view m) {
      if (level != log::Level::info) messages.emplace_back(m);
    });
  }
  ~QuietLog() { log::set_sink({}); }
  bool saw(std::string_view needle) const {
    for (const auto& m : messages) {
      if (m.find(needle) != std::string::npos) return true;
    }
    return false;
  }
};

}  // namespace

TEST_SUITE("nifti") {
  TEST_CASE("library writer round-trips plain and gzip files") {
    ScratchDir dir("nifti-rt");
    const auto vol = ramp("v", {3, 10, 12}, {0.8, 0.9, 2.0});
    for (const char* name : {"v.nii", "v.nii.gz"}) {
      write_nifti(vol, dir / name);
      const auto loaded = read_nifti(dir / name, "v");
      CHECK(loaded.volume.dims() == vol.dims());
      CHECK(std::equal(vol.voxels().begin(), vol.voxels().end(), loaded.volume.voxels().begin()));
      CHECK(loaded.metadata.spacing.x.value() == doctest::Approx(0.8).epsilon(1e-6));
      CHECK(loaded.metadata.spacing.y.value() == doctest::Approx(0.9).epsilon(1e-6));
      CHECK(loaded.metadata.spacing.z.value() == doctest::Approx(2.0).epsilon(1e-6));
      CHECK(loaded.metadata.rows == 10);
      CHECK(loaded.metadata.cols == 12);
      CHECK(loaded.metadata.slices == 3);
      CHECK_FALSE(loaded.metadata.manufacturer);
      CHECK_FALSE(loaded.metadata.repetition_time);
      CHECK_FALSE(loaded.metadata.echo_time);
    }
  }

  TEST_CASE("hand-built NIfTI-1 in both byte orders, with scaling") {
    ScratchDir dir("nifti1");
    const Dims d{2, 8, 9};
    std::vector<std::int16_t> data(d.voxel_count());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::int16_t>(i) - 40;
    for (bool be : {false, true}) {
      write_bytes(dir / "a.nii", nifti1_int16(d, data, be, 2.0f, 10.0f));
      const auto loaded = read_nifti(dir / "a.nii", "a");
      REQUIRE(loaded.volume.dims() == d);
      for (std::size_t i = 0; i < data.size(); ++i) CHECK(loaded.volume.voxels()[i] == 2.0 * data[i] + 10.0);
      CHECK(loaded.metadata.spacing.x.value() == doctest::Approx(0.9));
      CHECK(loaded.metadata.spacing.z.value() == doctest::Approx(2.5));
    }
  }

  TEST_CASE("zero slope means unscaled") {
    ScratchDir dir("nifti-slope");
    const Dims d{1, 8, 8};
    std::vector<std::int16_t> data(64, 7);
    write_bytes(dir / "a.nii", nifti1_int16(d, data, false, 0.0f, 5.0f));
    CHECK(read_nifti(dir / "a.nii", "a").volume.voxels()[0] == 7.0);
  }

  TEST_CASE("micrometre units are converted to millimetres") {
    ScratchDir dir("nifti-units");
    const Dims d{1, 8, 8};
    write_bytes(dir / "a.nii", nifti1_int16(d, std::vector<std::int16_t>(64, 1), false, 0, 0, 3));
    CHECK(read_nifti(dir / "a.nii", "a").metadata.spacing.x.value() == doctest::Approx(0.0009));
  }

  TEST_CASE("NIfTI-2 in both byte orders") {
    ScratchDir dir("nifti2");
    const Dims d{2, 8, 8};
    std::vector<double> data(d.voxel_count());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = 0.25 * static_cast<double>(i);
    for (bool be : {false, true}) {
      write_bytes(dir / "b.nii", nifti2_float64(d, data, be));
      const auto loaded = read_nifti(dir / "b.nii", "b");
      REQUIRE(loaded.volume.dims() == d);
      CHECK(std::equal(data.begin(), data.end(), loaded.volume.voxels().begin()));
      CHECK(loaded.metadata.spacing.z.value() == 4.0);
    }
  }

  TEST_CASE("4-D input keeps the first volume with a warning") {
    QuietLog quiet;
    ScratchDir dir("nifti4d");
    const Dims d{1, 8, 8};
    std::vector<std::int16_t> data(128);
    for (std::size_t i = 0; i < 128; ++i) data[i] = i < 64 ? 1 : 2;
    write_bytes(dir / "t.nii", nifti1_int16(d, data, false, 0, 0, 2, 4, 2));
    const auto loaded = read_nifti(dir / "t.nii", "t");
    CHECK(loaded.volume.dims().voxel_count() == 64);
    CHECK(loaded.volume.voxels()[63] == 1.0);
    CHECK(quiet.saw("volume"));
  }

  TEST_CASE("truncated and garbage files are dataset errors") {
    ScratchDir dir("nifti-bad");
    const Dims d{2, 8, 8};
    auto bytes = nifti1_int16(d, std::vector<std::int16_t>(128, 3), false);
    bytes.resize(bytes.size() - 10);
    write_bytes(dir / "short.nii", bytes);
    CHECK_THROWS_AS(read_nifti(dir / "short.nii", "s"), DatasetError);
    write_bytes(dir / "junk.nii", std::vector<char>(400, 'x'));
    CHECK_THROWS_AS(read_nifti(dir / "junk.nii", "j"), DatasetError);
  }

  TEST_CASE("4x4x4 volume decodes but is not measurable") {
    // The decoder accepts the grid; the 8-pixel in-plane floor rejects it.
    ScratchDir dir("nifti-small");
    const Volume tiny("tiny", {4, 4, 4}, std::vector<double>(64, 5.0), {1, 1, 1});
    write_nifti(tiny, dir / "tiny.nii");
    const auto loaded = read_nifti(dir / "tiny.nii", "tiny");
    CHECK(loaded.volume.dims() == Dims{4, 4, 4});
    CHECK(loaded.metadata.rows == 4);
    const auto datasets = discover_cohort(dir.path());
    REQUIRE(datasets.size() == 1);
    CHECK_THROWS_AS(load_volume(datasets[0]), DatasetError);
  }
}

TEST_SUITE("metaimage") {
  TEST_CASE("element types, byte orders, compression and detached data") {
    ScratchDir dir("mha");
    const auto vol = ramp("m", {3, 9, 10}, {0.5, 0.6, 3.0});
    struct Case {
      const char* name;
      mrqc::testing::MetaImageOptions opts;
    };
    std::vector<Case> cases = {
        {"short.mha", {"MET_SHORT", false, false, false, {}}},
        {"uchar.mha", {"MET_UCHAR", false, false, false, {}}},
        {"float_be.mha", {"MET_FLOAT", false, true, false, {}}},
        {"double_z.mha", {"MET_DOUBLE", true, false, false, {}}},
        {"short_detached.mhd", {"MET_SHORT", false, false, true, {}}},
        {"short_z_be.mha", {"MET_SHORT", true, true, false, {}}},
    };
    for (const auto& c : cases) {
      CAPTURE(c.name);
      mrqc::testing::write_metaimage(vol, dir / c.name, c.opts);
      const auto loaded = read_metaimage(dir / c.name, "m");
      REQUIRE(loaded.volume.dims() == vol.dims());
      CHECK(std::equal(vol.voxels().begin(), vol.voxels().end(), loaded.volume.voxels().begin()));
      CHECK(loaded.metadata.spacing.x.value() == doctest::Approx(0.5));
      CHECK(loaded.metadata.spacing.y.value() == doctest::Approx(0.6));
      CHECK(loaded.metadata.spacing.z.value() == doctest::Approx(3.0));
    }
  }

  TEST_CASE("2-D image is a one-slice volume") {
    ScratchDir dir("mha2d");
    const auto vol = ramp("m", {1, 12, 8});
    mrqc::testing::write_metaimage(vol, dir / "flat.mha");
    const auto loaded = read_metaimage(dir / "flat.mha", "flat");
    CHECK(loaded.volume.dims() == Dims{1, 12, 8});
    CHECK(loaded.metadata.slices == 1);
  }

  TEST_CASE("missing data file and short data are dataset errors") {
    ScratchDir dir("mha-bad");
    const auto vol = ramp("m", {2, 8, 8});
    mrqc::testing::write_metaimage(vol, dir / "d.mhd", {"MET_SHORT", false, false, true, {}});
    std::filesystem::remove(dir / "d.raw");
    CHECK_THROWS_AS(read_metaimage(dir / "d.mhd", "d"), DatasetError);
    mrqc::testing::write_metaimage(vol, dir / "s.mha");
    std::filesystem::resize_file(dir / "s.mha", std::filesystem::file_size(dir / "s.mha") - 5);
    CHECK_THROWS_AS(read_metaimage(dir / "s.mha", "s"), DatasetError);
  }

  TEST_CASE("header keys resolve as extra tags") {
    ScratchDir dir("mha-tags");
    mrqc::testing::write_metaimage(ramp("m", {1, 8, 8}), dir / "t.mha",
                                   {"MET_SHORT", false, false, false, {{"Modality", "MET_MOD_MR"}}});
    const auto ds = discover_cohort(dir.path());
    REQUIRE(ds.size() == 1);
    const auto tags = resolve_tags(ds[0], {"Modality", "Nonexistent"});
    REQUIRE(tags.size() == 2);
    CHECK(tags[0].second.value() == "MET_MOD_MR");
    CHECK_FALSE(tags[1].second);
  }
}

TEST_SUITE("dicom") {
  TEST_CASE("series loads with metadata and slices ordered by position") {
    ScratchDir dir("dcm");
    const auto vol = ramp("s", {4, 16, 12});
    mrqc::testing::DicomSeriesOptions opts;
    opts.file_order = {2, 0, 3, 1};
    opts.pixel_spacing_row = 0.7;
    opts.pixel_spacing_col = 0.6;
    mrqc::testing::write_dicom_series(vol, dir / "patient1" / "t1", opts);
    const auto ds = discover_cohort(dir.path());
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].id == "patient1_t1");
    CHECK(ds[0].format == Format::dicom_series);
    const auto loaded = load_volume(ds[0]);
    REQUIRE(loaded.volume.dims() == vol.dims());
    CHECK(std::equal(vol.voxels().begin(), vol.voxels().end(), loaded.volume.voxels().begin()));
    const auto& m = loaded.metadata;
    CHECK(m.manufacturer.value() == "ACME");
    CHECK(m.field_strength.value() == doctest::Approx(1.5));
    CHECK(m.repetition_time.value() == doctest::Approx(500));
    CHECK(m.echo_time.value() == doctest::Approx(15));
    CHECK(m.spacing.x.value() == doctest::Approx(0.6));
    CHECK(m.spacing.y.value() == doctest::Approx(0.7));
    CHECK(m.spacing.z.value() == doctest::Approx(3.0));
    CHECK(m.rows == 16);
    CHECK(m.cols == 12);
    CHECK(m.slices == 4);
  }

  TEST_CASE("instance number orders slices when positions are absent") {
    ScratchDir dir("dcm-inst");
    const auto vol = ramp("s", {3, 8, 8});
    mrqc::testing::DicomSeriesOptions opts;
    opts.file_order = {1, 2, 0};
    opts.write_position = false;
    mrqc::testing::write_dicom_series(vol, dir / "series", opts);
    const auto loaded = load_volume(discover_cohort(dir.path()).at(0));
    CHECK(std::equal(vol.voxels().begin(), vol.voxels().end(), loaded.volume.voxels().begin()));
  }

  TEST_CASE("rescale slope and intercept apply") {
    ScratchDir dir("dcm-rescale");
    std::vector<double> v(2 * 8 * 8);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 10.0 + 2.0 * static_cast<double>(i);
    const Volume vol("r", {2, 8, 8}, v);
    mrqc::testing::DicomSeriesOptions opts;
    opts.rescale_slope = 2.0;
    opts.rescale_intercept = 10.0;
    mrqc::testing::write_dicom_series(vol, dir / "r", opts);
    const auto loaded = load_volume(discover_cohort(dir.path()).at(0));
    CHECK(std::equal(v.begin(), v.end(), loaded.volume.voxels().begin()));
  }

  TEST_CASE("missing header fields become missing metadata") {
    ScratchDir dir("dcm-na");
    mrqc::testing::DicomSeriesOptions opts;
    opts.manufacturer.reset();
    opts.echo_time.reset();
    opts.field_strength.reset();
    opts.slice_thickness.reset();
    opts.spacing_between_slices = 2.2;
    mrqc::testing::write_dicom_series(ramp("n", {2, 8, 8}), dir / "n", opts);
    const auto m = load_volume(discover_cohort(dir.path()).at(0)).metadata;
    CHECK_FALSE(m.manufacturer);
    CHECK_FALSE(m.echo_time);
    CHECK_FALSE(m.field_strength);
    CHECK(m.repetition_time.value() == doctest::Approx(500));
    CHECK(m.spacing.z.value() == doctest::Approx(2.2));
  }

  TEST_CASE("inconsistent slice sizes fail the dataset") {
    ScratchDir dir("dcm-mixed");
    mrqc::testing::write_dicom_series(ramp("a", {2, 8, 8}), dir / "mixed");
    mrqc::testing::DicomSeriesOptions opts;
    opts.slice_gap = 7.0;
    const auto extra = mrqc::testing::write_dicom_series(ramp("b", {1, 10, 10}), dir / "other", opts);
    std::filesystem::rename(extra[0], dir / "mixed" / "slice_900.dcm");
    const auto ds = discover_cohort(dir.path());
    REQUIRE(ds.size() == 1);
    CHECK_THROWS_AS(load_volume(ds[0]), DatasetError);
  }

  TEST_CASE("tags resolve by keyword or number") {
    ScratchDir dir("dcm-tags");
    mrqc::testing::DicomSeriesOptions opts;
    opts.extra[{0x0008, 0x1010}] = "SCANNER7";
    mrqc::testing::write_dicom_series(ramp("t", {2, 8, 8}), dir / "t", opts);
    const auto ds = discover_cohort(dir.path()).at(0);
    QuietLog quiet;
    const auto tags = resolve_tags(ds, {"StationName", "0008,1010", "00081010", "NoSuchKeyword", "Manufacturer"});
    REQUIRE(tags.size() == 5);
    CHECK(tags[0].second.value() == "SCANNER7");
    CHECK(tags[1].second.value() == "SCANNER7");
    CHECK(tags[2].second.value() == "SCANNER7");
    CHECK_FALSE(tags[3].second);
    CHECK(tags[4].second.value() == "ACME");
    CHECK(quiet.saw("NoSuchKeyword"));
  }
}

TEST_SUITE("discovery") {
  TEST_CASE("mixed cohort: one dataset per file or DICOM directory, sorted ids") {
    QuietLog quiet;
    ScratchDir dir("discover");
    const auto vol = ramp("x", {2, 8, 8});
    write_nifti(vol, dir / "b.nii.gz");
    std::filesystem::create_directories(dir / "sub");
    write_nifti(vol, dir / "sub" / "a.nii");
    mrqc::testing::write_metaimage(vol, dir / "c.mha");
    mrqc::testing::write_dicom_series(vol, dir / "sub" / "dcm");
    std::ofstream(dir / "notes.txt") << "hello";
    std::ofstream(dir / ".hidden.nii") << "x";
    const auto ds = discover_cohort(dir.path());
    std::vector<std::string> ids;
    for (const auto& d : ds) ids.push_back(d.id);
    CHECK(ids == std::vector<std::string>{"b", "c", "sub_a", "sub_dcm"});
    CHECK(ds[0].format == Format::nifti);
    CHECK(ds[1].format == Format::metaimage);
    CHECK(ds[3].format == Format::dicom_series);
    CHECK(ds[3].files.size() == 2);
    CHECK(quiet.saw("notes.txt"));
  }

  TEST_CASE("empty directory gives an empty cohort") {
    ScratchDir dir("empty");
    CHECK(discover_cohort(dir.path()).empty());
  }

  TEST_CASE("a missing root is an error") {
    CHECK_THROWS_AS(discover_cohort("/nonexistent/mrqc/root"), Error);
  }

  TEST_CASE("discovery is deterministic") {
    ScratchDir dir("discover-det");
    const auto vol = ramp("x", {1, 8, 8});
    for (const char* n : {"z.nii", "a.nii", "m.mha"}) {
      if (std::string(n).ends_with(".mha")) mrqc::testing::write_metaimage(vol, dir / n);
      else write_nifti(vol, dir / n);
    }
    CHECK(discover_cohort(dir.path()) == discover_cohort(dir.path()));
  }
}

TEST_SUITE("tag list") {
  TEST_CASE("CRLF, blank lines, BOM and malformed names") {
    QuietLog quiet;
    ScratchDir dir("taglist");
    std::ofstream(dir / "tags.txt", std::ios::binary) << "\xEF\xBB\xBFStationName\r\n\r\n0008,1010\n bad name!\nSeriesDescription\n";
    const auto tags = read_tag_list(dir / "tags.txt");
    CHECK(tags == std::vector<std::string>{"StationName", "0008,1010", "SeriesDescription"});
    CHECK(quiet.saw("bad name"));
  }
}
