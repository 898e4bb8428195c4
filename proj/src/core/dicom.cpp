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

#include "dicom_header.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <gdcmDicts.h>
#include <gdcmGlobal.h>
#include <gdcmImageReader.h>
#include <gdcmReader.h>
#include <gdcmStringFilter.h>
#include <gdcmTrace.h>

#include "bytes.hpp"
#include "mrqc/volume_io.hpp"

namespace mrqc {
namespace {

const gdcm::Tag kPixelData(0x7fe0, 0x0010);
const gdcm::Tag kManufacturer(0x0008, 0x0070);
const gdcm::Tag kFieldStrength(0x0018, 0x0087);
const gdcm::Tag kPixelSpacing(0x0028, 0x0030);
const gdcm::Tag kSliceThickness(0x0018, 0x0050);
const gdcm::Tag kSpacingBetweenSlices(0x0018, 0x0088);
const gdcm::Tag kRepetitionTime(0x0018, 0x0080);
const gdcm::Tag kEchoTime(0x0018, 0x0081);
const gdcm::Tag kPosition(0x0020, 0x0032);
const gdcm::Tag kOrientation(0x0020, 0x0037);
const gdcm::Tag kInstanceNumber(0x0020, 0x0013);
const gdcm::Tag kRescaleIntercept(0x0028, 0x1052);
const gdcm::Tag kRescaleSlope(0x0028, 0x1053);

void quiet_gdcm() {
  static std::once_flag once;
  std::call_once(once, [] {
    gdcm::Trace::SetDebug(false);
    gdcm::Trace::SetWarning(false);
    gdcm::Trace::SetError(false);
    // Force dictionary construction before any concurrent use.
    (void)gdcm::Global::GetInstance().GetDicts();
  });
}

std::optional<std::string> string_value(const gdcm::File& file, const gdcm::Tag& tag) {
  if (!file.GetDataSet().FindDataElement(tag)) return std::nullopt;
  const auto& element = file.GetDataSet().GetDataElement(tag);
  if (element.IsEmpty()) return std::nullopt;
  gdcm::StringFilter filter;
  filter.SetFile(file);
  std::string text = detail::trim(filter.ToString(tag));
  if (text.empty()) return std::nullopt;
  return text;
}

std::vector<double> numeric_values(const gdcm::File& file, const gdcm::Tag& tag) {
  std::vector<double> out;
  const auto text = string_value(file, tag);
  if (!text) return out;
  std::stringstream in(*text);
  std::string item;
  while (std::getline(in, item, '\\')) {
    item = detail::trim(item);
    double v = 0.0;
    std::istringstream parse(item);
    if (parse >> v && std::isfinite(v)) out.push_back(v);
    else return {};
  }
  return out;
}

std::optional<double> first_number(const gdcm::File& file, const gdcm::Tag& tag) {
  const auto values = numeric_values(file, tag);
  if (values.empty()) return std::nullopt;
  return values.front();
}

std::optional<double> positive(std::optional<double> v) {
  if (v && *v > 0.0) return v;
  return std::nullopt;
}

struct SliceKey {
  std::filesystem::path file;
  std::optional<std::array<double, 3>> position;
  std::optional<std::array<double, 6>> orientation;
  std::optional<double> instance;
};

SliceKey read_slice_key(const std::filesystem::path& path) {
  gdcm::Reader reader;
  reader.SetFileName(path.c_str());
  if (!reader.ReadUpToTag(kPixelData)) {
    throw DatasetError(fmt::format("{}: not a readable DICOM file", path.filename().string()));
  }
  SliceKey key{path, std::nullopt, std::nullopt, std::nullopt};
  const auto& file = reader.GetFile();
  if (const auto p = numeric_values(file, kPosition); p.size() == 3) key.position = {p[0], p[1], p[2]};
  if (const auto o = numeric_values(file, kOrientation); o.size() == 6)
    key.orientation = {o[0], o[1], o[2], o[3], o[4], o[5]};
  key.instance = first_number(file, kInstanceNumber);
  return key;
}

template <typename T>
void append_converted(const std::vector<char>& buffer, std::vector<double>& out) {
  const std::size_t count = buffer.size() / sizeof(T);
  const std::size_t start = out.size();
  out.resize(start + count);
  for (std::size_t k = 0; k < count; ++k) {
    T value;
    std::memcpy(&value, buffer.data() + k * sizeof(T), sizeof(T));
    out[start + k] = static_cast<double>(value);
  }
}

}  // namespace

std::vector<std::filesystem::path> order_dicom_series(const std::vector<std::filesystem::path>& files) {
  quiet_gdcm();
  std::vector<SliceKey> keys;
  keys.reserve(files.size());
  for (const auto& f : files) keys.push_back(read_slice_key(f));

  const bool geometric = std::all_of(keys.begin(), keys.end(), [](const SliceKey& k) {
    return k.position && k.orientation;
  });
  std::vector<double> along_normal(keys.size(), 0.0);
  if (geometric) {
    const auto& o = *keys.front().orientation;
    const std::array<double, 3> normal = {o[1] * o[5] - o[2] * o[4], o[2] * o[3] - o[0] * o[5],
                                          o[0] * o[4] - o[1] * o[3]};
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const auto& p = *keys[k].position;
      along_normal[k] = p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2];
    }
  }
  std::vector<std::size_t> order(keys.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (geometric && along_normal[a] != along_normal[b]) return along_normal[a] < along_normal[b];
    const double ia = keys[a].instance.value_or(kInf), ib = keys[b].instance.value_or(kInf);
    if (ia != ib) return ia < ib;
    return keys[a].file < keys[b].file;
  });
  std::vector<std::filesystem::path> sorted;
  sorted.reserve(order.size());
  for (auto k : order) sorted.push_back(keys[k].file);
  return sorted;
}

LoadedDataset read_dicom_series(const std::vector<std::filesystem::path>& files, const std::string& id) {
  if (files.empty()) throw DatasetError("empty DICOM series");
  quiet_gdcm();
  const auto sorted = order_dicom_series(files);

  std::vector<double> voxels;
  std::size_t rows = 0, cols = 0, slices = 0;
  MetadataRecord meta;
  for (std::size_t index = 0; index < sorted.size(); ++index) {
    const auto& path = sorted[index];
    gdcm::ImageReader reader;
    reader.SetFileName(path.c_str());
    if (!reader.Read()) {
      throw DatasetError(fmt::format("{}: cannot decode DICOM image", path.filename().string()));
    }
    const gdcm::Image& image = reader.GetImage();
    const gdcm::File& file = reader.GetFile();
    const auto pf = image.GetPixelFormat();
    if (pf.GetSamplesPerPixel() != 1) {
      throw DatasetError(fmt::format("{}: {} samples per pixel, expected 1",
                                     path.filename().string(), pf.GetSamplesPerPixel()));
    }
    const std::size_t c = image.GetDimension(0), r = image.GetDimension(1);
    const std::size_t frames = image.GetNumberOfDimensions() > 2 ? image.GetDimension(2) : 1;
    if (index == 0) {
      rows = r;
      cols = c;
    } else if (r != rows || c != cols) {
      throw DatasetError(fmt::format("inconsistent slice dimensions: {}x{} vs {}x{} in {}", r, c,
                                     rows, cols, path.filename().string()));
    }

    std::vector<char> buffer(image.GetBufferLength());
    if (!image.GetBuffer(buffer.data())) {
      throw DatasetError(fmt::format("{}: pixel data could not be decoded", path.filename().string()));
    }
    const std::size_t start = voxels.size();
    switch (pf.GetScalarType()) {
      case gdcm::PixelFormat::UINT8: append_converted<std::uint8_t>(buffer, voxels); break;
      case gdcm::PixelFormat::INT8: append_converted<std::int8_t>(buffer, voxels); break;
      case gdcm::PixelFormat::UINT12:
      case gdcm::PixelFormat::UINT16: append_converted<std::uint16_t>(buffer, voxels); break;
      case gdcm::PixelFormat::INT12:
      case gdcm::PixelFormat::INT16: append_converted<std::int16_t>(buffer, voxels); break;
      case gdcm::PixelFormat::UINT32: append_converted<std::uint32_t>(buffer, voxels); break;
      case gdcm::PixelFormat::INT32: append_converted<std::int32_t>(buffer, voxels); break;
      case gdcm::PixelFormat::FLOAT32: append_converted<float>(buffer, voxels); break;
      case gdcm::PixelFormat::FLOAT64: append_converted<double>(buffer, voxels); break;
      default:
        throw DatasetError(fmt::format("{}: unsupported pixel format", path.filename().string()));
    }
    if (voxels.size() - start != frames * rows * cols) {
      throw DatasetError(fmt::format("{}: truncated pixel data", path.filename().string()));
    }
    const double slope = first_number(file, kRescaleSlope).value_or(1.0);
    const double intercept = first_number(file, kRescaleIntercept).value_or(0.0);
    if (slope != 1.0 || intercept != 0.0) {
      for (std::size_t k = start; k < voxels.size(); ++k) voxels[k] = voxels[k] * slope + intercept;
    }
    slices += frames;

    if (index == 0) {
      meta.manufacturer = string_value(file, kManufacturer);
      meta.field_strength = first_number(file, kFieldStrength);
      meta.repetition_time = first_number(file, kRepetitionTime);
      meta.echo_time = first_number(file, kEchoTime);
      // PixelSpacing is (between rows, between columns).
      if (const auto ps = numeric_values(file, kPixelSpacing); ps.size() == 2) {
        meta.spacing.y = positive(ps[0]);
        meta.spacing.x = positive(ps[1]);
      }
      meta.spacing.z = positive(first_number(file, kSliceThickness));
      if (!meta.spacing.z) meta.spacing.z = positive(first_number(file, kSpacingBetweenSlices));
    }
  }
  meta.rows = rows;
  meta.cols = cols;
  meta.slices = slices;
  LoadedDataset out;
  out.volume = Volume(id, {slices, rows, cols}, std::move(voxels), meta.spacing);
  out.metadata = std::move(meta);
  return out;
}

bool is_dicom_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.seekg(128);
  return in.read(magic, 4) && std::string_view(magic, 4) == "DICM";
}

std::optional<std::uint32_t> dicom_tag_number(std::string_view name) {
  quiet_gdcm();
  std::string digits;
  for (char c : name) {
    if (std::isxdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    else if (c != '(' && c != ')' && c != ',' && c != ' ') {
      digits.clear();
      break;
    }
  }
  const bool numeric_form = digits.size() == 8 &&
                            (name.find(',') != std::string_view::npos || name.size() == 8);
  if (numeric_form) {
    std::uint32_t value = 0;
    std::from_chars(digits.data(), digits.data() + 8, value, 16);
    return value;
  }
  gdcm::Tag tag;
  const std::string keyword(name);
  gdcm::Global::GetInstance().GetDicts().GetPublicDict().GetDictEntryByKeyword(keyword.c_str(), tag);
  if (tag == gdcm::Tag(0xffff, 0xffff)) return std::nullopt;
  return tag.GetElementTag();
}

std::vector<std::optional<std::string>> read_dicom_tags(const std::filesystem::path& file,
                                                        const std::vector<std::uint32_t>& tags) {
  quiet_gdcm();
  gdcm::Reader reader;
  reader.SetFileName(file.c_str());
  if (!reader.ReadUpToTag(kPixelData)) {
    throw DatasetError(fmt::format("{}: not a readable DICOM file", file.filename().string()));
  }
  std::vector<std::optional<std::string>> out;
  for (auto t : tags) out.push_back(string_value(reader.GetFile(), gdcm::Tag(t)));
  return out;
}

}  // namespace mrqc
