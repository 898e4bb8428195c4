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

#include "metaimage_header.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "bytes.hpp"
#include "mrqc/volume_io.hpp"

namespace mrqc {
namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

bool parse_bool(const std::string& text) {
  const auto t = detail::lowercase(text);
  return t == "true" || t == "1" || t == "yes";
}

std::size_t element_size(const std::string& type) {
  if (type == "MET_UCHAR" || type == "MET_CHAR") return 1;
  if (type == "MET_SHORT" || type == "MET_USHORT") return 2;
  if (type == "MET_INT" || type == "MET_UINT" || type == "MET_FLOAT" || type == "MET_LONG" ||
      type == "MET_ULONG") return 4;
  if (type == "MET_DOUBLE" || type == "MET_LONG_LONG" || type == "MET_ULONG_LONG") return 8;
  throw DatasetError(fmt::format("unsupported MetaImage ElementType '{}'", type));
}

std::vector<double> decode(const std::string& type, const std::uint8_t* data, std::size_t count,
                           bool swap) {
  std::vector<double> out;
  if (type == "MET_UCHAR") detail::convert_elements<std::uint8_t>(data, count, swap, out);
  else if (type == "MET_CHAR") detail::convert_elements<std::int8_t>(data, count, swap, out);
  else if (type == "MET_SHORT") detail::convert_elements<std::int16_t>(data, count, swap, out);
  else if (type == "MET_USHORT") detail::convert_elements<std::uint16_t>(data, count, swap, out);
  else if (type == "MET_INT" || type == "MET_LONG")
    detail::convert_elements<std::int32_t>(data, count, swap, out);
  else if (type == "MET_UINT" || type == "MET_ULONG")
    detail::convert_elements<std::uint32_t>(data, count, swap, out);
  else if (type == "MET_FLOAT") detail::convert_elements<float>(data, count, swap, out);
  else if (type == "MET_DOUBLE") detail::convert_elements<double>(data, count, swap, out);
  else if (type == "MET_LONG_LONG") detail::convert_elements<std::int64_t>(data, count, swap, out);
  else if (type == "MET_ULONG_LONG") detail::convert_elements<std::uint64_t>(data, count, swap, out);
  else throw DatasetError(fmt::format("unsupported MetaImage ElementType '{}'", type));
  return out;
}

}  // namespace

MetaImageHeader read_metaimage_header(std::span<const std::uint8_t> bytes) {
  MetaImageHeader header;
  std::size_t pos = 0;
  bool saw_data_file = false;
  while (pos < bytes.size()) {
    std::size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    const std::string_view line(reinterpret_cast<const char*>(bytes.data() + pos), end - pos);
    pos = end < bytes.size() ? end + 1 : end;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      if (detail::trim(line).empty()) continue;
      throw DatasetError("malformed MetaImage header line");
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    header.fields.emplace_back(key, value);
    if (key == "ElementDataFile") {
      saw_data_file = true;
      break;
    }
    if (header.fields.size() > 256) throw DatasetError("MetaImage header too long");
  }
  if (!saw_data_file) throw DatasetError("MetaImage header lacks ElementDataFile");
  header.data_offset = pos;
  return header;
}

const std::string* MetaImageHeader::find(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

LoadedDataset read_metaimage(const std::filesystem::path& path, const std::string& id) {
  const auto bytes = detail::read_file(path);
  const MetaImageHeader header = read_metaimage_header(bytes);
  const auto require = [&](std::string_view key) -> const std::string& {
    const std::string* v = header.find(key);
    if (!v) throw DatasetError(fmt::format("MetaImage header lacks {}", key));
    return *v;
  };

  const auto ndims = parse_numbers(require("NDims"));
  if (ndims.size() != 1 || (ndims[0] != 2 && ndims[0] != 3)) {
    throw DatasetError("MetaImage NDims must be 2 or 3");
  }
  const auto dim_size = parse_numbers(require("DimSize"));
  if (dim_size.size() != static_cast<std::size_t>(ndims[0])) {
    throw DatasetError("MetaImage DimSize does not match NDims");
  }
  for (double d : dim_size) {
    if (!(d >= 1) || d != std::floor(d)) throw DatasetError("invalid MetaImage DimSize");
  }
  if (const auto* channels = header.find("ElementNumberOfChannels");
      channels && parse_numbers(*channels) != std::vector<double>{1.0}) {
    throw DatasetError("multi-channel MetaImage is not supported");
  }
  const Dims dims{dim_size.size() == 3 ? static_cast<std::size_t>(dim_size[2]) : 1,
                  static_cast<std::size_t>(dim_size[1]), static_cast<std::size_t>(dim_size[0])};

  Spacing spacing;
  const std::string* spacing_text = header.find("ElementSpacing");
  if (!spacing_text) spacing_text = header.find("ElementSize");
  if (spacing_text) {
    const auto values = parse_numbers(*spacing_text);
    const auto positive = [](double v) -> std::optional<double> {
      if (std::isfinite(v) && v > 0.0) return v;
      return std::nullopt;
    };
    if (values.size() > 0) spacing.x = positive(values[0]);
    if (values.size() > 1) spacing.y = positive(values[1]);
    if (values.size() > 2) spacing.z = positive(values[2]);
  }

  const std::string& type = require("ElementType");
  bool msb = false;
  if (const auto* v = header.find("ElementByteOrderMSB")) msb = parse_bool(*v);
  if (const auto* v = header.find("BinaryDataByteOrderMSB")) msb = parse_bool(*v);
  const bool swap = msb != (std::endian::native == std::endian::big);

  const std::size_t count = dims.voxel_count();
  const std::size_t raw_size = count * element_size(type);

  std::vector<std::uint8_t> external;
  std::span<const std::uint8_t> payload;
  const std::string& data_file = require("ElementDataFile");
  if (data_file == "LOCAL") {
    payload = std::span<const std::uint8_t>(bytes).subspan(header.data_offset);
  } else {
    external = detail::read_file(path.parent_path() / data_file);
    payload = external;
  }

  std::vector<std::uint8_t> inflated;
  const std::string* compressed = header.find("CompressedData");
  if (compressed && parse_bool(*compressed)) {
    std::size_t compressed_size = payload.size();
    if (const auto* cs = header.find("CompressedDataSize")) {
      const auto n = parse_numbers(*cs);
      if (n.size() == 1 && n[0] >= 0) compressed_size = std::min(payload.size(), static_cast<std::size_t>(n[0]));
    }
    inflated = detail::inflate_exact(payload.first(compressed_size), raw_size);
    payload = inflated;
  }
  if (payload.size() < raw_size) {
    throw DatasetError(fmt::format("{}: truncated voxel data ({} of {} bytes)", path.string(),
                                   payload.size(), raw_size));
  }

  std::vector<double> voxels = decode(type, payload.data(), count, swap);
  for (double v : voxels) {
    if (!std::isfinite(v)) throw DatasetError(fmt::format("{}: non-finite voxel values", path.string()));
  }
  LoadedDataset out;
  out.volume = Volume(id, dims, std::move(voxels), spacing);
  out.metadata.spacing = spacing;
  out.metadata.rows = dims.rows;
  out.metadata.cols = dims.cols;
  out.metadata.slices = dims.slices;
  return out;
}

}  // namespace mrqc
