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

#include <array>
#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <zlib.h>

#include "bytes.hpp"
#include "mrqc/log.hpp"
#include "mrqc/volume_io.hpp"
#include "nifti_fields.hpp"

namespace mrqc {
namespace {

using detail::load_scalar;

// NIfTI datatype codes.
enum : int {
  kUint8 = 2, kInt16 = 4, kInt32 = 8, kFloat32 = 16, kFloat64 = 64,
  kInt8 = 256, kUint16 = 512, kUint32 = 768, kInt64 = 1024, kUint64 = 1280,
};

std::vector<double> decode_elements(int datatype, const std::uint8_t* data, std::size_t count,
                                    bool swap) {
  std::vector<double> out;
  switch (datatype) {
    case kUint8: detail::convert_elements<std::uint8_t>(data, count, swap, out); break;
    case kInt8: detail::convert_elements<std::int8_t>(data, count, swap, out); break;
    case kInt16: detail::convert_elements<std::int16_t>(data, count, swap, out); break;
    case kUint16: detail::convert_elements<std::uint16_t>(data, count, swap, out); break;
    case kInt32: detail::convert_elements<std::int32_t>(data, count, swap, out); break;
    case kUint32: detail::convert_elements<std::uint32_t>(data, count, swap, out); break;
    case kInt64: detail::convert_elements<std::int64_t>(data, count, swap, out); break;
    case kUint64: detail::convert_elements<std::uint64_t>(data, count, swap, out); break;
    case kFloat32: detail::convert_elements<float>(data, count, swap, out); break;
    case kFloat64: detail::convert_elements<double>(data, count, swap, out); break;
    default: throw DatasetError(fmt::format("unsupported NIfTI datatype {}", datatype));
  }
  return out;
}

std::size_t element_size(int datatype) {
  switch (datatype) {
    case kUint8: case kInt8: return 1;
    case kInt16: case kUint16: return 2;
    case kInt32: case kUint32: case kFloat32: return 4;
    case kInt64: case kUint64: case kFloat64: return 8;
    default: throw DatasetError(fmt::format("unsupported NIfTI datatype {}", datatype));
  }
}

// Spatial unit code in the low three bits of xyzt_units.
double unit_to_mm(int xyzt_units) {
  switch (xyzt_units & 0x07) {
    case 1: return 1000.0;  // meter
    case 3: return 0.001;   // micron
    default: return 1.0;    // mm or unknown
  }
}

std::string fixed_string(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t n) {
  if (offset + n > bytes.size()) return {};
  const char* p = reinterpret_cast<const char*>(bytes.data() + offset);
  return detail::trim(std::string_view(p, strnlen(p, n)));
}

}  // namespace

NiftiHeader parse_nifti_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 348) throw DatasetError("file too short for a NIfTI header");
  NiftiHeader h;
  const auto size_le = load_scalar<std::int32_t>(bytes, 0, false);
  const auto size_be = load_scalar<std::int32_t>(bytes, 0, true);
  int version = 0;
  if (size_le == 348 || size_le == 540) {
    version = size_le == 348 ? 1 : 2;
  } else if (size_be == 348 || size_be == 540) {
    version = size_be == 348 ? 1 : 2;
    h.swap = true;
  } else {
    throw DatasetError("not a NIfTI file (bad sizeof_hdr)");
  }
  std::array<std::int64_t, 8> dim{};
  std::array<double, 8> pixdim{};
  if (version == 1) {
    if (std::memcmp(bytes.data() + 344, "n+1", 4) != 0 &&
        std::memcmp(bytes.data() + 344, "ni1", 4) != 0) {
      throw DatasetError("NIfTI-1 magic missing");
    }
    if (std::memcmp(bytes.data() + 344, "ni1", 4) == 0) {
      throw DatasetError("two-file NIfTI (.hdr/.img) is not supported");
    }
    for (int k = 0; k < 8; ++k) {
      dim[k] = load_scalar<std::int16_t>(bytes, 40 + 2 * k, h.swap);
      pixdim[k] = load_scalar<float>(bytes, 76 + 4 * k, h.swap);
    }
    h.datatype = load_scalar<std::int16_t>(bytes, 70, h.swap);
    h.vox_offset = static_cast<std::size_t>(load_scalar<float>(bytes, 108, h.swap));
    h.scl_slope = load_scalar<float>(bytes, 112, h.swap);
    h.scl_inter = load_scalar<float>(bytes, 116, h.swap);
    h.xyzt_units = static_cast<std::uint8_t>(bytes[123]);
    h.descrip = fixed_string(bytes, 148, 80);
    h.aux_file = fixed_string(bytes, 228, 24);
    h.intent_name = fixed_string(bytes, 328, 16);
  } else {
    if (bytes.size() < 540) throw DatasetError("file too short for a NIfTI-2 header");
    if (std::memcmp(bytes.data() + 4, "n+2", 4) != 0) throw DatasetError("NIfTI-2 magic missing");
    h.datatype = load_scalar<std::int16_t>(bytes, 12, h.swap);
    for (int k = 0; k < 8; ++k) {
      dim[k] = load_scalar<std::int64_t>(bytes, 16 + 8 * k, h.swap);
      pixdim[k] = load_scalar<double>(bytes, 104 + 8 * k, h.swap);
    }
    h.vox_offset = static_cast<std::size_t>(load_scalar<std::int64_t>(bytes, 168, h.swap));
    h.scl_slope = load_scalar<double>(bytes, 176, h.swap);
    h.scl_inter = load_scalar<double>(bytes, 184, h.swap);
    h.descrip = fixed_string(bytes, 240, 80);
    h.aux_file = fixed_string(bytes, 320, 24);
    h.xyzt_units = static_cast<std::uint8_t>(load_scalar<std::int32_t>(bytes, 500, h.swap));
    h.intent_name = fixed_string(bytes, 508, 16);
  }
  const auto ndim = dim[0];
  if (ndim < 2 || ndim > 7) throw DatasetError(fmt::format("invalid NIfTI dim[0] = {}", ndim));
  for (int k = 1; k <= ndim; ++k) {
    if (dim[k] < 1) throw DatasetError(fmt::format("invalid NIfTI dim[{}] = {}", k, dim[k]));
  }
  h.cols = static_cast<std::size_t>(dim[1]);
  h.rows = static_cast<std::size_t>(dim[2]);
  h.slices = ndim >= 3 ? static_cast<std::size_t>(dim[3]) : 1;
  for (int k = 4; k <= ndim; ++k) h.extra_volumes *= static_cast<std::size_t>(dim[k]);
  const double scale = unit_to_mm(h.xyzt_units);
  const auto positive = [&](double v) -> std::optional<double> {
    if (std::isfinite(v) && v > 0.0) return v * scale;
    return std::nullopt;
  };
  h.spacing.x = positive(pixdim[1]);
  h.spacing.y = positive(pixdim[2]);
  if (ndim >= 3) h.spacing.z = positive(pixdim[3]);
  return h;
}

LoadedDataset read_nifti(const std::filesystem::path& path, const std::string& id) {
  const auto bytes = detail::read_maybe_gzipped(path);
  const NiftiHeader h = parse_nifti_header(bytes);
  const std::size_t count = h.slices * h.rows * h.cols;
  const std::size_t needed = h.vox_offset + count * element_size(h.datatype);
  if (bytes.size() < needed) {
    throw DatasetError(fmt::format("{}: truncated voxel data ({} of {} bytes)", path.string(),
                                   bytes.size(), needed));
  }
  if (h.extra_volumes > 1) {
    log::warn("{}: {} volumes along dim 4+, using the first", path.string(), h.extra_volumes);
  }
  std::vector<double> voxels = decode_elements(h.datatype, bytes.data() + h.vox_offset, count, h.swap);
  if (h.scl_slope != 0.0 && std::isfinite(h.scl_slope) && std::isfinite(h.scl_inter) &&
      !(h.scl_slope == 1.0 && h.scl_inter == 0.0)) {
    for (auto& v : voxels) v = v * h.scl_slope + h.scl_inter;
  }
  for (double v : voxels) {
    if (!std::isfinite(v)) throw DatasetError(fmt::format("{}: non-finite voxel values", path.string()));
  }

  LoadedDataset out;
  // NIfTI stores x fastest, then y, then z, which is already (slice, row, col) order.
  out.volume = Volume(id, {h.slices, h.rows, h.cols}, std::move(voxels), h.spacing);
  out.metadata.spacing = h.spacing;
  out.metadata.rows = h.rows;
  out.metadata.cols = h.cols;
  out.metadata.slices = h.slices;
  return out;
}

void write_nifti(const Volume& volume, const std::filesystem::path& path) {
  std::vector<std::uint8_t> header(352, 0);
  const auto put = [&](std::size_t offset, auto value) {
    std::memcpy(header.data() + offset, &value, sizeof(value));
  };
  const Dims& d = volume.dims();
  put(0, std::int32_t{348});
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(d.cols), static_cast<std::int16_t>(d.rows),
                               static_cast<std::int16_t>(d.slices), 1, 1, 1, 1};
  for (int k = 0; k < 8; ++k) put(40 + 2 * k, dim[k]);
  put(70, std::int16_t{kFloat32});
  put(72, std::int16_t{32});
  const Spacing& s = volume.spacing();
  const float pixdim[8] = {1.0f, static_cast<float>(s.x.value_or(1.0)),
                           static_cast<float>(s.y.value_or(1.0)),
                           static_cast<float>(s.z.value_or(1.0)), 0, 0, 0, 0};
  for (int k = 0; k < 8; ++k) put(76 + 4 * k, pixdim[k]);
  put(108, 352.0f);
  put(112, 1.0f);
  put(116, 0.0f);
  header[123] = 2;  // mm
  std::memcpy(header.data() + 344, "n+1", 4);

  std::vector<float> data(volume.voxels().begin(), volume.voxels().end());
  const bool gz = detail::lowercase(path.extension().string()) == ".gz";
  gzFile file = gzopen(path.c_str(), gz ? "wb6" : "wbT");
  if (!file) throw Error(fmt::format("cannot write {}", path.string()));
  const auto ok = [&](int written, std::size_t expected) {
    return written >= 0 && static_cast<std::size_t>(written) == expected;
  };
  const bool good =
      ok(gzwrite(file, header.data(), static_cast<unsigned>(header.size())), header.size()) &&
      ok(gzwrite(file, data.data(), static_cast<unsigned>(data.size() * sizeof(float))),
         data.size() * sizeof(float));
  if (gzclose(file) != Z_OK || !good) throw Error(fmt::format("failed writing {}", path.string()));
}

}  // namespace mrqc
