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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrqc/volume.hpp"

namespace mrqc::detail {

template <typename T>
T load_scalar(std::span<const std::uint8_t> bytes, std::size_t offset, bool swap) {
  if (offset + sizeof(T) > bytes.size()) throw DatasetError("truncated header");
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, bytes.data() + offset, sizeof(T));
  if (swap) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

/// Converts `count` packed elements of type T starting at `bytes` to doubles.
template <typename T>
void convert_elements(const std::uint8_t* bytes, std::size_t count, bool swap,
                      std::vector<double>& out) {
  out.resize(count);
  std::uint8_t raw[sizeof(T)];
  for (std::size_t k = 0; k < count; ++k) {
    std::memcpy(raw, bytes + k * sizeof(T), sizeof(T));
    if (swap) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, raw, sizeof(T));
    out[k] = static_cast<double>(value);
  }
}

/// Whole-file read through zlib, which passes non-gzip files through unchanged.
std::vector<std::uint8_t> read_maybe_gzipped(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Inflates a zlib or gzip stream whose decompressed size is known.
std::vector<std::uint8_t> inflate_exact(std::span<const std::uint8_t> compressed,
                                        std::size_t expected_size);

std::string trim(std::string_view s);
std::string lowercase(std::string_view s);

}  // namespace mrqc::detail
