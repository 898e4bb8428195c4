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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mrqc {

struct MetaImageHeader {
  std::vector<std::pair<std::string, std::string>> fields;
  std::size_t data_offset = 0;

  const std::string* find(std::string_view key) const;
};

/// Parses "Key = Value" lines up to and including ElementDataFile.
MetaImageHeader read_metaimage_header(std::span<const std::uint8_t> bytes);

}  // namespace mrqc
