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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrqc {

/// True when the file carries the "DICM" marker after the 128-byte preamble.
bool is_dicom_file(const std::filesystem::path& path);

/// Acquisition order: position along the slice normal, then InstanceNumber,
/// then file name.
std::vector<std::filesystem::path> order_dicom_series(const std::vector<std::filesystem::path>& files);

/// Keyword ("StationName") or number ("0008,1010", "(0008,1010)", "00081010")
/// to a packed group/element value. Unknown keywords give nullopt.
std::optional<std::uint32_t> dicom_tag_number(std::string_view name);

std::vector<std::optional<std::string>> read_dicom_tags(const std::filesystem::path& file,
                                                        const std::vector<std::uint32_t>& tags);

}  // namespace mrqc
