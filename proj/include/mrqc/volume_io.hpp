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

// Dataset discovery and decoding for DICOM series, NIfTI-1/2 and MetaImage.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mrqc/volume.hpp"

namespace mrqc {

enum class Format { dicom_series, nifti, metaimage };

const char* format_name(Format format);

struct DatasetDescriptor {
  std::string id;
  Format format = Format::nifti;
  std::vector<std::filesystem::path> files;

  bool operator==(const DatasetDescriptor&) const = default;
};

/// Walks `root` recursively. Each directory holding DICOM files is one dataset;
/// each NIfTI or MetaImage file is one dataset. Unrecognized files are skipped
/// with a warning. Result is sorted by id. Throws Error if root is unreadable.
std::vector<DatasetDescriptor> discover_cohort(const std::filesystem::path& root);

struct LoadedDataset {
  Volume volume;
  MetadataRecord metadata;
};

/// Decodes a dataset. Throws DatasetError on corrupt input, inconsistent slice
/// geometry, or a grid below the measurable minimum.
LoadedDataset load_volume(const DatasetDescriptor& descriptor);

/// Parses a tag-list file: one name per line, LF or CRLF, blank lines ignored.
/// Malformed names are dropped with a warning.
std::vector<std::string> read_tag_list(const std::filesystem::path& path);

using TagValues = std::vector<std::pair<std::string, std::optional<std::string>>>;

/// Resolves each tag from the dataset header, preserving order. DICOM tags are
/// looked up by keyword ("StationName") or by number ("0008,1010"); MetaImage
/// tags by header key; NIfTI exposes descrip, aux_file, intent_name.
TagValues resolve_tags(const DatasetDescriptor& descriptor, const std::vector<std::string>& tags);

TagValues extract_extra_tags(const DatasetDescriptor& descriptor,
                             const std::filesystem::path& tag_list_file);

/// Raw decoders. These return the grid as stored, without the measurable-size
/// check that load_volume applies.
LoadedDataset read_nifti(const std::filesystem::path& path, const std::string& id);
LoadedDataset read_metaimage(const std::filesystem::path& path, const std::string& id);
LoadedDataset read_dicom_series(const std::vector<std::filesystem::path>& files,
                                const std::string& id);

/// Writes a float32 NIfTI-1 single file (.nii, or gzip-compressed when the
/// name ends in .gz). Missing spacing components are written as 1 mm.
void write_nifti(const Volume& volume, const std::filesystem::path& path);

}  // namespace mrqc
