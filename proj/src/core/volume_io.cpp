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

#include "mrqc/volume_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <zlib.h>

#include "bytes.hpp"
#include "dicom_header.hpp"
#include "metaimage_header.hpp"
#include "mrqc/log.hpp"
#include "nifti_fields.hpp"

namespace mrqc {

namespace fs = std::filesystem;

const char* format_name(Format format) {
  switch (format) {
    case Format::dicom_series: return "dicom-series";
    case Format::nifti: return "nifti";
    case Format::metaimage: return "metaimage";
  }
  return "unknown";
}

namespace {

enum class FileKind { dicom, nifti, metaimage, unknown };

FileKind classify(const fs::path& path) {
  const std::string name = detail::lowercase(path.filename().string());
  const auto ends_with = [&](std::string_view suffix) {
    return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".nii") || ends_with(".nii.gz")) return FileKind::nifti;
  if (ends_with(".mha")) return FileKind::metaimage;
  if (ends_with(".dcm") || ends_with(".ima")) return FileKind::dicom;
  if (name == "dicomdir") return FileKind::unknown;
  if (is_dicom_file(path)) return FileKind::dicom;
  return FileKind::unknown;
}

std::string strip_image_extension(const fs::path& relative) {
  std::string s = relative.generic_string();
  for (std::string_view ext : {".nii.gz", ".nii", ".mha"}) {
    if (detail::lowercase(s).ends_with(ext)) return s.substr(0, s.size() - ext.size());
  }
  return s;
}

/// Ids double as directory names for thumbnails, so path separators are folded.
std::string make_id(std::string s) {
  std::replace(s.begin(), s.end(), '/', '_');
  std::replace(s.begin(), s.end(), '\\', '_');
  return s;
}

bool is_hidden(const fs::path& p) {
  const auto name = p.filename().string();
  return !name.empty() && name.front() == '.';
}

}  // namespace

std::vector<DatasetDescriptor> discover_cohort(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(fmt::format("input directory '{}' does not exist or is not a directory", root.string()));
  }
  fs::recursive_directory_iterator it(root, fs::directory_options::none, ec);
  if (ec) throw Error(fmt::format("cannot read '{}': {}", root.string(), ec.message()));

  std::map<fs::path, std::vector<fs::path>> dicom_dirs;
  std::vector<DatasetDescriptor> out;
  for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) throw Error(fmt::format("cannot read '{}': {}", root.string(), ec.message()));
    const fs::path path = it->path();
    if (is_hidden(path)) {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file(ec)) continue;
    switch (classify(path)) {
      case FileKind::dicom: dicom_dirs[path.parent_path()].push_back(path); break;
      case FileKind::nifti:
        out.push_back({make_id(strip_image_extension(fs::relative(path, root))), Format::nifti, {path}});
        break;
      case FileKind::metaimage:
        out.push_back({make_id(strip_image_extension(fs::relative(path, root))), Format::metaimage, {path}});
        break;
      case FileKind::unknown:
        log::warn("skipping unrecognized file {}", path.string());
        break;
    }
  }
  for (auto& [dir, files] : dicom_dirs) {
    std::sort(files.begin(), files.end());
    fs::path rel = fs::relative(dir, root);
    std::string id = rel.empty() || rel == "." ? fs::absolute(root).lexically_normal().filename().string()
                                               : rel.generic_string();
    if (id.empty()) id = "dicom";
    out.push_back({make_id(id), Format::dicom_series, std::move(files)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.id != b.id ? a.id < b.id : a.files < b.files;
  });
  // Rare collisions such as "a/b.nii" next to "a_b.nii".
  std::map<std::string, int> seen;
  for (auto& d : out) {
    const int n = ++seen[d.id];
    if (n > 1) d.id = fmt::format("{}~{}", d.id, n);
  }
  return out;
}

LoadedDataset load_volume(const DatasetDescriptor& descriptor) {
  LoadedDataset loaded;
  switch (descriptor.format) {
    case Format::dicom_series: loaded = read_dicom_series(descriptor.files, descriptor.id); break;
    case Format::nifti: loaded = read_nifti(descriptor.files.at(0), descriptor.id); break;
    case Format::metaimage: loaded = read_metaimage(descriptor.files.at(0), descriptor.id); break;
  }
  loaded.volume.require_measurable();
  return loaded;
}

namespace {

bool well_formed_tag_name(std::string_view name) {
  if (name.empty()) return false;
  if (std::isalpha(static_cast<unsigned char>(name.front()))) {
    return std::all_of(name.begin(), name.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
  }
  std::string digits;
  bool comma = false;
  for (char c : name) {
    if (std::isxdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    else if (c == ',') comma = true;
    else if (c != '(' && c != ')') return false;
  }
  return digits.size() == 8 && (comma || name.size() == 8);
}

}  // namespace

std::vector<std::string> read_tag_list(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read tag list '{}'", path.string()));
  std::vector<std::string> tags;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const std::string name = detail::trim(line);
    if (name.empty()) continue;
    if (!well_formed_tag_name(name)) {
      log::warn("{}:{}: malformed tag name '{}' skipped", path.string(), number, name);
      continue;
    }
    tags.push_back(name);
  }
  return tags;
}

TagValues resolve_tags(const DatasetDescriptor& descriptor, const std::vector<std::string>& tags) {
  TagValues out;
  out.reserve(tags.size());
  if (tags.empty()) return out;
  switch (descriptor.format) {
    case Format::dicom_series: {
      std::vector<std::uint32_t> numbers;
      std::vector<std::size_t> positions;
      for (std::size_t k = 0; k < tags.size(); ++k) {
        out.emplace_back(tags[k], std::nullopt);
        if (const auto n = dicom_tag_number(tags[k])) {
          numbers.push_back(*n);
          positions.push_back(k);
        } else {
          log::warn("{}: unknown DICOM keyword '{}'", descriptor.id, tags[k]);
        }
      }
      const auto first = order_dicom_series(descriptor.files).front();
      const auto values = read_dicom_tags(first, numbers);
      for (std::size_t k = 0; k < positions.size(); ++k) out[positions[k]].second = values[k];
      break;
    }
    case Format::metaimage: {
      const auto bytes = detail::read_file(descriptor.files.at(0));
      const auto header = read_metaimage_header(bytes);
      for (const auto& t : tags) {
        const std::string* v = header.find(t);
        out.emplace_back(t, v && !v->empty() ? std::optional<std::string>(*v) : std::nullopt);
      }
      break;
    }
    case Format::nifti: {
      std::vector<std::uint8_t> head(540);
      gzFile file = gzopen(descriptor.files.at(0).c_str(), "rb");
      if (!file) throw DatasetError(fmt::format("cannot open {}", descriptor.files.at(0).string()));
      const int n = gzread(file, head.data(), static_cast<unsigned>(head.size()));
      gzclose(file);
      head.resize(n > 0 ? static_cast<std::size_t>(n) : 0);
      const NiftiHeader h = parse_nifti_header(head);
      const std::map<std::string, std::string> fields = {
          {"descrip", h.descrip}, {"aux_file", h.aux_file}, {"intent_name", h.intent_name}};
      for (const auto& t : tags) {
        const auto it = fields.find(t);
        out.emplace_back(t, it != fields.end() && !it->second.empty()
                                ? std::optional<std::string>(it->second)
                                : std::nullopt);
      }
      break;
    }
  }
  return out;
}

TagValues extract_extra_tags(const DatasetDescriptor& descriptor, const fs::path& tag_list_file) {
  return resolve_tags(descriptor, read_tag_list(tag_list_file));
}

}  // namespace mrqc
