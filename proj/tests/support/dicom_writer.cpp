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

#include "dicom_writer.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <gdcmAttribute.h>
#include <gdcmImageWriter.h>
#include <gdcmMediaStorage.h>
#include <gdcmReader.h>
#include <gdcmWriter.h>
#include <gdcmTrace.h>
#include <gdcmUIDGenerator.h>

namespace mrqc::testing {

namespace {

template <std::uint16_t G, std::uint16_t E, typename V>
void put(gdcm::DataSet& ds, V value) {
  gdcm::Attribute<G, E> a;
  a.SetValue(value);
  ds.Replace(a.GetAsDataElement());
}

void put_string(gdcm::DataSet& ds, std::uint16_t group, std::uint16_t element, const std::string& value) {
  gdcm::DataElement de(gdcm::Tag(group, element));
  std::string padded = value;
  if (padded.size() % 2) padded += ' ';
  de.SetByteValue(padded.data(), static_cast<std::uint32_t>(padded.size()));
  de.SetVR(gdcm::VR::LO);
  ds.Replace(de);
}

void put_ds(gdcm::DataSet& ds, std::uint16_t group, std::uint16_t element, double value) {
  std::string text = fmt::format("{}", value);
  if (text.size() % 2) text += ' ';
  gdcm::DataElement de(gdcm::Tag(group, element));
  de.SetByteValue(text.data(), static_cast<std::uint32_t>(text.size()));
  de.SetVR(gdcm::VR::DS);
  ds.Replace(de);
}

}  // namespace

std::vector<std::filesystem::path> write_dicom_series(const Volume& volume, const std::filesystem::path& dir,
                                                      const DicomSeriesOptions& options) {
  gdcm::Trace::SetWarning(false);
  gdcm::Trace::SetDebug(false);
  std::filesystem::create_directories(dir);
  const auto& dims = volume.dims();
  std::vector<std::size_t> order = options.file_order;
  if (order.empty()) {
    order.resize(dims.slices);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  gdcm::UIDGenerator uid;
  const std::string series_uid = uid.Generate();
  const std::string study_uid = uid.Generate();
  std::vector<std::filesystem::path> paths;
  for (std::size_t f = 0; f < order.size(); ++f) {
    const std::size_t z = order[f];
    gdcm::ImageWriter writer;
    gdcm::Image& image = writer.GetImage();
    image.SetNumberOfDimensions(2);
    const unsigned d[2] = {static_cast<unsigned>(dims.cols), static_cast<unsigned>(dims.rows)};
    image.SetDimensions(d);
    image.SetPixelFormat(gdcm::PixelFormat::INT16);
    image.SetPhotometricInterpretation(gdcm::PhotometricInterpretation::MONOCHROME2);
    image.SetTransferSyntax(gdcm::TransferSyntax::ExplicitVRLittleEndian);
    image.SetSpacing(0, options.pixel_spacing_col);
    image.SetSpacing(1, options.pixel_spacing_row);
    image.SetSlope(options.rescale_slope);
    image.SetIntercept(options.rescale_intercept);
    const double origin[3] = {0.0, 0.0, options.slice_gap * static_cast<double>(z)};
    image.SetOrigin(origin);
    const double cosines[6] = {1, 0, 0, 0, 1, 0};
    image.SetDirectionCosines(cosines);

    std::vector<std::int16_t> pixels(dims.slice_size());
    const auto slice = volume.slice(z);
    for (std::size_t p = 0; p < pixels.size(); ++p) {
      pixels[p] = static_cast<std::int16_t>(
          std::lround((slice.data[p] - options.rescale_intercept) / options.rescale_slope));
    }
    gdcm::DataElement px(gdcm::Tag(0x7fe0, 0x0010));
    px.SetByteValue(reinterpret_cast<const char*>(pixels.data()),
                    static_cast<std::uint32_t>(pixels.size() * sizeof(std::int16_t)));
    image.SetDataElement(px);

    gdcm::DataSet& ds = writer.GetFile().GetDataSet();
    gdcm::MediaStorage ms(gdcm::MediaStorage::MRImageStorage);
    put_string(ds, 0x0008, 0x0016, ms.GetString());
    put_string(ds, 0x0020, 0x000e, series_uid);
    put_string(ds, 0x0020, 0x000d, study_uid);
    put<0x0008, 0x0060>(ds, "MR");
    if (options.manufacturer) put<0x0008, 0x0070>(ds, options.manufacturer->c_str());
    if (options.field_strength) put<0x0018, 0x0087>(ds, *options.field_strength);
    if (options.repetition_time) put<0x0018, 0x0080>(ds, *options.repetition_time);
    if (options.echo_time) put<0x0018, 0x0081>(ds, *options.echo_time);
    if (options.write_instance_number) put<0x0020, 0x0013>(ds, static_cast<int>(z + 1));
    for (const auto& [tag, value] : options.extra) put_string(ds, tag.first, tag.second, value);

    const auto path = dir / fmt::format("slice_{:03}.dcm", f);
    writer.SetFileName(path.c_str());
    if (!writer.Write()) throw Error("test DICOM writer failed for " + path.string());
    // ImageWriter normalizes some attributes for MR storage; set the raw
    // values the test asks for in a second pass.
    gdcm::Reader reader;
    reader.SetFileName(path.c_str());
    if (!reader.Read()) throw Error("test DICOM re-read failed");
    gdcm::DataSet& raw = reader.GetFile().GetDataSet();
    put_ds(raw, 0x0028, 0x1053, options.rescale_slope);
    put_ds(raw, 0x0028, 0x1052, options.rescale_intercept);
    raw.Remove(gdcm::Tag(0x0018, 0x0088));
    raw.Remove(gdcm::Tag(0x0018, 0x0050));
    if (options.slice_thickness) put_ds(raw, 0x0018, 0x0050, *options.slice_thickness);
    if (options.spacing_between_slices) put_ds(raw, 0x0018, 0x0088, *options.spacing_between_slices);
    if (!options.write_position) raw.Remove(gdcm::Tag(0x0020, 0x0032));
    gdcm::Writer rewrite;
    rewrite.SetFile(reader.GetFile());
    rewrite.SetFileName(path.c_str());
    if (!rewrite.Write()) throw Error("test DICOM rewrite failed");
    paths.push_back(path);
  }
  return paths;
}

}  // namespace mrqc::testing
