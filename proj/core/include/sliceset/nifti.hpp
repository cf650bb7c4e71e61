#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sliceset/volume.hpp"

namespace sliceset {

// Single-file NIfTI-1 (.nii / .nii.gz) support. Reads 3D volumes of
// datatype uint8, int16 or float32 in either byte order; writes float32
// little-endian. Orientation fields are parsed but not applied: volumes are
// assumed to be registered to a common template already.

struct NiftiInfo {
  Extents extents{0, 0, 0};
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  float vox_offset = 0.0f;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  bool big_endian = false;
};

inline constexpr std::size_t kNiftiHeaderSize = 348;

// Parses an uncompressed image buffer. Subject id and target are left empty.
Volume parse_nifti(std::span<const std::byte> bytes, NiftiInfo* info = nullptr);

// Reads a file, transparently gunzipping when it is compressed.
Volume load_nifti(const std::filesystem::path& path, NiftiInfo* info = nullptr);

std::vector<std::byte> encode_nifti(const Volume& volume);

// Writes float32 NIfTI-1; a ".gz" extension produces a gzip container.
void save_nifti(const Volume& volume, const std::filesystem::path& path);

}  // namespace sliceset
