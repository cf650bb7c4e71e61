#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sliceset {

// Anatomical slicing axes. Volume extents are stored in this order.
enum class Axis { sagittal = 0, coronal = 1, axial = 2 };

std::string_view axis_name(Axis axis);
// Throws ConfigError naming `field` for anything but sagittal/coronal/axial.
Axis parse_axis(std::string_view text, std::string_view field = "axis");

enum class Task { regression, classification };

std::string_view task_name(Task task);
Task parse_task(std::string_view text, std::string_view field = "task");

using Extents = std::array<std::size_t, 3>;

/// Scalar 3D grid plus its prediction target. Voxels are stored with the
/// sagittal index fastest (NIfTI order): index = i + nx * (j + ny * k).
struct Volume {
  Extents extents{0, 0, 0};
  std::vector<float> voxels;
  std::string subject_id;
  double target = 0.0;  // age in years, or 0/1 label

  static Volume zeros(Extents extents);

  std::size_t voxel_count() const { return extents[0] * extents[1] * extents[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + extents[0] * (j + extents[1] * k);
  }
  float at(std::size_t i, std::size_t j, std::size_t k) const { return voxels[index(i, j, k)]; }
  float& at(std::size_t i, std::size_t j, std::size_t k) { return voxels[index(i, j, k)]; }

  // Throws ShapeError when extents and voxel count disagree.
  void validate() const;
};

// Per-volume z-score. Constant volumes map to all zeros.
Volume normalize(const Volume& volume);

}  // namespace sliceset
