#include "sliceset/volume.hpp"

#include <algorithm>
#include <cmath>

#include "sliceset/errors.hpp"
#include "sliceset/tensor.hpp"

namespace sliceset {

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::sagittal: return "sagittal";
    case Axis::coronal: return "coronal";
    case Axis::axial: return "axial";
  }
  return "unknown";
}

Axis parse_axis(std::string_view text, std::string_view field) {
  if (text == "sagittal") return Axis::sagittal;
  if (text == "coronal") return Axis::coronal;
  if (text == "axial") return Axis::axial;
  throw ConfigError(std::string(field) + ": unknown axis '" + std::string(text) +
                    "' (expected sagittal, coronal or axial)");
}

std::string_view task_name(Task task) { return task == Task::regression ? "regression" : "classification"; }

Task parse_task(std::string_view text, std::string_view field) {
  if (text == "regression") return Task::regression;
  if (text == "classification") return Task::classification;
  throw ConfigError(std::string(field) + ": unknown task '" + std::string(text) +
                    "' (expected regression or classification)");
}

Volume Volume::zeros(Extents extents) {
  Volume v;
  v.extents = extents;
  v.voxels.assign(extents[0] * extents[1] * extents[2], 0.0f);
  v.validate();
  return v;
}

void Volume::validate() const {
  for (auto e : extents) {
    if (e == 0) throw ShapeError("volume extents must be positive");
  }
  if (voxels.size() != voxel_count()) {
    throw ShapeError("volume " + subject_id + ": " + std::to_string(voxels.size()) + " voxels for extents " +
                     shape_string({extents[0], extents[1], extents[2]}));
  }
}

Volume normalize(const Volume& volume) {
  volume.validate();
  Volume out = volume;
  const double n = static_cast<double>(volume.voxels.size());
  double mean = 0.0;
  for (float v : volume.voxels) mean += v;
  mean /= n;
  double var = 0.0;
  for (float v : volume.voxels) var += (v - mean) * (v - mean);
  var /= n;
  const double stddev = std::sqrt(var);
  // Relative guard: values that are constant up to float rounding count as constant.
  if (stddev <= 1e-6 * std::max(1.0, std::abs(mean))) {
    std::fill(out.voxels.begin(), out.voxels.end(), 0.0f);
    return out;
  }
  for (auto& v : out.voxels) v = static_cast<float>((v - mean) / stddev);
  return out;
}

}  // namespace sliceset
