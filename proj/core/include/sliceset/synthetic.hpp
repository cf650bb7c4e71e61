#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sliceset/volume.hpp"

namespace sliceset {

/// Desk-scale stand-in for the neuroimaging cohorts: each volume is
/// Gaussian noise, optionally carrying one solid ball ("blob").
///
/// Regression: every volume has a blob whose integer centre along `axis` is
/// drawn uniformly from the positions that keep the ball inside the grid;
/// target = target_offset + target_slope * centre. The other two centre
/// coordinates are random and carry no signal.
///
/// Classification: exactly round(count * positive_fraction) volumes carry a
/// blob (label 1), the rest are pure noise (label 0); order is shuffled.
struct SyntheticSpec {
  Extents extents{16, 20, 16};
  Task task = Task::regression;
  Axis axis = Axis::sagittal;
  double blob_radius = 2.0;
  double blob_amplitude = 1.0;
  double noise_std = 0.1;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  double positive_fraction = 0.5;
  double target_offset = 0.0;
  double target_slope = 1.0;
};

// Throws ConfigError for count == 0, negative noise, or a blob that does not
// fit inside the extents.
void validate(const SyntheticSpec& spec);

std::vector<Volume> generate_synthetic(const SyntheticSpec& spec);

// Range [min, max] of centre positions along the target axis.
std::pair<std::size_t, std::size_t> blob_centre_range(const SyntheticSpec& spec);

/// Single-channel 2D images with or without a disc, for encoder pretraining.
/// Disc radius is uniform in [min_radius, max_radius], mirroring the
/// cross-sections of a ball sliced at varying depths.
struct Synthetic2dSpec {
  std::size_t height = 16;
  std::size_t width = 16;
  double min_radius = 1.0;
  double max_radius = 2.0;
  double amplitude = 1.0;
  double noise_std = 0.1;
  std::size_t count = 500;
  std::uint64_t seed = 0;
  double positive_fraction = 0.5;
};

struct ImageDataset {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;  // [count, height, width]
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

ImageDataset generate_synthetic_2d(const Synthetic2dSpec& spec);

}  // namespace sliceset
