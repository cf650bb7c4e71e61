#include "sliceset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>

#include "sliceset/errors.hpp"

namespace sliceset {

namespace {

std::size_t blob_margin(double radius) { return static_cast<std::size_t>(std::ceil(radius)); }

std::string subject_name(std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "sub-%05zu", index);
  return buffer;
}

void add_ball(Volume& v, const std::array<std::size_t, 3>& centre, double radius, double amplitude) {
  const auto m = static_cast<std::ptrdiff_t>(blob_margin(radius));
  const double r2 = radius * radius;
  for (std::ptrdiff_t dk = -m; dk <= m; ++dk)
    for (std::ptrdiff_t dj = -m; dj <= m; ++dj)
      for (std::ptrdiff_t di = -m; di <= m; ++di) {
        if (static_cast<double>(di * di + dj * dj + dk * dk) > r2) continue;
        const auto i = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(centre[0]) + di);
        const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(centre[1]) + dj);
        const auto k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(centre[2]) + dk);
        v.at(i, j, k) += static_cast<float>(amplitude);
      }
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.count == 0) throw ConfigError("count: must be positive");
  if (!(spec.noise_std >= 0.0)) throw ConfigError("noise_std: must be non-negative");
  if (!(spec.blob_radius > 0.0)) throw ConfigError("blob_radius: must be positive");
  if (spec.positive_fraction < 0.0 || spec.positive_fraction > 1.0) {
    throw ConfigError("positive_fraction: must lie in [0, 1]");
  }
  const std::size_t need = 2 * blob_margin(spec.blob_radius) + 1;
  for (std::size_t d = 0; d < 3; ++d) {
    if (spec.extents[d] < need) {
      throw ConfigError("extents: axis " + std::to_string(d) + " has " + std::to_string(spec.extents[d]) +
                        " voxels but a blob of radius " + std::to_string(spec.blob_radius) + " needs " +
                        std::to_string(need));
    }
  }
}

std::pair<std::size_t, std::size_t> blob_centre_range(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t m = blob_margin(spec.blob_radius);
  const std::size_t extent = spec.extents[static_cast<std::size_t>(spec.axis)];
  return {m, extent - 1 - m};
}

std::vector<Volume> generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t m = blob_margin(spec.blob_radius);
  const auto axis = static_cast<std::size_t>(spec.axis);

  std::vector<int> labels(spec.count, 1);
  if (spec.task == Task::classification) {
    const auto positives = static_cast<std::size_t>(std::llround(spec.positive_fraction * static_cast<double>(spec.count)));
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(positives), labels.end(), 0);
    std::shuffle(labels.begin(), labels.end(), rng);
  }

  std::vector<Volume> out;
  out.reserve(spec.count);
  for (std::size_t n = 0; n < spec.count; ++n) {
    Volume v = Volume::zeros(spec.extents);
    v.subject_id = subject_name(n);
    std::array<std::size_t, 3> centre{};
    for (std::size_t d = 0; d < 3; ++d) centre[d] = uniform_index(rng, m, spec.extents[d] - 1 - m);
    const bool has_blob = labels[n] == 1;
    if (has_blob) add_ball(v, centre, spec.blob_radius, spec.blob_amplitude);
    if (spec.noise_std > 0.0) {
      for (auto& x : v.voxels) x += static_cast<float>(spec.noise_std * noise(rng));
    }
    if (spec.task == Task::regression) {
      v.target = spec.target_offset + spec.target_slope * static_cast<double>(centre[axis]);
    } else {
      v.target = has_blob ? 1.0 : 0.0;
    }
    out.push_back(std::move(v));
  }
  return out;
}

ImageDataset generate_synthetic_2d(const Synthetic2dSpec& spec) {
  if (spec.count == 0) throw ConfigError("count: must be positive");
  if (!(spec.noise_std >= 0.0)) throw ConfigError("noise_std: must be non-negative");
  if (!(spec.min_radius > 0.0) || spec.max_radius < spec.min_radius) {
    throw ConfigError("radius: need 0 < min_radius <= max_radius");
  }
  const std::size_t m = blob_margin(spec.max_radius);
  if (spec.height < 2 * m + 1 || spec.width < 2 * m + 1) {
    throw ConfigError("extents: image too small for a disc of radius " + std::to_string(spec.max_radius));
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> radius(spec.min_radius, spec.max_radius);

  ImageDataset data;
  data.height = spec.height;
  data.width = spec.width;
  const auto positives = static_cast<std::size_t>(std::llround(spec.positive_fraction * static_cast<double>(spec.count)));
  data.labels.assign(spec.count, 0);
  std::fill_n(data.labels.begin(), positives, 1);
  std::shuffle(data.labels.begin(), data.labels.end(), rng);
  data.pixels.assign(spec.count * spec.height * spec.width, 0.0f);
  for (std::size_t n = 0; n < spec.count; ++n) {
    float* img = data.pixels.data() + n * spec.height * spec.width;
    const std::size_t cy = uniform_index(rng, m, spec.height - 1 - m);
    const std::size_t cx = uniform_index(rng, m, spec.width - 1 - m);
    const double r = radius(rng);
    if (data.labels[n] == 1) {
      for (std::size_t y = cy - m; y <= cy + m; ++y)
        for (std::size_t x = cx - m; x <= cx + m; ++x) {
          const double dy = static_cast<double>(y) - static_cast<double>(cy);
          const double dx = static_cast<double>(x) - static_cast<double>(cx);
          if (dy * dy + dx * dx <= r * r) img[y * spec.width + x] += static_cast<float>(spec.amplitude);
        }
    }
    if (spec.noise_std > 0.0) {
      for (std::size_t i = 0; i < spec.height * spec.width; ++i) img[i] += static_cast<float>(spec.noise_std * noise(rng));
    }
  }
  return data;
}

}  // namespace sliceset
