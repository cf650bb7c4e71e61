#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sliceset/tensor.hpp"

namespace testing {

inline std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <typename T>
sliceset::Tensor<T> random_tensor(sliceset::Shape shape, std::mt19937_64& rng, bool requires_grad = false) {
  const auto values = uniform(sliceset::shape_numel(shape), rng);
  return sliceset::Tensor<T>(shape, std::vector<T>(values.begin(), values.end()), requires_grad);
}

template <typename T>
std::vector<T> values(const sliceset::Tensor<T>& t) {
  return std::vector<T>(t.data().begin(), t.data().end());
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sliceset-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
