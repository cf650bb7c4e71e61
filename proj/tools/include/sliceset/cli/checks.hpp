#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sliceset/tensor.hpp"

namespace sliceset::cli {

struct CheckItem {
  std::string name;
  double value = 0.0;      // measured error
  double tolerance = 0.0;  // pass iff value < tolerance
  bool passed = false;
  std::string detail;
};

struct CheckSuiteResult {
  std::string suite;
  std::vector<CheckItem> items;
  double seconds = 0.0;

  bool passed() const;
  double max_value() const;
  std::string to_text() const;
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor)
double relative_error(double analytic, double numeric, double floor = 1e-3);

/// Compares reverse-mode gradients of a scalar function against central
/// differences (step h) on up to `samples_per_leaf` randomly chosen
/// coordinates of every leaf. Returns the largest relative error.
double gradient_check(const std::vector<Tensor<double>>& leaves, const std::function<Tensor<double>()>& loss,
                      std::mt19937_64& rng, std::size_t samples_per_leaf = 16, double h = 1e-6);

// Finite-difference checks of every differentiable op over randomized
// shapes, plus end-to-end slice-set models on 8x12x8 volumes.
CheckSuiteResult check_gradients(std::uint64_t seed = 0);

// Slice permutations with positional encodings disabled (mean and attention
// aggregators), and zero positional table vs none.
CheckSuiteResult check_permutation(std::uint64_t seed = 0, std::size_t pairs = 100);

// Metrics against definitional and brute-force oracles on random instances.
CheckSuiteResult check_metrics(std::uint64_t seed = 0, std::size_t instances = 100);

// "gradients" | "permutation" | "metrics"
CheckSuiteResult run_check(std::string_view suite, std::uint64_t seed = 0);

}  // namespace sliceset::cli
