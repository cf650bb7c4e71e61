#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sliceset/layers.hpp"

namespace sliceset {

enum class OptimizerKind { adam, sgd };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text, std::string_view field = "optimizer.kind");

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.0;  // sgd only
};

void validate(const OptimizerConfig& config);

// Moments are kept in double regardless of the parameter type.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

// One bias-corrected Adam update:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState& state, const OptimizerConfig& config);

// buf = momentum * buf + g;  p -= lr * buf. With momentum 0 this is p -= lr g.
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, std::vector<double>& velocity,
              const OptimizerConfig& config);

/// Applies adam_step / sgd_step to every trainable entry of a state list.
/// Entries without a gradient are treated as having a zero gradient.
template <typename T>
class Optimizer {
 public:
  Optimizer(StateList<T> parameters, OptimizerConfig config);

  void zero_grad();
  void step();
  const OptimizerConfig& config() const { return config_; }

 private:
  StateList<T> parameters_;
  OptimizerConfig config_;
  std::vector<AdamState> adam_;
  std::vector<std::vector<double>> velocity_;
  std::vector<T> zeros_;
};

extern template class Optimizer<float>;
extern template class Optimizer<double>;

}  // namespace sliceset
