#include "sliceset/optim.hpp"

#include <cmath>
#include <string>

#include "sliceset/errors.hpp"

namespace sliceset {

std::string_view optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text, std::string_view field) {
  if (text == "adam") return OptimizerKind::adam;
  if (text == "sgd") return OptimizerKind::sgd;
  throw ConfigError(std::string(field) + ": unknown optimizer '" + std::string(text) + "' (expected adam or sgd)");
}

void validate(const OptimizerConfig& config) {
  if (!(config.learning_rate > 0.0)) throw ConfigError("optimizer.learning_rate: must be positive");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0)) throw ConfigError("optimizer.beta1: must be in [0, 1)");
  if (!(config.beta2 >= 0.0 && config.beta2 < 1.0)) throw ConfigError("optimizer.beta2: must be in [0, 1)");
  if (!(config.epsilon > 0.0)) throw ConfigError("optimizer.epsilon: must be positive");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ConfigError("optimizer.momentum: must be in [0, 1)");
}

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState& state, const OptimizerConfig& config) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient length mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] = static_cast<T>(static_cast<double>(params[i]) - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon));
  }
}

template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, std::vector<double>& velocity,
              const OptimizerConfig& config) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step: parameter/gradient length mismatch");
  if (config.momentum == 0.0) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] = static_cast<T>(static_cast<double>(params[i]) - config.learning_rate * static_cast<double>(grads[i]));
    }
    return;
  }
  if (velocity.size() != params.size()) velocity.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = config.momentum * velocity[i] + static_cast<double>(grads[i]);
    params[i] = static_cast<T>(static_cast<double>(params[i]) - config.learning_rate * velocity[i]);
  }
}

template <typename T>
Optimizer<T>::Optimizer(StateList<T> parameters, OptimizerConfig config)
    : parameters_(std::move(parameters)), config_(config) {
  validate(config_);
  for (const auto& p : parameters_) {
    if (!p.trainable) throw std::invalid_argument("Optimizer: buffer " + p.name + " passed as a parameter");
  }
  adam_.resize(parameters_.size());
  velocity_.resize(parameters_.size());
}

template <typename T>
void Optimizer<T>::zero_grad() {
  for (auto& p : parameters_) p.tensor.zero_grad();
}

template <typename T>
void Optimizer<T>::step() {
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    Tensor<T>& t = parameters_[i].tensor;
    std::span<const T> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros_.assign(t.numel(), T(0));
      g = zeros_;
    }
    if (config_.kind == OptimizerKind::adam) {
      adam_step(t.mutable_data(), g, adam_[i], config_);
    } else {
      sgd_step(t.mutable_data(), g, velocity_[i], config_);
    }
  }
}

template void adam_step<float>(std::span<float>, std::span<const float>, AdamState&, const OptimizerConfig&);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamState&, const OptimizerConfig&);
template void sgd_step<float>(std::span<float>, std::span<const float>, std::vector<double>&, const OptimizerConfig&);
template void sgd_step<double>(std::span<double>, std::span<const double>, std::vector<double>&, const OptimizerConfig&);
template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace sliceset
