#include "sliceset/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sliceset/errors.hpp"
#include "sliceset/ops.hpp"

namespace sliceset {

std::string_view loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::l1: return "l1";
    case LossKind::mse: return "mse";
    case LossKind::cross_entropy: return "cross_entropy";
  }
  return "?";
}

LossKind parse_loss(std::string_view text, std::string_view field) {
  if (text == "l1") return LossKind::l1;
  if (text == "mse") return LossKind::mse;
  if (text == "cross_entropy") return LossKind::cross_entropy;
  throw ConfigError(std::string(field) + ": unknown loss '" + std::string(text) + "' (expected l1, mse or cross_entropy)");
}

template <typename T>
Tensor<T> loss(const Tensor<T>& prediction, std::span<const double> targets, LossKind kind) {
  if (kind == LossKind::cross_entropy) {
    if (prediction.dim() != 2 || prediction.size(0) != targets.size()) {
      throw ShapeError("cross_entropy: logits " + shape_string(prediction.shape()) + " for " +
                       std::to_string(targets.size()) + " labels");
    }
    std::vector<int> labels(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double t = targets[i];
      if (t != 0.0 && t != 1.0) throw std::invalid_argument("cross_entropy: label " + std::to_string(t) + " is not 0 or 1");
      labels[i] = static_cast<int>(t);
    }
    return ops::cross_entropy(prediction, std::span<const int>(labels));
  }
  if (prediction.numel() != targets.size() || (prediction.dim() == 2 && prediction.size(1) != 1) || prediction.dim() > 2) {
    throw ShapeError(std::string(loss_name(kind)) + ": prediction " + shape_string(prediction.shape()) + " for " +
                     std::to_string(targets.size()) + " targets");
  }
  std::vector<T> values(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) values[i] = static_cast<T>(targets[i]);
  Tensor<T> target(prediction.shape(), std::move(values));
  return kind == LossKind::l1 ? ops::l1_loss(prediction, target) : ops::mse_loss(prediction, target);
}

template Tensor<float> loss(const Tensor<float>&, std::span<const double>, LossKind);
template Tensor<double> loss(const Tensor<double>&, std::span<const double>, LossKind);

}  // namespace sliceset
