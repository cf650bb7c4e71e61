#pragma once

#include <span>
#include <string_view>

#include "sliceset/tensor.hpp"

namespace sliceset {

enum class LossKind { l1, mse, cross_entropy };

std::string_view loss_name(LossKind kind);
LossKind parse_loss(std::string_view text, std::string_view field = "train.loss");

/// l1 / mse compare a [B] or [B, 1] prediction with B targets;
/// cross_entropy takes [B, 2] logits and 0/1 labels (targets are rounded,
/// anything else is rejected).
template <typename T>
Tensor<T> loss(const Tensor<T>& prediction, std::span<const double> targets, LossKind kind);

}  // namespace sliceset
