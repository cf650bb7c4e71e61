#pragma once

#include <string>
#include <string_view>

#include "sliceset/model.hpp"

namespace sliceset {

// Compact JSON form of a model configuration, stored in checkpoint metadata:
// {"aggregator": {"ff_hidden_dim", "kind", "model_dim"}, "axis",
//  "encoder": {"input_channels", "kind", "width"}, "num_slices",
//  "positional", "task"}
std::string model_config_to_json(const ModelConfig& config);

// Inverse of model_config_to_json. Missing keys keep their defaults; unknown
// keys and bad values raise ConfigError naming the field.
ModelConfig model_config_from_json(std::string_view text);

}  // namespace sliceset
