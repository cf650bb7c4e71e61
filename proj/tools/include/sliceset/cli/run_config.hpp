#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sliceset/model.hpp"
#include "sliceset/optim.hpp"
#include "sliceset/train.hpp"
#include "sliceset/transfer.hpp"

namespace sliceset::cli {

/// Either three split manifests, or one manifest split by subject.
struct DataConfig {
  std::string train;
  std::string validation;
  std::string test;
  std::string manifest;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  std::uint64_t split_seed = 0;
  bool normalize = true;
};

/// Everything `sliceset train` needs. JSON layout:
/// {
///   "model": {"encoder": {"kind", "input_channels", "width"},
///             "aggregator": {"kind", "model_dim", "ff_hidden_dim"},
///             "positional", "axis", "task"},
///   "train": {"epochs", "batch_size", "loss", "selection_metric", "seed",
///             "standardize_targets", "freeze_batchnorm"},
///   "optimizer": {"kind", "learning_rate", "beta1", "beta2", "epsilon", "momentum"},
///   "data": {"train", "validation", "test"} or {"manifest", "split", "split_seed"}, plus "normalize",
///   "output_dir", "pretrained", "stem_adapter", "seeds"
/// }
/// Every key is optional; unknown keys are errors.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::optional<LossKind> loss;                     // unset: task default
  std::optional<SelectionMetric> selection_metric;  // unset: task default
  OptimizerConfig optimizer;
  DataConfig data;
  std::string output_dir = "run";
  std::string pretrained;
  StemAdapter stem_adapter = StemAdapter::replicate;
  std::size_t seeds = 1;
};

// Relative data/pretrained/output paths resolve against `base`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Fills task-dependent defaults (loss, selection metric) and checks every
// field; ConfigError names the field.
void resolve(RunConfig& config);

// Fully resolved configuration as pretty JSON.
std::string to_json(const RunConfig& config);

}  // namespace sliceset::cli
