#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sliceset/cli/run_config.hpp"
#include "sliceset/pretrain.hpp"
#include "sliceset/synthetic.hpp"

namespace sliceset::cli {

// Exit codes: 0 success, 1 a check or contract failed, 2 usage/config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

struct SynthOptions {
  SyntheticSpec spec;
  std::string output_dir = "data";
  bool gzip = false;
  std::optional<std::array<double, 3>> split;  // also write train/validation/test manifests
  std::uint64_t split_seed = 0;
};

// Writes one NIfTI per volume plus manifest.json (paths relative to it).
int cmd_synth(const SynthOptions& options, std::ostream& out);

struct TrainOverrides {
  std::optional<std::size_t> epochs, batch_size, seeds, width, input_channels;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<std::string> optimizer, loss, encoder, aggregator, axis, task, output_dir, pretrained, stem_adapter;
  std::optional<std::string> manifest, train, validation, test;
  std::optional<bool> positional, freeze_batchnorm;
};

void apply_overrides(RunConfig& config, const TrainOverrides& overrides);

/// Trains one model per seed (seed, seed + 1, ...). Output directory:
///   resolved_config.json, [train|validation|test]_manifest.json (when split
///   from one manifest), and per seed train_log.jsonl, checkpoint.ssnw,
///   test_report.json (in seed-<s>/ when several seeds), plus
///   aggregate_report.json for several seeds.
int cmd_train(RunConfig config, std::ostream& out);

struct EvalOptions {
  std::vector<std::string> checkpoints;
  std::string manifest;
  bool percent = false;
  bool normalize = true;
  std::string output;  // optional report path
};

int cmd_eval(const EvalOptions& options, std::ostream& out);

struct ExportOptions {
  std::string checkpoint;  // re-export an existing archive
  bool encoder_only = false;
  bool pretrain_2d = false;
  PretrainConfig pretrain;
  Synthetic2dSpec images;
  std::string output;
};

int cmd_export_weights(const ExportOptions& options, std::ostream& out);

struct ImportOptionsCli {
  std::string archive;
  std::string config;  // run config providing the model section
  TrainOverrides overrides;
  std::optional<std::size_t> num_slices;
  std::uint64_t seed = 0;
  std::string output;
};

// Builds a freshly initialized model, imports the encoder part of an
// archive, prints the load report and saves the full model archive.
int cmd_import_weights(const ImportOptionsCli& options, std::ostream& out);

int cmd_check(const std::string& suite, std::uint64_t seed, std::ostream& out);

}  // namespace sliceset::cli
