#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sliceset/cli/commands.hpp"
#include "sliceset/errors.hpp"

using namespace sliceset;
using namespace sliceset::cli;

namespace {

// "a,b,c" -> three numbers
template <typename T>
std::array<T, 3> triple(const std::string& text, const std::string& flag) {
  std::array<T, 3> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i == 3) throw ConfigError(flag + ": expected three comma-separated values");
    try {
      if constexpr (std::is_integral_v<T>) {
        const long v = std::stol(item);
        if (v <= 0) throw ConfigError(flag + ": values must be positive");
        out[i++] = static_cast<T>(v);
      } else {
        out[i++] = static_cast<T>(std::stod(item));
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ConfigError(flag + ": '" + item + "' is not a number");
    }
  }
  if (i != 3) throw ConfigError(flag + ": expected three comma-separated values");
  return out;
}

void model_flags(CLI::App* cmd, TrainOverrides& o) {
  cmd->add_option("--encoder", o.encoder, "cnn5 | resnet18 | resnet50");
  cmd->add_option("--width", o.width, "Encoder width (0 = standard)");
  cmd->add_option("--input-channels", o.input_channels, "Channels each slice is replicated to");
  cmd->add_option("--aggregator", o.aggregator, "mean | attention");
  cmd->add_option("--axis", o.axis, "sagittal | coronal | axial");
  cmd->add_option("--task", o.task, "regression | classification");
  cmd->add_option("--stem-adapter", o.stem_adapter, "replicate | reinitialize");
  cmd->add_flag("--positional,!--no-positional", o.positional, "Trainable positional table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sliceset: slice-set networks for 3D volumes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sliceset 0.1.0");

  // synth
  SynthOptions synth;
  std::string extents_text = "16,20,16", synth_task = "regression", synth_axis = "sagittal", split_text;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic blob dataset");
  synth_cmd->add_option("--output,-o", synth.output_dir, "Output directory")->capture_default_str();
  synth_cmd->add_option("--count", synth.spec.count, "Number of volumes")->capture_default_str();
  synth_cmd->add_option("--task", synth_task, "regression | classification")->capture_default_str();
  synth_cmd->add_option("--axis", synth_axis, "Axis the regression target follows")->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--extents", extents_text, "Volume extents x,y,z")->capture_default_str();
  synth_cmd->add_option("--blob-radius", synth.spec.blob_radius, "Blob radius in voxels")->capture_default_str();
  synth_cmd->add_option("--amplitude", synth.spec.blob_amplitude, "Blob amplitude")->capture_default_str();
  synth_cmd->add_option("--noise-std", synth.spec.noise_std, "Gaussian noise std")->capture_default_str();
  synth_cmd->add_option("--positive-fraction", synth.spec.positive_fraction, "Classification positives")->capture_default_str();
  synth_cmd->add_option("--target-offset", synth.spec.target_offset, "Regression target offset")->capture_default_str();
  synth_cmd->add_option("--target-slope", synth.spec.target_slope, "Regression target slope")->capture_default_str();
  synth_cmd->add_option("--split", split_text, "Also write split manifests, e.g. 0.8,0.1,0.1");
  synth_cmd->add_option("--split-seed", synth.split_seed, "Split seed")->capture_default_str();
  synth_cmd->add_flag("--gzip", synth.gzip, "Write .nii.gz files");

  // train
  std::string config_path;
  TrainOverrides train_overrides;
  auto* train_cmd = app.add_subcommand("train", "Train slice-set models");
  train_cmd->add_option("--config,-c", config_path, "Run configuration JSON");
  train_cmd->add_option("--manifest", train_overrides.manifest, "Single manifest split by subject");
  train_cmd->add_option("--train-manifest", train_overrides.train, "Training manifest");
  train_cmd->add_option("--validation-manifest", train_overrides.validation, "Validation manifest");
  train_cmd->add_option("--test-manifest", train_overrides.test, "Test manifest");
  train_cmd->add_option("--output,-o", train_overrides.output_dir, "Output directory");
  train_cmd->add_option("--epochs", train_overrides.epochs, "Epochs");
  train_cmd->add_option("--batch-size", train_overrides.batch_size, "Batch size");
  train_cmd->add_option("--seed", train_overrides.seed, "First seed");
  train_cmd->add_option("--seeds", train_overrides.seeds, "Number of seeds to train and aggregate");
  train_cmd->add_option("--lr", train_overrides.learning_rate, "Learning rate");
  train_cmd->add_option("--optimizer", train_overrides.optimizer, "adam | sgd");
  train_cmd->add_option("--loss", train_overrides.loss, "l1 | mse | cross_entropy");
  train_cmd->add_option("--pretrained", train_overrides.pretrained, "Encoder weight archive to start from");
  train_cmd->add_flag("--freeze-batchnorm,!--adapt-batchnorm", train_overrides.freeze_batchnorm,
                      "Keep batch-norm running statistics fixed");
  model_flags(train_cmd, train_overrides);

  // eval
  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints on a manifest");
  eval_cmd->add_option("--checkpoint", eval.checkpoints, "Checkpoint archive (repeat to aggregate)")->required();
  eval_cmd->add_option("--manifest", eval.manifest, "Manifest to evaluate")->required();
  eval_cmd->add_option("--output,-o", eval.output, "Also write the report here");
  eval_cmd->add_flag("--percent", eval.percent, "Scale classification metrics by 100");
  eval_cmd->add_flag("!--no-normalize", eval.normalize, "Skip per-volume z-scoring");

  // export-weights
  ExportOptions exp;
  std::string exp_encoder = "cnn5";
  auto* export_cmd = app.add_subcommand("export-weights", "Write a weight archive");
  export_cmd->add_option("--checkpoint", exp.checkpoint, "Source checkpoint");
  export_cmd->add_flag("--encoder-only", exp.encoder_only, "Keep only encoder.* entries");
  export_cmd->add_flag("--pretrain-2d", exp.pretrain_2d, "Pretrain an encoder on synthetic 2D images");
  export_cmd->add_option("--output,-o", exp.output, "Archive path")->required();
  export_cmd->add_option("--encoder", exp_encoder, "Encoder kind for --pretrain-2d")->capture_default_str();
  export_cmd->add_option("--width", exp.pretrain.encoder.width, "Encoder width")->capture_default_str();
  export_cmd->add_option("--input-channels", exp.pretrain.encoder.input_channels, "Encoder input channels")->capture_default_str();
  export_cmd->add_option("--epochs", exp.pretrain.epochs, "Pretraining epochs")->capture_default_str();
  export_cmd->add_option("--batch-size", exp.pretrain.batch_size, "Pretraining batch size")->capture_default_str();
  export_cmd->add_option("--lr", exp.pretrain.optimizer.learning_rate, "Pretraining learning rate")->capture_default_str();
  export_cmd->add_option("--seed", exp.pretrain.seed, "Pretraining seed")->capture_default_str();
  export_cmd->add_option("--images", exp.images.count, "Number of 2D images")->capture_default_str();
  export_cmd->add_option("--image-size", exp.images.height, "Image height = width")->capture_default_str();
  export_cmd->add_option("--min-radius", exp.images.min_radius, "Smallest disc radius")->capture_default_str();
  export_cmd->add_option("--max-radius", exp.images.max_radius, "Largest disc radius")->capture_default_str();
  export_cmd->add_option("--noise-std", exp.images.noise_std, "Image noise std")->capture_default_str();
  export_cmd->add_option("--image-seed", exp.images.seed, "Image generation seed")->capture_default_str();

  // import-weights
  ImportOptionsCli imp;
  auto* import_cmd = app.add_subcommand("import-weights", "Initialize a model from a pretrained encoder archive");
  import_cmd->add_option("--archive", imp.archive, "Encoder archive")->required();
  import_cmd->add_option("--config,-c", imp.config, "Run configuration providing the model section");
  import_cmd->add_option("--num-slices", imp.num_slices, "Slices per volume (needed with --positional)");
  import_cmd->add_option("--seed", imp.seed, "Initialization seed")->capture_default_str();
  import_cmd->add_option("--output,-o", imp.output, "Model archive to write")->required();
  model_flags(import_cmd, imp.overrides);

  // check
  std::string suite;
  std::uint64_t check_seed = 0;
  auto* check_cmd = app.add_subcommand("check", "Run a verification suite");
  check_cmd->add_option("suite", suite, "gradients | permutation | metrics")->required();
  check_cmd->add_option("--seed", check_seed, "Seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      synth.spec.extents = triple<std::size_t>(extents_text, "--extents");
      synth.spec.task = parse_task(synth_task, "--task");
      synth.spec.axis = parse_axis(synth_axis, "--axis");
      if (!split_text.empty()) synth.split = triple<double>(split_text, "--split");
      return cmd_synth(synth, std::cout);
    }
    if (train_cmd->parsed()) {
      RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      apply_overrides(config, train_overrides);
      return cmd_train(config, std::cout);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval, std::cout);
    if (export_cmd->parsed()) {
      exp.pretrain.encoder.kind = parse_encoder(exp_encoder, "--encoder");
      exp.images.width = exp.images.height;
      exp.images.seed = exp.images.seed ? exp.images.seed : exp.pretrain.seed;
      return cmd_export_weights(exp, std::cout);
    }
    if (import_cmd->parsed()) return cmd_import_weights(imp, std::cout);
    if (check_cmd->parsed()) return cmd_check(suite, check_seed, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
