#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sliceset/archive.hpp"
#include "sliceset/losses.hpp"
#include "sliceset/metrics.hpp"
#include "sliceset/model.hpp"
#include "sliceset/optim.hpp"

namespace sliceset {

enum class SelectionMetric { mae, balanced_accuracy };

std::string_view selection_metric_name(SelectionMetric metric);
SelectionMetric parse_selection_metric(std::string_view text, std::string_view field = "train.selection_metric");

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 8;
  LossKind loss = LossKind::mse;
  SelectionMetric selection_metric = SelectionMetric::mae;
  std::uint64_t seed = 0;
  // Regression only: set the head's target shift/scale to the mean and
  // standard deviation of the training targets before the first epoch.
  bool standardize_targets = true;
  // Normalize with (and never update) the batch-norm running statistics.
  bool freeze_batchnorm = false;
};

// Loss and selection metric defaults for a task (mse/mae or
// cross_entropy/balanced_accuracy).
TrainConfig default_train_config(Task task);

// Checks ranges and that loss and selection metric fit the task.
void validate(const TrainConfig& config, Task task);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_metric = 0.0;
  double wall_ms = 0.0;
};

// One JSON-lines record: {"epoch", "train_loss", "val_metric", "wall_ms"}.
std::string to_jsonl(const EpochRecord& record);

struct Checkpoint {
  std::size_t epoch = 0;
  double val_metric = 0.0;
  WeightArchive weights;  // export_model plus "epoch" / "val_metric" / "selection_metric" metadata
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> log;
};

// True when `candidate` is strictly better than `incumbent`.
bool improves(double candidate, double incumbent, SelectionMetric metric);

// 1-based index of the best value (min for mae, max for balanced accuracy);
// ties go to the earliest epoch.
std::size_t select_best(std::span<const double> metric_per_epoch, SelectionMetric metric);

double selection_value(const EvalReport& report, SelectionMetric metric);

struct Predictions {
  Task task = Task::regression;
  std::vector<double> values;  // regression outputs
  std::vector<int> labels;     // classification argmax
  std::vector<double> scores;  // positive-class softmax probability
  std::vector<double> targets;
};

// Eval-mode forward of every volume without gradient tracking. Volumes are
// processed independently and in parallel; results do not depend on the
// worker count.
Predictions predict(Model& model, std::span<const Volume> volumes);
EvalReport evaluate(Model& model, std::span<const Volume> volumes);
EvalReport report_from(const Predictions& predictions);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains for exactly `epochs` epochs from the model's current weights
/// (initialize or import first). Each epoch shuffles the training set with
/// the configured seed, steps the optimizer once per batch, then evaluates
/// the validation set. The best epoch by the selection metric is kept as a
/// checkpoint and its weights are loaded back into the model at the end.
/// A non-finite batch loss raises TrainingDiverged naming epoch and batch.
TrainResult train(Model& model, std::span<const Volume> train_set, std::span<const Volume> validation_set,
                  const TrainConfig& config, const OptimizerConfig& optimizer, const EpochCallback& on_epoch = {});

}  // namespace sliceset
