#include "sliceset/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "sliceset/errors.hpp"
#include "sliceset/parallel.hpp"
#include "sliceset/transfer.hpp"

namespace sliceset {

std::string_view selection_metric_name(SelectionMetric metric) {
  return metric == SelectionMetric::mae ? "mae" : "balanced_accuracy";
}

SelectionMetric parse_selection_metric(std::string_view text, std::string_view field) {
  if (text == "mae") return SelectionMetric::mae;
  if (text == "balanced_accuracy") return SelectionMetric::balanced_accuracy;
  throw ConfigError(std::string(field) + ": unknown selection metric '" + std::string(text) +
                    "' (expected mae or balanced_accuracy)");
}

TrainConfig default_train_config(Task task) {
  TrainConfig config;
  if (task == Task::classification) {
    config.loss = LossKind::cross_entropy;
    config.selection_metric = SelectionMetric::balanced_accuracy;
  }
  return config;
}

void validate(const TrainConfig& config, Task task) {
  if (config.epochs < 1) throw ConfigError("train.epochs: must be at least 1");
  if (config.batch_size < 1) throw ConfigError("train.batch_size: must be at least 1");
  if (task == Task::regression) {
    if (config.loss == LossKind::cross_entropy) throw ConfigError("train.loss: cross_entropy needs a classification task");
    if (config.selection_metric != SelectionMetric::mae) {
      throw ConfigError("train.selection_metric: regression models are selected by mae");
    }
  } else {
    if (config.loss != LossKind::cross_entropy) {
      throw ConfigError("train.loss: classification uses cross_entropy");
    }
    if (config.selection_metric != SelectionMetric::balanced_accuracy) {
      throw ConfigError("train.selection_metric: classification models are selected by balanced_accuracy");
    }
  }
}

std::string to_jsonl(const EpochRecord& record) {
  nlohmann::ordered_json doc;
  doc["epoch"] = record.epoch;
  doc["train_loss"] = record.train_loss;
  doc["val_metric"] = record.val_metric;
  doc["wall_ms"] = record.wall_ms;
  return doc.dump();
}

bool improves(double candidate, double incumbent, SelectionMetric metric) {
  return metric == SelectionMetric::mae ? candidate < incumbent : candidate > incumbent;
}

std::size_t select_best(std::span<const double> metric_per_epoch, SelectionMetric metric) {
  if (metric_per_epoch.empty()) throw std::invalid_argument("select_best: no epochs");
  std::size_t best = 0;
  for (std::size_t i = 1; i < metric_per_epoch.size(); ++i) {
    if (improves(metric_per_epoch[i], metric_per_epoch[best], metric)) best = i;
  }
  return best + 1;
}

double selection_value(const EvalReport& report, SelectionMetric metric) {
  return metric == SelectionMetric::mae ? report.mae : report.balanced_accuracy;
}

Predictions predict(Model& model, std::span<const Volume> volumes) {
  const Task task = model.config().task;
  Predictions out;
  out.task = task;
  const std::size_t n = volumes.size();
  out.targets.resize(n);
  if (task == Task::regression) {
    out.values.resize(n);
  } else {
    out.labels.resize(n);
    out.scores.resize(n);
  }
  parallel_for(n, [&](std::size_t i) {
    NoGradGuard guard;
    const auto result = model.forward(volumes[i], Mode::eval);
    const auto y = result.data();
    out.targets[i] = volumes[i].target;
    if (task == Task::regression) {
      out.values[i] = static_cast<double>(y[0]);
    } else {
      const double a = y[0], b = y[1];
      out.labels[i] = b > a ? 1 : 0;
      const double hi = std::max(a, b);
      out.scores[i] = std::exp(b - hi) / (std::exp(a - hi) + std::exp(b - hi));
    }
  });
  return out;
}

EvalReport report_from(const Predictions& p) {
  if (p.task == Task::regression) return regression_report(p.values, p.targets);
  std::vector<int> truth(p.targets.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(std::lround(p.targets[i]));
  return classification_report(p.labels, p.scores, truth);
}

EvalReport evaluate(Model& model, std::span<const Volume> volumes) { return report_from(predict(model, volumes)); }

TrainResult train(Model& model, std::span<const Volume> train_set, std::span<const Volume> validation_set,
                  const TrainConfig& config, const OptimizerConfig& optimizer_config, const EpochCallback& on_epoch) {
  const Task task = model.config().task;
  validate(config, task);
  validate(optimizer_config);
  if (train_set.empty()) throw ConfigError("train: training split is empty");
  if (validation_set.empty()) throw ConfigError("train: validation split is empty");

  std::vector<SliceStack> stacks;
  stacks.reserve(train_set.size());
  for (const auto& v : train_set) stacks.push_back(model.slice(v));

  if (task == Task::regression && config.standardize_targets) {
    double mean = 0.0;
    for (const auto& v : train_set) mean += v.target;
    mean /= static_cast<double>(train_set.size());
    double var = 0.0;
    for (const auto& v : train_set) var += (v.target - mean) * (v.target - mean);
    const double sd = std::sqrt(var / static_cast<double>(train_set.size()));
    model.set_target_scaling(mean, sd > 0.0 ? sd : 1.0);
  }

  model.encoder().set_batchnorm_frozen(config.freeze_batchnorm);
  Optimizer<float> optimizer(model.parameters(), optimizer_config);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.log.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<const SliceStack*> batch;
      std::vector<double> targets;
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(&stacks[order[i]]);
        targets.push_back(train_set[order[i]].target);
      }
      optimizer.zero_grad();
      const auto prediction = model.forward(batch_tensor<float>(batch), batch.size(), Mode::train);
      const auto batch_loss = loss(prediction, std::span<const double>(targets), config.loss);
      const double value = static_cast<double>(batch_loss.item());
      if (!std::isfinite(value)) {
        throw TrainingDiverged("non-finite training loss (" + std::to_string(value) + ") at epoch " +
                               std::to_string(epoch) + ", batch " + std::to_string(batch_index + 1));
      }
      backward(batch_loss);
      optimizer.step();
      loss_sum += value * static_cast<double>(batch.size());
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.val_metric = selection_value(evaluate(model, validation_set), config.selection_metric);
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (epoch == 1 || improves(record.val_metric, result.best.val_metric, config.selection_metric)) {
      result.best.epoch = epoch;
      result.best.val_metric = record.val_metric;
      result.best.weights = export_model(model);
    }
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  model.encoder().set_batchnorm_frozen(false);

  auto& meta = result.best.weights.metadata();
  meta["epoch"] = std::to_string(result.best.epoch);
  meta["selection_metric"] = std::string(selection_metric_name(config.selection_metric));
  nlohmann::json metric_value = result.best.val_metric;
  meta["val_metric"] = metric_value.dump();
  import_strict(model, result.best.weights);
  return result;
}

}  // namespace sliceset
