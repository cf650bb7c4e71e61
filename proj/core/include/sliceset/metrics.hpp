#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sliceset/volume.hpp"

namespace sliceset::metrics {

// Regression errors. Inputs must be non-empty and of equal length.
double mae(std::span<const double> prediction, std::span<const double> target);
double rmse(std::span<const double> prediction, std::span<const double> target);

// (sensitivity + specificity) / 2. Labels must be 0/1 and the truth must
// contain both classes.
double balanced_accuracy(std::span<const int> predicted, std::span<const int> truth);

// Harmonic mean of precision and recall; 0 when there are no predicted or
// no true positives.
double f1_score(std::span<const int> predicted, std::span<const int> truth);

// Step-interpolated average precision: walk the scores in descending order
// (ties keep input order) and average the precision at each positive.
// Requires at least one positive.
double average_precision(std::span<const double> scores, std::span<const int> truth);

}  // namespace sliceset::metrics

namespace sliceset {

struct EvalReport {
  Task task = Task::regression;
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double balanced_accuracy = 0.0;
  double f1 = 0.0;
  double average_precision = 0.0;
};

EvalReport regression_report(std::span<const double> prediction, std::span<const double> target);
EvalReport classification_report(std::span<const int> predicted, std::span<const double> positive_scores,
                                 std::span<const int> truth);

// Names of the metrics that apply to a task, in report order.
std::vector<std::string> metric_names(Task task);
double metric_value(const EvalReport& report, const std::string& name);

// JSON object; classification metrics are multiplied by 100 when `percent`.
std::string to_json(const EvalReport& report, bool percent = false);

/// Mean and sample standard deviation of each metric over several runs.
struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> values;
};

struct AggregateReport {
  Task task = Task::regression;
  std::size_t runs = 0;
  std::vector<MetricSummary> metrics;
};

AggregateReport aggregate(std::span<const EvalReport> reports);
std::string to_json(const AggregateReport& report, bool percent = false);

}  // namespace sliceset
