#include "sliceset/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "sliceset/errors.hpp"

namespace sliceset::metrics {

namespace {

template <typename A, typename B>
void require_lengths(const char* name, std::span<A> a, std::span<B> b) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(name) + ": length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.empty()) throw ShapeError(std::string(name) + ": empty input");
}

void require_binary(const char* name, std::span<const int> labels) {
  for (int v : labels) {
    if (v != 0 && v != 1) throw std::invalid_argument(std::string(name) + ": labels must be 0 or 1");
  }
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      (predicted[i] == 1 ? c.tp : c.fn)++;
    } else {
      (predicted[i] == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

}  // namespace

double mae(std::span<const double> prediction, std::span<const double> target) {
  require_lengths("mae", prediction, target);
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) s += std::abs(prediction[i] - target[i]);
  return s / static_cast<double>(prediction.size());
}

double rmse(std::span<const double> prediction, std::span<const double> target) {
  require_lengths("rmse", prediction, target);
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) s += (prediction[i] - target[i]) * (prediction[i] - target[i]);
  return std::sqrt(s / static_cast<double>(prediction.size()));
}

double balanced_accuracy(std::span<const int> predicted, std::span<const int> truth) {
  require_lengths("balanced_accuracy", predicted, truth);
  require_binary("balanced_accuracy", predicted);
  require_binary("balanced_accuracy", truth);
  const auto c = confusion(predicted, truth);
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
    throw std::invalid_argument("balanced_accuracy: truth contains a single class (" +
                                std::to_string(c.tp + c.fn) + " positives, " + std::to_string(c.tn + c.fp) +
                                " negatives)");
  }
  const double sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return (sensitivity + specificity) / 2.0;
}

double f1_score(std::span<const int> predicted, std::span<const int> truth) {
  require_lengths("f1_score", predicted, truth);
  require_binary("f1_score", predicted);
  require_binary("f1_score", truth);
  const auto c = confusion(predicted, truth);
  if (c.tp == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return 2.0 * precision * recall / (precision + recall);
}

double average_precision(std::span<const double> scores, std::span<const int> truth) {
  require_lengths("average_precision", scores, truth);
  require_binary("average_precision", truth);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives = 0, seen = 0;
  double total = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (truth[order[rank]] == 1) {
      ++seen;
      total += static_cast<double>(seen) / static_cast<double>(rank + 1);
    }
  }
  positives = seen;
  if (positives == 0) throw std::invalid_argument("average_precision: truth has no positives");
  return total / static_cast<double>(positives);
}

}  // namespace sliceset::metrics

namespace sliceset {

EvalReport regression_report(std::span<const double> prediction, std::span<const double> target) {
  EvalReport r;
  r.task = Task::regression;
  r.n = prediction.size();
  r.mae = metrics::mae(prediction, target);
  r.rmse = metrics::rmse(prediction, target);
  return r;
}

EvalReport classification_report(std::span<const int> predicted, std::span<const double> positive_scores,
                                 std::span<const int> truth) {
  EvalReport r;
  r.task = Task::classification;
  r.n = truth.size();
  r.balanced_accuracy = metrics::balanced_accuracy(predicted, truth);
  r.f1 = metrics::f1_score(predicted, truth);
  r.average_precision = metrics::average_precision(positive_scores, truth);
  return r;
}

std::vector<std::string> metric_names(Task task) {
  if (task == Task::regression) return {"mae", "rmse"};
  return {"balanced_accuracy", "f1", "average_precision"};
}

double metric_value(const EvalReport& report, const std::string& name) {
  if (name == "mae") return report.mae;
  if (name == "rmse") return report.rmse;
  if (name == "balanced_accuracy") return report.balanced_accuracy;
  if (name == "f1") return report.f1;
  if (name == "average_precision") return report.average_precision;
  throw std::invalid_argument("unknown metric " + name);
}

namespace {
double presentation_scale(Task task, bool percent) { return task == Task::classification && percent ? 100.0 : 1.0; }
}  // namespace

std::string to_json(const EvalReport& report, bool percent) {
  nlohmann::ordered_json doc;
  doc["task"] = std::string(task_name(report.task));
  doc["n"] = report.n;
  const double k = presentation_scale(report.task, percent);
  for (const auto& name : metric_names(report.task)) doc[name] = metric_value(report, name) * k;
  return doc.dump(2);
}

AggregateReport aggregate(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  AggregateReport out;
  out.task = reports.front().task;
  out.runs = reports.size();
  for (const auto& r : reports) {
    if (r.task != out.task) throw std::invalid_argument("aggregate: mixed task kinds");
  }
  for (const auto& name : metric_names(out.task)) {
    MetricSummary s;
    s.name = name;
    for (const auto& r : reports) s.values.push_back(metric_value(r, name));
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / static_cast<double>(s.values.size());
    if (s.values.size() > 1) {
      double var = 0.0;
      for (double v : s.values) var += (v - s.mean) * (v - s.mean);
      s.stddev = std::sqrt(var / static_cast<double>(s.values.size() - 1));
    }
    out.metrics.push_back(std::move(s));
  }
  return out;
}

std::string to_json(const AggregateReport& report, bool percent) {
  nlohmann::ordered_json doc;
  doc["task"] = std::string(task_name(report.task));
  doc["runs"] = report.runs;
  const double k = presentation_scale(report.task, percent);
  for (const auto& m : report.metrics) {
    nlohmann::ordered_json entry;
    entry["mean"] = m.mean * k;
    entry["std"] = m.stddev * k;
    auto values = nlohmann::json::array();
    for (double v : m.values) values.push_back(v * k);
    entry["values"] = values;
    doc[m.name] = entry;
  }
  return doc.dump(2);
}

}  // namespace sliceset
