#include "sliceset/cli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sliceset/errors.hpp"

namespace sliceset::cli {

namespace {

using nlohmann::json;

void check_keys(const json& object, const std::string& where, const std::set<std::string>& known) {
  if (!object.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : object.items()) {
    if (!known.count(key)) throw ConfigError((where.empty() ? "" : where + ".") + key + ": unknown key");
  }
}

std::string field_name(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

template <typename F>
void with(const json& object, const std::string& where, const char* key, F&& apply) {
  if (!object.contains(key)) return;
  try {
    apply(object.at(key), field_name(where, key));
  } catch (const json::exception& e) {
    throw ConfigError(field_name(where, key) + ": " + e.what());
  }
}

std::size_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) throw ConfigError(field + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field + ": expected a string");
  return v.get<std::string>();
}

std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(doc, "", {"model", "train", "optimizer", "data", "output_dir", "pretrained", "stem_adapter", "seeds"});
  RunConfig c;

  with(doc, "", "model", [&](const json& m, const std::string& w) {
    check_keys(m, w, {"encoder", "aggregator", "positional", "axis", "task"});
    with(m, w, "encoder", [&](const json& e, const std::string& we) {
      check_keys(e, we, {"kind", "input_channels", "width"});
      with(e, we, "kind", [&](const json& v, const std::string& f) { c.model.encoder.kind = parse_encoder(as_string(v, f), f); });
      with(e, we, "input_channels", [&](const json& v, const std::string& f) { c.model.encoder.input_channels = as_count(v, f); });
      with(e, we, "width", [&](const json& v, const std::string& f) { c.model.encoder.width = as_count(v, f); });
    });
    with(m, w, "aggregator", [&](const json& a, const std::string& wa) {
      check_keys(a, wa, {"kind", "model_dim", "ff_hidden_dim"});
      with(a, wa, "kind", [&](const json& v, const std::string& f) { c.model.aggregator.kind = parse_aggregator(as_string(v, f), f); });
      with(a, wa, "model_dim", [&](const json& v, const std::string& f) { c.model.aggregator.model_dim = as_count(v, f); });
      with(a, wa, "ff_hidden_dim", [&](const json& v, const std::string& f) { c.model.aggregator.ff_hidden_dim = as_count(v, f); });
    });
    with(m, w, "positional", [&](const json& v, const std::string& f) { c.model.positional = as_bool(v, f); });
    with(m, w, "axis", [&](const json& v, const std::string& f) { c.model.axis = parse_axis(as_string(v, f), f); });
    with(m, w, "task", [&](const json& v, const std::string& f) { c.model.task = parse_task(as_string(v, f), f); });
  });

  with(doc, "", "train", [&](const json& t, const std::string& w) {
    check_keys(t, w, {"epochs", "batch_size", "loss", "selection_metric", "seed", "standardize_targets", "freeze_batchnorm"});
    with(t, w, "epochs", [&](const json& v, const std::string& f) { c.train.epochs = as_count(v, f); });
    with(t, w, "batch_size", [&](const json& v, const std::string& f) { c.train.batch_size = as_count(v, f); });
    with(t, w, "loss", [&](const json& v, const std::string& f) { c.loss = parse_loss(as_string(v, f), f); });
    with(t, w, "selection_metric", [&](const json& v, const std::string& f) {
      c.selection_metric = parse_selection_metric(as_string(v, f), f);
    });
    with(t, w, "seed", [&](const json& v, const std::string& f) { c.train.seed = as_count(v, f); });
    with(t, w, "standardize_targets", [&](const json& v, const std::string& f) { c.train.standardize_targets = as_bool(v, f); });
    with(t, w, "freeze_batchnorm", [&](const json& v, const std::string& f) { c.train.freeze_batchnorm = as_bool(v, f); });
  });

  with(doc, "", "optimizer", [&](const json& o, const std::string& w) {
    check_keys(o, w, {"kind", "learning_rate", "beta1", "beta2", "epsilon", "momentum"});
    with(o, w, "kind", [&](const json& v, const std::string& f) { c.optimizer.kind = parse_optimizer(as_string(v, f), f); });
    with(o, w, "learning_rate", [&](const json& v, const std::string& f) { c.optimizer.learning_rate = as_number(v, f); });
    with(o, w, "beta1", [&](const json& v, const std::string& f) { c.optimizer.beta1 = as_number(v, f); });
    with(o, w, "beta2", [&](const json& v, const std::string& f) { c.optimizer.beta2 = as_number(v, f); });
    with(o, w, "epsilon", [&](const json& v, const std::string& f) { c.optimizer.epsilon = as_number(v, f); });
    with(o, w, "momentum", [&](const json& v, const std::string& f) { c.optimizer.momentum = as_number(v, f); });
  });

  with(doc, "", "data", [&](const json& d, const std::string& w) {
    check_keys(d, w, {"train", "validation", "test", "manifest", "split", "split_seed", "normalize"});
    with(d, w, "train", [&](const json& v, const std::string& f) { c.data.train = resolve_path(as_string(v, f), base); });
    with(d, w, "validation", [&](const json& v, const std::string& f) { c.data.validation = resolve_path(as_string(v, f), base); });
    with(d, w, "test", [&](const json& v, const std::string& f) { c.data.test = resolve_path(as_string(v, f), base); });
    with(d, w, "manifest", [&](const json& v, const std::string& f) { c.data.manifest = resolve_path(as_string(v, f), base); });
    with(d, w, "split", [&](const json& v, const std::string& f) {
      if (!v.is_array() || v.size() != 3) throw ConfigError(f + ": expected three fractions");
      for (std::size_t i = 0; i < 3; ++i) c.data.split[i] = as_number(v[i], f);
    });
    with(d, w, "split_seed", [&](const json& v, const std::string& f) { c.data.split_seed = as_count(v, f); });
    with(d, w, "normalize", [&](const json& v, const std::string& f) { c.data.normalize = as_bool(v, f); });
  });

  with(doc, "", "output_dir", [&](const json& v, const std::string& f) { c.output_dir = resolve_path(as_string(v, f), base); });
  with(doc, "", "pretrained", [&](const json& v, const std::string& f) {
    c.pretrained = v.is_null() ? std::string() : resolve_path(as_string(v, f), base);
  });
  with(doc, "", "stem_adapter", [&](const json& v, const std::string& f) { c.stem_adapter = parse_stem_adapter(as_string(v, f), f); });
  with(doc, "", "seeds", [&](const json& v, const std::string& f) { c.seeds = as_count(v, f); });
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.parent_path());
}

void resolve(RunConfig& config) {
  const TrainConfig defaults = default_train_config(config.model.task);
  config.train.loss = config.loss.value_or(defaults.loss);
  config.train.selection_metric = config.selection_metric.value_or(defaults.selection_metric);
  config.loss = config.train.loss;
  config.selection_metric = config.train.selection_metric;
  validate(config.train, config.model.task);
  validate(config.optimizer);
  if (config.model.encoder.input_channels == 0) throw ConfigError("model.encoder.input_channels: must be positive");
  if (config.seeds < 1) throw ConfigError("seeds: must be at least 1");
  if (config.output_dir.empty()) throw ConfigError("output_dir: required");
  const auto& d = config.data;
  const bool split_files = !d.train.empty() || !d.validation.empty() || !d.test.empty();
  if (split_files && !d.manifest.empty()) throw ConfigError("data: give either train/validation/test or manifest, not both");
  if (split_files && (d.train.empty() || d.validation.empty() || d.test.empty())) {
    throw ConfigError("data: train, validation and test manifests are all required");
  }
  if (!split_files && d.manifest.empty()) throw ConfigError("data: no manifest given");
  double total = 0.0;
  for (double f : d.split) {
    if (!(f > 0.0)) throw ConfigError("data.split: fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("data.split: fractions must sum to 1");
}

std::string to_json(const RunConfig& c) {
  nlohmann::ordered_json doc;
  doc["model"] = {
      {"encoder",
       {{"kind", std::string(encoder_name(c.model.encoder.kind))},
        {"input_channels", c.model.encoder.input_channels},
        {"width", resolved_width(c.model.encoder)}}},
      {"aggregator",
       {{"kind", std::string(aggregator_name(c.model.aggregator.kind))},
        {"model_dim", c.model.aggregator.model_dim},
        {"ff_hidden_dim", c.model.aggregator.ff_hidden_dim}}},
      {"positional", c.model.positional},
      {"axis", std::string(axis_name(c.model.axis))},
      {"task", std::string(task_name(c.model.task))}};
  doc["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"loss", std::string(loss_name(c.train.loss))},
                  {"selection_metric", std::string(selection_metric_name(c.train.selection_metric))},
                  {"seed", c.train.seed},
                  {"standardize_targets", c.train.standardize_targets},
                  {"freeze_batchnorm", c.train.freeze_batchnorm}};
  doc["optimizer"] = {{"kind", std::string(optimizer_name(c.optimizer.kind))},
                      {"learning_rate", c.optimizer.learning_rate},
                      {"beta1", c.optimizer.beta1},
                      {"beta2", c.optimizer.beta2},
                      {"epsilon", c.optimizer.epsilon},
                      {"momentum", c.optimizer.momentum}};
  nlohmann::ordered_json data;
  if (!c.data.manifest.empty()) {
    data["manifest"] = c.data.manifest;
    data["split"] = c.data.split;
    data["split_seed"] = c.data.split_seed;
  } else {
    data["train"] = c.data.train;
    data["validation"] = c.data.validation;
    data["test"] = c.data.test;
  }
  data["normalize"] = c.data.normalize;
  doc["data"] = data;
  doc["output_dir"] = c.output_dir;
  doc["pretrained"] = c.pretrained.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(c.pretrained);
  doc["stem_adapter"] = c.stem_adapter == StemAdapter::replicate ? "replicate" : "reinitialize";
  doc["seeds"] = c.seeds;
  return doc.dump(2);
}

}  // namespace sliceset::cli
