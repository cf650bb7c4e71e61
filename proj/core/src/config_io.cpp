#include "sliceset/config_io.hpp"

#include <set>

#include <json.hpp>

#include "sliceset/errors.hpp"

namespace sliceset {

namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!known.count(key)) throw ConfigError(where + key + ": unknown key");
  }
}

template <typename V>
V get_field(const json& object, const char* key, const std::string& where, V fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<V>();
  } catch (const json::exception&) {
    throw ConfigError(where + key + ": wrong type");
  }
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) {
  json doc;
  doc["encoder"] = {{"kind", std::string(encoder_name(config.encoder.kind))},
                    {"input_channels", config.encoder.input_channels},
                    {"width", config.encoder.width}};
  doc["aggregator"] = {{"kind", std::string(aggregator_name(config.aggregator.kind))},
                       {"model_dim", config.aggregator.model_dim},
                       {"ff_hidden_dim", config.aggregator.ff_hidden_dim}};
  doc["positional"] = config.positional;
  doc["num_slices"] = config.num_slices;
  doc["axis"] = std::string(axis_name(config.axis));
  doc["task"] = std::string(task_name(config.task));
  return doc.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("model config: expected an object");
  reject_unknown(doc, {"encoder", "aggregator", "positional", "num_slices", "axis", "task"}, "");
  ModelConfig config;
  if (doc.contains("encoder")) {
    const auto& e = doc["encoder"];
    reject_unknown(e, {"kind", "input_channels", "width"}, "encoder.");
    config.encoder.kind = parse_encoder(get_field<std::string>(e, "kind", "encoder.", "cnn5"), "encoder.kind");
    config.encoder.input_channels = get_field<std::size_t>(e, "input_channels", "encoder.", 1);
    config.encoder.width = get_field<std::size_t>(e, "width", "encoder.", 0);
  }
  if (doc.contains("aggregator")) {
    const auto& a = doc["aggregator"];
    reject_unknown(a, {"kind", "model_dim", "ff_hidden_dim"}, "aggregator.");
    config.aggregator.kind = parse_aggregator(get_field<std::string>(a, "kind", "aggregator.", "mean"), "aggregator.kind");
    config.aggregator.model_dim = get_field<std::size_t>(a, "model_dim", "aggregator.", 0);
    config.aggregator.ff_hidden_dim = get_field<std::size_t>(a, "ff_hidden_dim", "aggregator.", 0);
  }
  config.positional = get_field<bool>(doc, "positional", "", false);
  config.num_slices = get_field<std::size_t>(doc, "num_slices", "", 0);
  config.axis = parse_axis(get_field<std::string>(doc, "axis", "", "sagittal"), "axis");
  config.task = parse_task(get_field<std::string>(doc, "task", "", "regression"), "task");
  validate(config);
  return config;
}

}  // namespace sliceset
