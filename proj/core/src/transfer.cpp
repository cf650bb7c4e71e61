#include "sliceset/transfer.hpp"

#include <map>
#include <set>
#include <sstream>

#include "sliceset/config_io.hpp"
#include "sliceset/errors.hpp"

namespace sliceset {

namespace {

constexpr std::string_view kEncoderPrefix = "encoder.";

void copy_into(Tensor<float> target, const std::vector<float>& values) {
  auto dst = target.mutable_data();
  std::copy(values.begin(), values.end(), dst.begin());
}

}  // namespace

template <typename T>
WeightArchive export_state(const StateList<T>& state) {
  WeightArchive archive;
  for (const auto& e : state) {
    if (archive.contains(e.name)) throw std::logic_error("duplicate state name " + e.name);
    const auto data = e.tensor.data();
    archive.put(e.name, e.tensor.shape(), std::vector<float>(data.begin(), data.end()));
  }
  return archive;
}

template WeightArchive export_state(const StateList<float>&);
template WeightArchive export_state(const StateList<double>&);

WeightArchive export_model(const Model& model) {
  auto archive = export_state(model.state());
  archive.metadata()["model_config"] = model_config_to_json(model.config());
  return archive;
}

void import_strict(const StateList<float>& state, const WeightArchive& archive) {
  std::set<std::string, std::less<>> names;
  for (const auto& e : state) {
    names.insert(e.name);
    if (!archive.contains(e.name)) throw ArchiveMismatch("archive is missing entry " + e.name);
    const auto& stored = archive.at(e.name);
    if (stored.shape != e.tensor.shape()) {
      throw ArchiveMismatch("entry " + e.name + " has shape " + shape_string(stored.shape) + ", model expects " +
                            shape_string(e.tensor.shape()));
    }
  }
  for (const auto& [name, t] : archive.entries()) {
    if (!names.count(name)) throw ArchiveMismatch("archive has unexpected entry " + name);
  }
  for (const auto& e : state) copy_into(e.tensor, archive.at(e.name).values);
}

void import_strict(Model& model, const WeightArchive& archive) { import_strict(model.state(), archive); }

Model model_from_archive(const WeightArchive& archive) {
  auto it = archive.metadata().find("model_config");
  if (it == archive.metadata().end()) throw ArchiveMismatch("archive has no model_config metadata");
  Model model(model_config_from_json(it->second));
  import_strict(model, archive);
  return model;
}

void load_encoder(Encoder<float>& encoder, const WeightArchive& archive, std::string_view prefix) {
  StateList<float> state;
  encoder.collect(std::string(prefix), state);
  WeightArchive subset;
  for (const auto& [name, t] : archive.entries()) {
    if (name.starts_with(prefix)) subset.put(name, t.shape, t.values);
  }
  import_strict(state, subset);
}

StemAdapter parse_stem_adapter(std::string_view text, std::string_view field) {
  if (text == "replicate") return StemAdapter::replicate;
  if (text == "reinitialize") return StemAdapter::reinitialize;
  throw ConfigError(std::string(field) + ": unknown stem adapter '" + std::string(text) +
                    "' (expected replicate or reinitialize)");
}

std::string LoadReport::to_text() const {
  std::ostringstream os;
  std::size_t encoder_matched = 0;
  for (const auto& m : matched) encoder_matched += m.starts_with(kEncoderPrefix) ? 1 : 0;
  os << "load report: matched " << encoder_matched << "/" << encoder_entries << " encoder entries, skipped "
     << skipped.size() << " archive entries, reinitialized " << reinitialized.size() << " model entries\n";
  for (const auto& m : matched) os << "  matched       " << m << "\n";
  for (const auto& a : adapted) os << "  adapted       " << a << "\n";
  for (const auto& s : skipped) os << "  skipped       " << s.name << " (" << s.reason << ")\n";
  for (const auto& r : reinitialized) os << "  reinitialized " << r << "\n";
  return os.str();
}

LoadReport import_encoder(Model& model, const WeightArchive& archive, const ImportOptions& options) {
  const auto state = model.state();
  std::map<std::string, const StateEntry<float>*, std::less<>> encoder_entries;
  std::string stem_name;
  for (const auto& e : state) {
    if (!e.name.starts_with(kEncoderPrefix)) continue;
    encoder_entries[e.name] = &e;
    if (stem_name.empty() && e.tensor.dim() == 4) stem_name = e.name;
  }

  LoadReport report;
  report.encoder_entries = encoder_entries.size();
  std::map<std::string, std::vector<float>> staged;

  for (const auto& [archive_name, stored] : archive.entries()) {
    std::string name = archive_name;
    if (!name.starts_with(kEncoderPrefix) && encoder_entries.count(std::string(kEncoderPrefix) + name)) {
      name = std::string(kEncoderPrefix) + name;
    }
    auto it = encoder_entries.find(name);
    if (it == encoder_entries.end()) {
      report.skipped.push_back({archive_name, "not an encoder entry of this model"});
      continue;
    }
    if (staged.count(name)) {
      report.skipped.push_back({archive_name, "duplicate of an entry already matched as " + name});
      continue;
    }
    const Shape& want = it->second->tensor.shape();
    if (stored.shape == want) {
      staged[name] = stored.values;
      continue;
    }
    const bool stem_channel_mismatch = name == stem_name && stored.shape.size() == 4 && want[1] == 1 &&
                                       stored.shape[1] > 1 && stored.shape[0] == want[0] &&
                                       stored.shape[2] == want[2] && stored.shape[3] == want[3];
    if (stem_channel_mismatch && options.stem_adapter == StemAdapter::replicate) {
      const std::size_t filters = want[0], channels = stored.shape[1], taps = want[2] * want[3];
      std::vector<float> folded(filters * taps, 0.0f);
      for (std::size_t f = 0; f < filters; ++f) {
        for (std::size_t t = 0; t < taps; ++t) {
          double s = 0.0;
          for (std::size_t c = 0; c < channels; ++c) s += stored.values[(f * channels + c) * taps + t];
          folded[f * taps + t] = static_cast<float>(s);
        }
      }
      staged[name] = std::move(folded);
      report.adapted.push_back(name + ": " + std::to_string(channels) + "-channel stem summed over input channels");
      continue;
    }
    report.skipped.push_back({archive_name, "shape " + shape_string(stored.shape) + " does not fit " +
                                                shape_string(want) +
                                                (stem_channel_mismatch ? "; stem left at its initial values" : "")});
  }

  std::size_t encoder_matched = 0;
  for (const auto& e : state) {
    if (staged.count(e.name)) {
      report.matched.push_back(e.name);
      ++encoder_matched;
    } else {
      report.reinitialized.push_back(e.name);
    }
  }
  const double fraction = encoder_entries.empty() ? 0.0
                                                  : static_cast<double>(encoder_matched) /
                                                        static_cast<double>(encoder_entries.size());
  if (fraction < options.min_match_fraction) {
    throw ArchiveMismatch("archive matches only " + std::to_string(encoder_matched) + " of " +
                          std::to_string(encoder_entries.size()) + " encoder entries of a " +
                          std::string(encoder_name(model.config().encoder.kind)) + " encoder");
  }
  for (const auto& [name, values] : staged) copy_into(encoder_entries.at(name)->tensor, values);
  return report;
}

}  // namespace sliceset
