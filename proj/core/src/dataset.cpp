#include "sliceset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "sliceset/errors.hpp"
#include "sliceset/nifti.hpp"
#include "sliceset/parallel.hpp"

namespace sliceset {

std::size_t worker_count() {
  if (const char* env = std::getenv("SLICESET_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value >= 1) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Splits make_splits(std::span<const Volume> volumes, std::array<double, 3> fractions, std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("fractions: must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ConfigError("fractions: must sum to 1");

  std::vector<std::string> subjects;
  std::unordered_map<std::string, std::size_t> subject_index;
  for (const auto& v : volumes) {
    if (subject_index.emplace(v.subject_id, subjects.size()).second) subjects.push_back(v.subject_id);
  }
  std::vector<std::size_t> order(subjects.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<double>(subjects.size());
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto n_val = std::min(subjects.size() - std::min(n_train, subjects.size()),
                              static_cast<std::size_t>(std::llround(fractions[1] * n)));
  std::vector<int> assignment(subjects.size(), 2);
  for (std::size_t r = 0; r < order.size(); ++r) {
    assignment[order[r]] = r < n_train ? 0 : (r < n_train + n_val ? 1 : 2);
  }

  Splits splits{{"train", {}, seed}, {"validation", {}, seed}, {"test", {}, seed}};
  DatasetSplit* targets[3] = {&splits.train, &splits.validation, &splits.test};
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    targets[assignment[subject_index.at(volumes[i].subject_id)]]->records.push_back(i);
  }
  for (auto* split : targets) {
    if (split->records.empty()) {
      throw ConfigError("fractions: split '" + split->name + "' would be empty with " +
                        std::to_string(subjects.size()) + " subjects");
    }
  }
  return splits;
}

std::vector<Volume> gather(std::span<const Volume> volumes, const DatasetSplit& split) {
  std::vector<Volume> out;
  out.reserve(split.records.size());
  for (auto i : split.records) out.push_back(volumes[i]);
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw FormatError("manifest " + path.string() + " must be a JSON array");
  std::vector<ManifestEntry> out;
  for (const auto& row : doc) {
    if (!row.is_object() || !row.contains("path") || !row.contains("subject_id") || !row.contains("target")) {
      throw FormatError("manifest " + path.string() + ": every row needs path, subject_id and target");
    }
    out.push_back({row.at("path").get<std::string>(), row.at("subject_id").get<std::string>(),
                   row.at("target").get<double>()});
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& e : entries) doc.push_back({{"path", e.path}, {"subject_id", e.subject_id}, {"target", e.target}});
  std::ofstream out(path);
  if (!out) throw FormatError("cannot create manifest " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<Volume> load_manifest_volumes(const std::filesystem::path& manifest, bool normalize_intensity) {
  const auto entries = read_manifest(manifest);
  const auto base = manifest.parent_path();
  std::vector<Volume> out(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    std::filesystem::path p = entries[i].path;
    if (p.is_relative()) p = base / p;
    Volume v = load_nifti(p);
    if (normalize_intensity) v = normalize(v);
    v.subject_id = entries[i].subject_id;
    v.target = entries[i].target;
    out[i] = std::move(v);
  });
  return out;
}

}  // namespace sliceset
