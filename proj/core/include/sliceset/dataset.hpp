#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sliceset/volume.hpp"

namespace sliceset {

struct DatasetSplit {
  std::string name;                  // train | validation | test
  std::vector<std::size_t> records;  // indices into the source volume list
  std::uint64_t seed = 0;
};

struct Splits {
  DatasetSplit train;
  DatasetSplit validation;
  DatasetSplit test;
};

/// Subject-level split: every scan of a subject lands in the same split.
/// Subjects (in first-appearance order) are shuffled with `seed`, then the
/// first round(f_train * S) go to train, the next round(f_val * S) to
/// validation, the remainder to test. Records keep their input order.
Splits make_splits(std::span<const Volume> volumes, std::array<double, 3> fractions, std::uint64_t seed);

std::vector<Volume> gather(std::span<const Volume> volumes, const DatasetSplit& split);

// One manifest row: a JSON object {path, subject_id, target}.
struct ManifestEntry {
  std::string path;
  std::string subject_id;
  double target = 0.0;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

// Loads every volume of a manifest; relative paths resolve against the
// manifest's directory. Loading runs on up to worker_count() threads while
// the output order follows the manifest.
std::vector<Volume> load_manifest_volumes(const std::filesystem::path& manifest, bool normalize_intensity = true);

}  // namespace sliceset
