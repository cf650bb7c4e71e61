#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sliceset/tensor.hpp"

namespace sliceset {

struct ArchiveTensor {
  Shape shape;
  std::vector<float> values;

  bool operator==(const ArchiveTensor&) const = default;
};

/// Named float32 tensors plus string metadata.
///
/// File layout: the 8-byte magic "SSNWGT01", the index length as a
/// little-endian uint64, a compact JSON index
///   {"format_version": 1, "metadata": {...},
///    "tensors": {name: {"shape": [...], "offset": o, "length": n}}}
/// with keys sorted, then the little-endian float32 payloads concatenated in
/// name order. Offsets and lengths are bytes relative to the payload start.
class WeightArchive {
 public:
  static constexpr std::string_view kMagic = "SSNWGT01";
  static constexpr int kFormatVersion = 1;

  using Entries = std::map<std::string, ArchiveTensor, std::less<>>;

  // Throws ShapeError when values.size() does not match the shape.
  void put(std::string name, Shape shape, std::vector<float> values);
  bool contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }
  const ArchiveTensor& at(std::string_view name) const;
  const Entries& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  std::vector<std::byte> serialize() const;
  static WeightArchive parse(std::span<const std::byte> bytes);

  void save(const std::filesystem::path& path) const;
  static WeightArchive load(const std::filesystem::path& path);

  bool operator==(const WeightArchive&) const = default;

 private:
  Entries entries_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace sliceset
