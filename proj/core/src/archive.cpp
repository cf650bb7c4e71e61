#include "sliceset/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "sliceset/errors.hpp"

namespace sliceset {

namespace {

void append_u64_le(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
}

std::uint64_t read_u64_le(const std::byte* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint64_t>(p[i]);
  return v;
}

void append_f32_le(std::vector<std::byte>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xffu));
}

float read_f32_le(const std::byte* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<std::uint32_t>(p[i]);
  return std::bit_cast<float>(bits);
}

}  // namespace

void WeightArchive::put(std::string name, Shape shape, std::vector<float> values) {
  if (name.empty()) throw std::invalid_argument("archive entry name must not be empty");
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("archive entry " + name + ": shape " + shape_string(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " values, got " + std::to_string(values.size()));
  }
  entries_[std::move(name)] = ArchiveTensor{std::move(shape), std::move(values)};
}

const ArchiveTensor& WeightArchive::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArchiveMismatch("archive has no entry " + std::string(name));
  return it->second;
}

std::vector<std::byte> WeightArchive::serialize() const {
  nlohmann::json index;
  index["format_version"] = kFormatVersion;
  index["metadata"] = nlohmann::json::object();
  for (const auto& [k, v] : metadata_) index["metadata"][k] = v;
  index["tensors"] = nlohmann::json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : entries_) {
    const std::uint64_t length = 4 * t.values.size();
    index["tensors"][name] = {{"shape", t.shape}, {"offset", offset}, {"length", length}};
    offset += length;
  }
  const std::string text = index.dump();

  std::vector<std::byte> out;
  out.reserve(16 + text.size() + offset);
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  append_u64_le(out, text.size());
  for (char c : text) out.push_back(static_cast<std::byte>(c));
  for (const auto& [name, t] : entries_) {
    for (float f : t.values) append_f32_le(out, f);
  }
  return out;
}

WeightArchive WeightArchive::parse(std::span<const std::byte> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("weight archive: missing SSNWGT01 magic");
  }
  const std::uint64_t index_len = read_u64_le(bytes.data() + 8);
  if (index_len > bytes.size() - 16) throw FormatError("weight archive: index length exceeds file size");
  const auto* index_begin = reinterpret_cast<const char*>(bytes.data() + 16);
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(index_begin, index_begin + index_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight archive: corrupt index: ") + e.what());
  }
  const std::span<const std::byte> payload = bytes.subspan(16 + index_len);

  WeightArchive archive;
  try {
    const int version = index.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw UnsupportedError("weight archive: format version " + std::to_string(version) + " is not supported");
    }
    for (const auto& [k, v] : index.at("metadata").items()) archive.metadata_[k] = v.get<std::string>();
    for (const auto& [name, info] : index.at("tensors").items()) {
      const Shape shape = info.at("shape").get<Shape>();
      const auto offset = info.at("offset").get<std::uint64_t>();
      const auto length = info.at("length").get<std::uint64_t>();
      const std::size_t numel = shape_numel(shape);
      if (length != 4 * numel) {
        throw FormatError("weight archive: entry " + name + " has length " + std::to_string(length) + " for shape " +
                          shape_string(shape));
      }
      if (offset > payload.size() || length > payload.size() - offset) {
        throw FormatError("weight archive: entry " + name + " extends past the end of the file");
      }
      std::vector<float> values(numel);
      for (std::size_t i = 0; i < numel; ++i) values[i] = read_f32_le(payload.data() + offset + 4 * i);
      archive.entries_[name] = ArchiveTensor{shape, std::move(values)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight archive: malformed index: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("weight archive: ") + e.what());
  }
  return archive;
}

void WeightArchive::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

WeightArchive WeightArchive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(std::as_bytes(std::span<const char>(raw)));
}

}  // namespace sliceset
