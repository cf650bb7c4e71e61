#include "sliceset/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "sliceset/errors.hpp"

namespace sliceset {

namespace {

// Byte offsets within the 348-byte header.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffMagic = 344;

constexpr std::int16_t kUint8 = 2;
constexpr std::int16_t kInt16 = 4;
constexpr std::int16_t kFloat32 = 16;

class Reader {
 public:
  Reader(std::span<const std::byte> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename V>
  V get(std::size_t offset) const {
    std::array<std::byte, sizeof(V)> raw{};
    std::memcpy(raw.data(), bytes_.data() + offset, sizeof(V));
    if (swap_) std::reverse(raw.begin(), raw.end());
    V value;
    std::memcpy(&value, raw.data(), sizeof(V));
    return value;
  }

 private:
  std::span<const std::byte> bytes_;
  bool swap_;
};

template <typename V>
void put_le(std::vector<std::byte>& out, std::size_t offset, V value) {
  static_assert(std::endian::native == std::endian::little, "writer assumes a little-endian host");
  std::memcpy(out.data() + offset, &value, sizeof(V));
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (!file) throw FormatError("cannot open " + path.string());
  std::vector<std::byte> out;
  std::array<char, 1 << 16> buffer{};
  while (true) {
    int n = gzread(file, buffer.data(), static_cast<unsigned>(buffer.size()));
    if (n < 0) {
      int err = 0;
      std::string msg = gzerror(file, &err);
      gzclose(file);
      throw FormatError("read error in " + path.string() + ": " + msg);
    }
    if (n == 0) break;
    const auto* begin = reinterpret_cast<const std::byte*>(buffer.data());
    out.insert(out.end(), begin, begin + n);
  }
  gzclose(file);
  return out;
}

}  // namespace

Volume parse_nifti(std::span<const std::byte> bytes, NiftiInfo* info_out) {
  if (bytes.size() < kNiftiHeaderSize) {
    throw FormatError("NIfTI header truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  std::int32_t sizeof_hdr = 0;
  std::memcpy(&sizeof_hdr, bytes.data(), sizeof sizeof_hdr);
  bool swap = false;
  if (sizeof_hdr != static_cast<std::int32_t>(kNiftiHeaderSize)) {
    swap = true;
    if (Reader(bytes, true).get<std::int32_t>(0) != static_cast<std::int32_t>(kNiftiHeaderSize)) {
      throw FormatError("not a NIfTI-1 file: sizeof_hdr is neither 348 little- nor big-endian");
    }
  }
  const char* magic = reinterpret_cast<const char*>(bytes.data() + kOffMagic);
  if (std::memcmp(magic, "n+1\0", 4) != 0) {
    if (std::memcmp(magic, "ni1\0", 4) == 0) throw UnsupportedError("two-file NIfTI (.hdr/.img) is not supported");
    throw FormatError("bad NIfTI-1 magic");
  }
  const Reader r(bytes, swap);
  NiftiInfo info;
  info.big_endian = (std::endian::native == std::endian::little) == swap;
  const auto ndim = r.get<std::int16_t>(kOffDim);
  if (ndim < 3 || ndim > 7) throw UnsupportedError("NIfTI dim[0] = " + std::to_string(ndim) + "; only 3D volumes are supported");
  for (int d = 4; d <= ndim; ++d) {
    if (r.get<std::int16_t>(kOffDim + 2 * static_cast<std::size_t>(d)) > 1) {
      throw UnsupportedError("NIfTI volume has " + std::to_string(ndim) + " non-trivial dimensions; only 3D is supported");
    }
  }
  for (std::size_t d = 0; d < 3; ++d) {
    const auto extent = r.get<std::int16_t>(kOffDim + 2 * (d + 1));
    if (extent <= 0) throw FormatError("NIfTI dim[" + std::to_string(d + 1) + "] is not positive");
    info.extents[d] = static_cast<std::size_t>(extent);
  }
  info.datatype = r.get<std::int16_t>(kOffDatatype);
  info.bitpix = r.get<std::int16_t>(kOffBitpix);
  info.vox_offset = r.get<float>(kOffVoxOffset);
  info.scl_slope = r.get<float>(kOffSclSlope);
  info.scl_inter = r.get<float>(kOffSclInter);
  info.qform_code = r.get<std::int16_t>(kOffQformCode);
  info.sform_code = r.get<std::int16_t>(kOffSformCode);

  std::size_t width = 0;
  switch (info.datatype) {
    case kUint8: width = 1; break;
    case kInt16: width = 2; break;
    case kFloat32: width = 4; break;
    default: throw UnsupportedError("NIfTI datatype " + std::to_string(info.datatype) + " is not supported");
  }
  const auto offset = static_cast<std::size_t>(std::max(info.vox_offset, static_cast<float>(kNiftiHeaderSize)));
  Volume volume;
  volume.extents = info.extents;
  const std::size_t count = volume.voxel_count();
  if (bytes.size() < offset + count * width) {
    throw FormatError("NIfTI payload truncated: need " + std::to_string(offset + count * width) + " bytes, have " +
                      std::to_string(bytes.size()));
  }
  volume.voxels.resize(count);
  const Reader payload(bytes.subspan(offset), swap);
  for (std::size_t i = 0; i < count; ++i) {
    switch (info.datatype) {
      case kUint8: volume.voxels[i] = static_cast<float>(std::to_integer<std::uint8_t>(bytes[offset + i])); break;
      case kInt16: volume.voxels[i] = static_cast<float>(payload.get<std::int16_t>(2 * i)); break;
      default: volume.voxels[i] = payload.get<float>(4 * i); break;
    }
  }
  if (info.scl_slope != 0.0f && (info.scl_slope != 1.0f || info.scl_inter != 0.0f)) {
    for (auto& v : volume.voxels) v = v * info.scl_slope + info.scl_inter;
  }
  if (info_out) *info_out = info;
  return volume;
}

Volume load_nifti(const std::filesystem::path& path, NiftiInfo* info) {
  auto bytes = read_file(path);
  Volume v = parse_nifti(bytes, info);
  v.subject_id = path.stem().string();
  return v;
}

std::vector<std::byte> encode_nifti(const Volume& volume) {
  volume.validate();
  for (auto e : volume.extents) {
    if (e > 32767) throw UnsupportedError("NIfTI-1 extents are limited to 32767");
  }
  constexpr std::size_t kDataOffset = 352;
  std::vector<std::byte> out(kDataOffset + 4 * volume.voxels.size(), std::byte{0});
  put_le<std::int32_t>(out, 0, static_cast<std::int32_t>(kNiftiHeaderSize));
  std::array<std::int16_t, 8> dim{3, 1, 1, 1, 1, 1, 1, 1};
  for (std::size_t d = 0; d < 3; ++d) dim[d + 1] = static_cast<std::int16_t>(volume.extents[d]);
  for (std::size_t d = 0; d < 8; ++d) put_le<std::int16_t>(out, kOffDim + 2 * d, dim[d]);
  put_le<std::int16_t>(out, kOffDatatype, kFloat32);
  put_le<std::int16_t>(out, kOffBitpix, 32);
  for (std::size_t d = 0; d < 8; ++d) put_le<float>(out, kOffPixdim + 4 * d, 1.0f);
  put_le<float>(out, kOffVoxOffset, static_cast<float>(kDataOffset));
  put_le<float>(out, kOffSclSlope, 1.0f);
  put_le<float>(out, kOffSclInter, 0.0f);
  std::memcpy(out.data() + kOffMagic, "n+1\0", 4);
  std::memcpy(out.data() + kDataOffset, volume.voxels.data(), 4 * volume.voxels.size());
  return out;
}

void save_nifti(const Volume& volume, const std::filesystem::path& path) {
  const auto bytes = encode_nifti(volume);
  if (path.extension() == ".gz") {
    // "wb9" with no timestamp gives reproducible bytes.
    gzFile file = gzopen(path.string().c_str(), "wb9");
    if (!file) throw FormatError("cannot create " + path.string());
    const int written = gzwrite(file, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(file);
    if (written != static_cast<int>(bytes.size())) throw FormatError("short write to " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace sliceset
