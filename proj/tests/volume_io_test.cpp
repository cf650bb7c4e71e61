#include <doctest.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "sliceset/dataset.hpp"
#include "sliceset/errors.hpp"
#include "sliceset/nifti.hpp"
#include "sliceset/slicing.hpp"
#include "sliceset/synthetic.hpp"

using namespace sliceset;
namespace fs = std::filesystem;

namespace {

// Hand-rolled NIfTI-1 writer, field offsets straight from nifti1.h.
struct Header {
  std::int16_t dims[8] = {3, 4, 4, 4, 1, 1, 1, 1};
  std::int16_t datatype = 16;
  std::int16_t bitpix = 32;
  float slope = 0.0f, inter = 0.0f;
  bool big = false;
};

template <typename V>
void put(std::vector<unsigned char>& buf, std::size_t off, V v, bool big) {
  unsigned char raw[sizeof(V)];
  std::memcpy(raw, &v, sizeof(V));
  if (big) std::reverse(raw, raw + sizeof(V));
  std::memcpy(buf.data() + off, raw, sizeof(V));
}

template <typename V>
std::vector<unsigned char> oracle_file(const Header& h, const std::vector<V>& voxels) {
  std::vector<unsigned char> buf(352 + voxels.size() * sizeof(V), 0);
  put<std::int32_t>(buf, 0, 348, h.big);
  for (int d = 0; d < 8; ++d) put<std::int16_t>(buf, 40 + 2 * d, h.dims[d], h.big);
  put<std::int16_t>(buf, 70, h.datatype, h.big);
  put<std::int16_t>(buf, 72, h.bitpix, h.big);
  put<float>(buf, 108, 352.0f, h.big);
  put<float>(buf, 112, h.slope, h.big);
  put<float>(buf, 116, h.inter, h.big);
  std::memcpy(buf.data() + 344, "n+1\0", 4);
  for (std::size_t i = 0; i < voxels.size(); ++i) put<V>(buf, 352 + i * sizeof(V), voxels[i], h.big);
  return buf;
}

void write_raw(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_gz(const fs::path& p, const std::vector<unsigned char>& bytes) {
  gzFile f = gzopen(p.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(f);
}

std::span<const std::byte> as_bytes(const std::vector<unsigned char>& v) {
  return {reinterpret_cast<const std::byte*>(v.data()), v.size()};
}

std::vector<float> ramp(std::size_t n) {
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 0.25f * static_cast<float>(i) - 3.0f;
  return v;
}

std::pair<double, double> moments(const std::vector<float>& v) {
  double m = 0, s = 0;
  for (float x : v) m += x;
  m /= static_cast<double>(v.size());
  for (float x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace

TEST_SUITE("nifti") {
  TEST_CASE("reads a crafted float32 file") {
    auto dir = testing::scratch_dir("nifti-f32");
    auto vox = ramp(64);
    vox[0] = 42.5f;
    write_raw(dir / "a.nii", oracle_file(Header{}, vox));
    NiftiInfo info;
    auto v = load_nifti(dir / "a.nii", &info);
    CHECK(v.extents == Extents{4, 4, 4});
    CHECK(v.at(0, 0, 0) == 42.5f);
    CHECK(v.voxels == vox);
    CHECK(info.datatype == 16);
    CHECK_FALSE(info.big_endian);
  }

  TEST_CASE("gzip variant loads identically") {
    auto dir = testing::scratch_dir("nifti-gz");
    const auto bytes = oracle_file(Header{}, ramp(64));
    write_raw(dir / "a.nii", bytes);
    write_gz(dir / "a.nii.gz", bytes);
    CHECK(load_nifti(dir / "a.nii.gz").voxels == load_nifti(dir / "a.nii").voxels);
  }

  TEST_CASE("big-endian int16 and uint8 with scaling") {
    Header h;
    h.big = true;
    h.datatype = 4;
    h.bitpix = 16;
    h.dims[1] = 2, h.dims[2] = 3, h.dims[3] = 1;
    std::vector<std::int16_t> raw{-300, -1, 0, 1, 2, 32000};
    auto v = parse_nifti(as_bytes(oracle_file(h, raw)));
    CHECK(v.extents == Extents{2, 3, 1});
    CHECK(v.voxels == std::vector<float>{-300, -1, 0, 1, 2, 32000});

    Header u;
    u.datatype = 2;
    u.bitpix = 8;
    u.dims[1] = 2, u.dims[2] = 2, u.dims[3] = 1;
    u.slope = 0.5f;
    u.inter = 1.0f;
    std::vector<std::uint8_t> bytes{0, 10, 200, 255};
    CHECK(parse_nifti(as_bytes(oracle_file(u, bytes))).voxels == std::vector<float>{1.0f, 6.0f, 101.0f, 128.5f});
  }

  TEST_CASE("malformed inputs") {
    auto good = oracle_file(Header{}, ramp(64));
    std::vector<unsigned char> short_hdr(good.begin(), good.begin() + 300);
    CHECK_THROWS_AS(parse_nifti(as_bytes(short_hdr)), FormatError);

    auto bad_magic = good;
    bad_magic[345] = 'x';
    CHECK_THROWS_AS(parse_nifti(as_bytes(bad_magic)), FormatError);

    auto bad_size = good;
    put<std::int32_t>(bad_size, 0, 540, false);
    CHECK_THROWS_AS(parse_nifti(as_bytes(bad_size)), FormatError);

    Header four;
    four.dims[0] = 4;
    four.dims[4] = 2;
    CHECK_THROWS_AS(parse_nifti(as_bytes(oracle_file(four, ramp(128)))), UnsupportedError);

    Header f64;
    f64.datatype = 64;
    f64.bitpix = 64;
    CHECK_THROWS_AS(parse_nifti(as_bytes(oracle_file(f64, std::vector<double>(64, 1.0)))), UnsupportedError);

    std::vector<unsigned char> cut(good.begin(), good.end() - 4);
    CHECK_THROWS_AS(parse_nifti(as_bytes(cut)), FormatError);
  }

  TEST_CASE("write then load round-trips exactly") {
    auto dir = testing::scratch_dir("nifti-rt");
    std::mt19937_64 rng(1);
    Volume v = Volume::zeros({5, 7, 3});
    for (auto& x : v.voxels) x = static_cast<float>(testing::uniform(1, rng, -1e3, 1e3)[0]);
    for (const char* name : {"v.nii", "v.nii.gz"}) {
      save_nifti(v, dir / name);
      auto back = load_nifti(dir / name);
      CHECK(back.extents == v.extents);
      CHECK(std::memcmp(back.voxels.data(), v.voxels.data(), v.voxels.size() * sizeof(float)) == 0);
    }
  }
}

TEST_SUITE("normalize") {
  TEST_CASE("constant volume maps to zeros") {
    Volume v = Volume::zeros({3, 3, 3});
    std::fill(v.voxels.begin(), v.voxels.end(), 7.0f);
    auto n = normalize(v);
    CHECK(std::all_of(n.voxels.begin(), n.voxels.end(), [](float x) { return x == 0.0f; }));
  }

  TEST_CASE("two-valued volume maps to plus and minus one") {
    Volume v = Volume::zeros({2, 2, 2});
    for (std::size_t i = 0; i < 8; ++i) v.voxels[i] = (i % 2) ? 2.0f : 0.0f;
    for (std::size_t i = 0; i < 8; ++i) CHECK(normalize(v).voxels[i] == doctest::Approx((i % 2) ? 1.0 : -1.0));
  }

  TEST_CASE("random volumes get zero mean and unit std, idempotently") {
    std::mt19937_64 rng(2);
    Volume v = Volume::zeros({9, 8, 7});
    for (auto& x : v.voxels) x = static_cast<float>(5.0 + 3.0 * testing::uniform(1, rng)[0]);
    auto n = normalize(v);
    auto [m, s] = moments(n.voxels);
    CHECK(std::abs(m) < 1e-4);
    CHECK(std::abs(s - 1.0) < 1e-4);
    auto nn = normalize(n);
    for (std::size_t i = 0; i < n.voxels.size(); ++i) CHECK(std::abs(nn.voxels[i] - n.voxels[i]) < 1e-4);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("same seed gives bit-identical data") {
    SyntheticSpec spec;
    spec.count = 6;
    spec.seed = 17;
    auto a = generate_synthetic(spec), b = generate_synthetic(spec);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].voxels == b[i].voxels);
      CHECK(a[i].target == b[i].target);
      CHECK(a[i].subject_id == b[i].subject_id);
    }
    spec.seed = 18;
    CHECK(generate_synthetic(spec)[0].voxels != a[0].voxels);
  }

  TEST_CASE("noise-free regression target is linear in the blob centroid") {
    for (Axis axis : {Axis::sagittal, Axis::coronal, Axis::axial}) {
      SyntheticSpec spec;
      spec.noise_std = 0.0;
      spec.count = 40;
      spec.axis = axis;
      spec.target_offset = 20.0;
      spec.target_slope = 2.5;
      spec.seed = 5;
      const auto vols = generate_synthetic(spec);
      const auto d = static_cast<std::size_t>(axis);
      std::vector<double> xs, ys;
      for (const auto& v : vols) {
        double mass = 0, moment = 0;
        for (std::size_t k = 0; k < v.extents[2]; ++k)
          for (std::size_t j = 0; j < v.extents[1]; ++j)
            for (std::size_t i = 0; i < v.extents[0]; ++i) {
              const double w = v.at(i, j, k);
              const std::size_t c[3] = {i, j, k};
              mass += w;
              moment += w * static_cast<double>(c[d]);
            }
        REQUIRE(mass > 0);
        xs.push_back(moment / mass);
        ys.push_back(v.target);
      }
      // least squares y = a + b x
      const double n = static_cast<double>(xs.size());
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
      }
      const double r2 = sxy * sxy / (sxx * syy);
      CHECK(r2 > 0.99);
      CHECK(sxy / sxx == doctest::Approx(2.5).epsilon(0.02));
    }
  }

  TEST_CASE("classification has the requested class balance") {
    SyntheticSpec spec;
    spec.task = Task::classification;
    spec.count = 100;
    spec.positive_fraction = 0.3;
    const auto vols = generate_synthetic(spec);
    CHECK(std::count_if(vols.begin(), vols.end(), [](const Volume& v) { return v.target == 1.0; }) == 30);
    CHECK(std::count_if(vols.begin(), vols.end(), [](const Volume& v) { return v.target == 0.0; }) == 70);
  }

  TEST_CASE("invalid specs are rejected") {
    SyntheticSpec spec;
    spec.count = 0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec = {};
    spec.noise_std = -1;
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
    spec = {};
    spec.extents = {3, 20, 20};
    spec.blob_radius = 2.0;
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  }

  TEST_CASE("2d images") {
    Synthetic2dSpec spec;
    spec.count = 50;
    auto a = generate_synthetic_2d(spec);
    CHECK(a.pixels.size() == 50 * 16 * 16);
    CHECK(std::count(a.labels.begin(), a.labels.end(), 1) == 25);
    CHECK(generate_synthetic_2d(spec).pixels == a.pixels);
  }
}

TEST_SUITE("splits") {
  std::vector<Volume> subjects(const std::vector<std::string>& ids) {
    std::vector<Volume> out;
    for (const auto& id : ids) {
      Volume v = Volume::zeros({1, 1, 1});
      v.subject_id = id;
      out.push_back(v);
    }
    return out;
  }

  std::set<std::string> ids_of(const std::vector<Volume>& vols, const DatasetSplit& s) {
    std::set<std::string> out;
    for (auto r : s.records) out.insert(vols[r].subject_id);
    return out;
  }

  TEST_CASE("ten subjects split 8/1/1") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("s" + std::to_string(i));
    auto vols = subjects(ids);
    auto s = make_splits(vols, {0.8, 0.1, 0.1}, 3);
    CHECK(s.train.records.size() == 8);
    CHECK(s.validation.records.size() == 1);
    CHECK(s.test.records.size() == 1);
    std::set<std::size_t> all;
    for (const auto* sp : {&s.train, &s.validation, &s.test}) all.insert(sp->records.begin(), sp->records.end());
    CHECK(all.size() == 10);
  }

  TEST_CASE("random subject multisets stay disjoint and deterministic") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      std::uniform_int_distribution<int> subjects_n(5, 30), scans(1, 4);
      std::vector<std::string> ids;
      const int s = subjects_n(rng);
      for (int i = 0; i < s; ++i)
        for (int k = scans(rng); k > 0; --k) ids.push_back("sub" + std::to_string(i));
      std::shuffle(ids.begin(), ids.end(), rng);
      auto vols = subjects(ids);
      const auto seed = rng();
      auto a = make_splits(vols, {0.6, 0.2, 0.2}, seed);
      auto b = make_splits(vols, {0.6, 0.2, 0.2}, seed);
      CHECK(a.train.records == b.train.records);
      CHECK(a.test.records == b.test.records);
      auto tr = ids_of(vols, a.train), va = ids_of(vols, a.validation), te = ids_of(vols, a.test);
      std::vector<std::string> both;
      std::set_intersection(tr.begin(), tr.end(), va.begin(), va.end(), std::back_inserter(both));
      std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::back_inserter(both));
      std::set_intersection(va.begin(), va.end(), te.begin(), te.end(), std::back_inserter(both));
      CHECK(both.empty());
      CHECK(a.train.records.size() + a.validation.records.size() + a.test.records.size() == ids.size());
    }
  }

  TEST_CASE("bad fractions and empty splits are rejected") {
    auto vols = subjects({"a", "b", "c"});
    CHECK_THROWS_AS(make_splits(vols, {0.5, 0.2, 0.2}, 0), ConfigError);
    CHECK_THROWS_AS(make_splits(vols, {0.9, 0.05, 0.05}, 0), ConfigError);
  }

  TEST_CASE("manifest round trip and loading") {
    auto dir = testing::scratch_dir("manifest");
    SyntheticSpec spec;
    spec.count = 3;
    auto vols = generate_synthetic(spec);
    std::vector<ManifestEntry> rows;
    for (std::size_t i = 0; i < vols.size(); ++i) {
      const std::string name = "v" + std::to_string(i) + ".nii.gz";
      save_nifti(vols[i], dir / name);
      rows.push_back({name, vols[i].subject_id, vols[i].target});
    }
    write_manifest(dir / "m.json", rows);
    auto back = read_manifest(dir / "m.json");
    REQUIRE(back.size() == 3);
    CHECK(back[2].subject_id == rows[2].subject_id);
    auto loaded = load_manifest_volumes(dir / "m.json", false);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(loaded[i].voxels == vols[i].voxels);
      CHECK(loaded[i].target == vols[i].target);
    }
    std::ofstream(dir / "bad.json") << R"([{"path": "x.nii"}])";
    CHECK_THROWS_AS(read_manifest(dir / "bad.json"), FormatError);
  }
}

TEST_SUITE("slicing") {
  TEST_CASE("91x109x91 geometry and bit-exact restack") {
    Volume v = Volume::zeros({91, 109, 91});
    std::mt19937_64 rng(4);
    std::normal_distribution<float> n;
    for (auto& x : v.voxels) x = n(rng);
    const std::tuple<Axis, std::size_t, std::size_t, std::size_t> want[] = {
        {Axis::sagittal, 91, 109, 91}, {Axis::coronal, 109, 91, 91}, {Axis::axial, 91, 91, 109}};
    for (auto [axis, k, h, w] : want) {
      auto g = slice_geometry(v.extents, axis);
      CHECK(g.count == k);
      CHECK(g.height == h);
      CHECK(g.width == w);
      auto s = slice_volume(v, axis);
      CHECK(s.data.size() == k * h * w);
      auto back = restack(s);
      CHECK(back.extents == v.extents);
      CHECK(std::memcmp(back.voxels.data(), v.voxels.data(), v.voxels.size() * sizeof(float)) == 0);
    }
  }

  TEST_CASE("plane orientation") {
    Volume v = Volume::zeros({2, 3, 4});
    v.at(1, 2, 3) = 9.0f;
    auto s = slice_volume(v, Axis::coronal);  // plane j=2, row i=1, col k=3
    CHECK(s.slice(2)[1 * 4 + 3] == 9.0f);
    auto a = slice_volume(v, Axis::axial, 3);  // plane k=3, row i=1, col j=2
    CHECK(a.channels == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(a.slice(3)[c * 6 + 1 * 3 + 2] == 9.0f);
  }

  TEST_CASE("permute_along_axis") {
    Volume v = Volume::zeros({3, 1, 1});
    v.voxels = {10, 20, 30};
    const std::vector<std::size_t> order{2, 0, 1};
    CHECK(permute_along_axis(v, Axis::sagittal, order).voxels == std::vector<float>{30, 10, 20});
    const std::vector<std::size_t> bad{0, 0};
    CHECK_THROWS_AS(permute_along_axis(v, Axis::sagittal, bad), ShapeError);
  }
}
