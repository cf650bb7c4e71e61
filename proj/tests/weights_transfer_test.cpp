#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>

#include "helpers.hpp"
#include "sliceset/config_io.hpp"
#include "sliceset/errors.hpp"
#include "sliceset/init.hpp"
#include "sliceset/pretrain.hpp"
#include "sliceset/transfer.hpp"

using namespace sliceset;
using testing::values;

namespace {

ModelConfig config(EncoderKind kind, std::size_t width, AggregatorKind agg = AggregatorKind::attention) {
  ModelConfig c;
  c.encoder = {kind, 1, width};
  c.aggregator.kind = agg;
  c.positional = true;
  c.num_slices = 10;
  return c;
}

Volume noise_volume(Extents e, std::uint64_t seed) {
  Volume v = Volume::zeros(e);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  for (auto& x : v.voxels) x = n(rng);
  return v;
}

// The standalone encoder's own state, initialized with a seed.
StateList<float> encoder_state(Encoder<float>& enc, std::uint64_t seed) {
  StateList<float> s;
  enc.collect("encoder.", s);
  he_init(s, seed);
  // non-trivial batch-norm statistics
  std::mt19937_64 rng(seed + 1);
  for (auto& e : s)
    if (e.name.find("running_") != std::string::npos)
      for (auto& x : e.tensor.mutable_data()) x = static_cast<float>(testing::uniform(1, rng, 0.5, 1.5)[0]);
  return s;
}

std::vector<std::byte> bytes_of(const WeightArchive& a) { return a.serialize(); }

}  // namespace

TEST_SUITE("archive") {
  TEST_CASE("layout is exactly as documented") {
    WeightArchive a;
    a.put("b", Shape{2}, {1.0f, -2.0f});
    a.put("a", Shape{1, 1}, {0.5f});
    a.metadata()["note"] = "x";
    const auto bytes = a.serialize();
    REQUIRE(bytes.size() > 16);
    CHECK(std::memcmp(bytes.data(), "SSNWGT01", 8) == 0);
    std::uint64_t len = 0;
    for (int i = 7; i >= 0; --i) len = (len << 8) | std::to_integer<std::uint64_t>(bytes[8 + i]);
    const std::string index(reinterpret_cast<const char*>(bytes.data()) + 16, len);
    auto j = nlohmann::json::parse(index);
    CHECK(j.at("format_version") == 1);
    CHECK(j.at("metadata").at("note") == "x");
    CHECK(j.at("tensors").at("a").at("offset") == 0);
    CHECK(j.at("tensors").at("a").at("length") == 4);
    CHECK(j.at("tensors").at("b").at("offset") == 4);
    CHECK(j.at("tensors").at("b").at("shape") == nlohmann::json::array({2}));
    CHECK(bytes.size() == 16 + len + 12);
    float second;
    std::memcpy(&second, bytes.data() + 16 + len + 8, 4);  // little-endian host
    CHECK(second == -2.0f);
    CHECK(WeightArchive::parse(bytes) == a);
  }

  TEST_CASE("malformed archives") {
    WeightArchive a;
    a.put("w", Shape{3}, {1, 2, 3});
    auto bytes = a.serialize();
    auto bad = bytes;
    bad[0] = std::byte{'X'};
    CHECK_THROWS_AS(WeightArchive::parse(bad), FormatError);
    std::vector<std::byte> cut(bytes.begin(), bytes.end() - 2);
    CHECK_THROWS_AS(WeightArchive::parse(cut), FormatError);
    CHECK_THROWS_AS(a.put("v", Shape{2}, {1.0f}), ShapeError);
    CHECK_THROWS_AS(a.at("nope"), ArchiveMismatch);
  }

  TEST_CASE("file round trip") {
    auto dir = testing::scratch_dir("archive");
    Model m(config(EncoderKind::cnn5, 4));
    he_init(m, 1);
    auto a = export_model(m);
    a.save(dir / "m.ssnw");
    CHECK(WeightArchive::load(dir / "m.ssnw") == a);
  }
}

TEST_SUITE("strict import") {
  TEST_CASE("round trip is byte-stable and forward-identical") {
    for (EncoderKind kind : {EncoderKind::cnn5, EncoderKind::resnet18}) {
      auto c = config(kind, kind == EncoderKind::cnn5 ? 4 : 1);
      const Extents e = kind == EncoderKind::cnn5 ? Extents{10, 12, 9} : Extents{10, 32, 32};
      Model a(c);
      he_init(a, 2);
      std::mt19937_64 rng(3);
      for (auto& x : a.positional_table().mutable_data()) x = static_cast<float>(testing::uniform(1, rng)[0]);
      a.set_target_scaling(3.0, 2.0);
      const auto first = export_model(a);
      Model b = model_from_archive(first);
      const auto v = noise_volume(e, 4);
      CHECK(a.forward(v).item() == b.forward(v).item());
      CHECK(bytes_of(export_model(b)) == bytes_of(first));
      Model d(c);
      import_strict(d, first);
      CHECK(bytes_of(export_model(d)) == bytes_of(first));
    }
  }

  TEST_CASE("missing, extra and transposed entries are named") {
    Model m(config(EncoderKind::cnn5, 4));
    he_init(m, 5);
    const auto full = export_model(m);
    auto expect_named = [&](const WeightArchive& a, const std::string& name) {
      try {
        import_strict(m, a);
        FAIL("expected ArchiveMismatch for " << name);
      } catch (const ArchiveMismatch& e) {
        CHECK_MESSAGE(std::string(e.what()).find(name) != std::string::npos, e.what());
      }
    };
    WeightArchive missing;
    for (const auto& [n, t] : full.entries())
      if (n != "aggregator.ff1.bias") missing.put(n, t.shape, t.values);
    expect_named(missing, "aggregator.ff1.bias");

    auto extra = full;
    extra.put("head.extra", Shape{1}, {0.0f});
    expect_named(extra, "head.extra");

    WeightArchive transposed;
    for (const auto& [n, t] : full.entries()) {
      Shape s = t.shape;
      if (n == "aggregator.ff1.weight") std::swap(s[0], s[1]);
      transposed.put(n, s, t.values);
    }
    const auto before = bytes_of(export_model(m));
    expect_named(transposed, "aggregator.ff1.weight");
    CHECK(bytes_of(export_model(m)) == before);  // nothing written on failure
  }

  TEST_CASE("model config travels in metadata") {
    auto c = config(EncoderKind::resnet50, 1);
    c.axis = Axis::coronal;
    c.task = Task::classification;
    auto back = model_config_from_json(model_config_to_json(c));
    CHECK(back.encoder.kind == EncoderKind::resnet50);
    CHECK(back.axis == Axis::coronal);
    CHECK(back.task == Task::classification);
    CHECK(back.num_slices == 10);
    CHECK_THROWS_AS(model_config_from_json(R"({"bogus": 1})"), ConfigError);
  }
}

TEST_SUITE("encoder import") {
  TEST_CASE("a 2d classifier with a 10-way head") {
    auto enc = make_encoder<float>({EncoderKind::cnn5, 1, 4});
    auto s = encoder_state(*enc, 6);
    auto archive = export_state(s);
    std::mt19937_64 rng(7);
    archive.put("fc.weight", Shape{10, 32}, std::vector<float>(320, 0.1f));
    archive.put("fc.bias", Shape{10}, std::vector<float>(10, 0.0f));

    Model m(config(EncoderKind::cnn5, 4));
    he_init(m, 8);
    const auto before = export_model(m);
    auto report = import_encoder(m, archive);
    std::set<std::string> skipped;
    for (const auto& e : report.skipped) skipped.insert(e.name);
    CHECK(skipped == std::set<std::string>{"fc.bias", "fc.weight"});
    CHECK(report.matched.size() == report.encoder_entries);
    // matched and reinitialized partition the state
    std::set<std::string> all, covered;
    for (const auto& e : m.state()) all.insert(e.name);
    covered.insert(report.matched.begin(), report.matched.end());
    for (const auto& r : report.reinitialized) CHECK(covered.insert(r).second);
    CHECK(covered == all);
    // non-encoder state untouched
    const auto after = export_model(m);
    for (const auto& n : report.reinitialized) CHECK(after.at(n) == before.at(n));
    CHECK(report.to_text().find("matched 25/25 encoder entries") != std::string::npos);
  }

  TEST_CASE("unprefixed names and the match threshold") {
    auto enc = make_encoder<float>({EncoderKind::cnn5, 1, 4});
    auto archive = export_state(encoder_state(*enc, 9));
    WeightArchive bare;
    for (const auto& [n, t] : archive.entries()) bare.put(n.substr(8), t.shape, t.values);
    Model m(config(EncoderKind::cnn5, 4));
    CHECK(import_encoder(m, bare).matched.size() == 25);

    auto other = make_encoder<float>({EncoderKind::resnet18, 1, 2});
    Model r(config(EncoderKind::cnn5, 4));
    CHECK_THROWS_AS(import_encoder(r, export_state(encoder_state(*other, 1))), ArchiveMismatch);
  }

  TEST_CASE("imported encoder reproduces standalone embeddings") {
    for (EncoderKind kind : {EncoderKind::cnn5, EncoderKind::resnet18}) {
      const std::size_t width = kind == EncoderKind::cnn5 ? 4 : 2;
      auto enc = make_encoder<float>({kind, 1, width});
      auto archive = export_state(encoder_state(*enc, 10));
      Model m(config(kind, width));
      he_init(m, 11);
      auto report = import_encoder(m, archive);
      CHECK(report.skipped.empty());
      auto standalone = make_encoder<float>({kind, 1, width});
      load_encoder(*standalone, archive);
      std::mt19937_64 rng(12);
      auto x = testing::random_tensor<float>({5, 1, 32, 33}, rng);
      auto a = values(m.encode_slices(x, Mode::eval));
      auto b = values(standalone->forward(x, Mode::eval));
      REQUIRE(a.size() == b.size());
      float worst = 0;
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      CHECK(worst <= 1e-5f);
    }
  }

  TEST_CASE("3-channel stem into a 1-channel model") {
    auto enc3 = make_encoder<float>({EncoderKind::resnet18, 3, 2});
    auto archive = export_state(encoder_state(*enc3, 13));
    Model m(config(EncoderKind::resnet18, 2));
    he_init(m, 14);
    auto report = import_encoder(m, archive, {StemAdapter::replicate});
    REQUIRE(report.adapted.size() == 1);
    CHECK(report.adapted[0].starts_with("encoder.conv1.weight"));
    CHECK(report.matched.size() == report.encoder_entries);

    std::mt19937_64 rng(15);
    auto x1 = testing::random_tensor<float>({4, 1, 32, 32}, rng);
    std::vector<float> rep;
    for (std::size_t n = 0; n < 4; ++n)
      for (int c = 0; c < 3; ++c) rep.insert(rep.end(), x1.data().begin() + n * 1024, x1.data().begin() + (n + 1) * 1024);
    auto a = values(m.encode_slices(x1, Mode::eval));
    auto b = values(enc3->forward(Tensor<float>(Shape{4, 3, 32, 32}, rep), Mode::eval));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-5f * std::max(1.0f, std::abs(b[i])));

    Model keep(config(EncoderKind::resnet18, 2));
    he_init(keep, 14);
    const auto stem = export_model(keep).at("encoder.conv1.weight");
    auto r2 = import_encoder(keep, archive, {StemAdapter::reinitialize});
    CHECK(export_model(keep).at("encoder.conv1.weight") == stem);
    CHECK(std::find(r2.reinitialized.begin(), r2.reinitialized.end(), "encoder.conv1.weight") != r2.reinitialized.end());
    CHECK(r2.skipped.size() == 1);
  }
}

TEST_SUITE("pretrain") {
  TEST_CASE("500 images reach high training accuracy, archive has no head, same seed same bytes") {
    Synthetic2dSpec spec;
    spec.height = spec.width = 32;
    spec.count = 500;
    spec.min_radius = 2.0;
    spec.max_radius = 4.0;
    spec.seed = 3;
    auto images = generate_synthetic_2d(spec);
    PretrainConfig cfg;
    cfg.encoder = {EncoderKind::cnn5, 1, 8};
    cfg.epochs = 30;
    cfg.seed = 4;
    auto r = pretrain_2d(images, cfg);
    CHECK(r.train_accuracy > 0.95);
    CHECK(r.epoch_loss.size() == 30);
    for (const auto& [name, t] : r.archive.entries()) CHECK_MESSAGE(name.starts_with("encoder."), name);
    CHECK(r.archive.size() == 25);

    spec.count = 40;
    cfg.epochs = 2;
    auto small = generate_synthetic_2d(spec);
    CHECK(bytes_of(pretrain_2d(small, cfg).archive) == bytes_of(pretrain_2d(small, cfg).archive));
  }
}
