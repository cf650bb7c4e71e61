#include <doctest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "helpers.hpp"
#include "sliceset/cli/commands.hpp"
#include "sliceset/cli/run_config.hpp"
#include "sliceset/dataset.hpp"
#include "sliceset/errors.hpp"

using namespace sliceset;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run sliceset_cli(const std::string& args) {
  const std::string cmd = std::string(SLICESET_BINARY) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
  return n;
}

const std::string kSmall = " --extents 12,16,12 --count 30 ";
const std::string kTiny = " --encoder cnn5 --width 4 --batch-size 4 ";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"modle": {}})"), doctest::Contains("modle"), ConfigError);
    CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"model": {"encoder": {"depth": 3}}})"),
                         doctest::Contains("model.encoder.depth"), ConfigError);
    CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"train": {"epochs": "ten"}})"), doctest::Contains("train.epochs"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"model": {"axis": "diagonal"}})"), doctest::Contains("model.axis"),
                         ConfigError);
  }

  TEST_CASE("defaults, task resolution and relative paths") {
    auto c = cli::parse_run_config(R"({"model": {"task": "classification"}, "data": {"manifest": "m.json"}})", "/cfg");
    CHECK(c.data.manifest == "/cfg/m.json");
    cli::resolve(c);
    CHECK(c.train.loss == LossKind::cross_entropy);
    CHECK(c.train.selection_metric == SelectionMetric::balanced_accuracy);
    CHECK(c.train.epochs == 100);
    CHECK(c.optimizer.learning_rate == 1e-4);
    auto j = json::parse(cli::to_json(c));
    CHECK(j.at("model").at("encoder").at("width") == 32);
    auto bad = cli::parse_run_config(R"({"model": {"task": "regression"}, "train": {"loss": "cross_entropy"}})");
    CHECK_THROWS_AS(cli::resolve(bad), ConfigError);
  }

  TEST_CASE("flags override the file") {
    auto c = cli::parse_run_config(R"({"train": {"epochs": 7}, "model": {"axis": "coronal"}})");
    cli::TrainOverrides o;
    o.epochs = 3;
    o.positional = true;
    cli::apply_overrides(c, o);
    CHECK(c.train.epochs == 3);
    CHECK(c.model.positional);
    CHECK(c.model.axis == Axis::coronal);
  }
}

TEST_SUITE("commands") {
  TEST_CASE("synth is deterministic and reports its target range") {
    auto dir = testing::scratch_dir("cli-synth");
    auto a = sliceset_cli("synth --task regression --seed 7" + kSmall + "-o " + (dir / "a").string());
    auto b = sliceset_cli("synth --task regression --seed 7" + kSmall + "-o " + (dir / "b").string());
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.find("target range [2, 9]") != std::string::npos);
    auto rows = read_manifest(dir / "a" / "manifest.json");
    CHECK(rows.size() == 30);
    for (const auto& r : rows) {
      CHECK(slurp(dir / "a" / r.path) == slurp(dir / "b" / r.path));
      CHECK(r.target >= 2.0);
      CHECK(r.target <= 9.0);
    }
    auto bad = sliceset_cli("synth --extents 8,8,8 --blob-radius 5 -o " + (dir / "c").string());
    CHECK(bad.code != 0);
    CHECK(bad.out.find("extents") != std::string::npos);
  }

  TEST_CASE("train, eval, task mismatch and locking") {
    auto dir = testing::scratch_dir("cli-train");
    REQUIRE(sliceset_cli("synth --task regression --seed 1" + kSmall + "-o " + (dir / "reg").string()).code == 0);
    REQUIRE(sliceset_cli("synth --task classification --seed 2" + kSmall + "-o " + (dir / "cls").string()).code == 0);

    auto axis = sliceset_cli("train --manifest " + (dir / "reg/manifest.json").string() + " --axis diagonal -o " +
                             (dir / "bad").string());
    CHECK(axis.code == 2);
    CHECK(axis.out.find("axis") != std::string::npos);

    const auto run = dir / "run";
    auto t = sliceset_cli("train --manifest " + (dir / "reg/manifest.json").string() + kTiny + "--epochs 3 -o " +
                          run.string());
    REQUIRE_MESSAGE(t.code == 0, t.out);
    CHECK(line_count(run / "train_log.jsonl") == 3);
    CHECK(fs::exists(run / "checkpoint.ssnw"));
    CHECK(fs::exists(run / "resolved_config.json"));
    CHECK_FALSE(fs::exists(run / ".sliceset.lock"));
    auto resolved = json::parse(slurp(run / "resolved_config.json"));
    CHECK(resolved.at("train").at("epochs") == 3);

    auto e = sliceset_cli("eval --checkpoint " + (run / "checkpoint.ssnw").string() + " --manifest " +
                          (run / "test_manifest.json").string());
    REQUIRE_MESSAGE(e.code == 0, e.out);
    CHECK(json::parse(e.out) == json::parse(slurp(run / "test_report.json")));

    auto mismatch = sliceset_cli("eval --checkpoint " + (run / "checkpoint.ssnw").string() + " --manifest " +
                                 (dir / "cls/manifest.json").string());
    CHECK(mismatch.code != 0);
    CHECK(mismatch.out.find("classification") != std::string::npos);

    std::ofstream(run / ".sliceset.lock") << "busy";
    auto locked = sliceset_cli("train --manifest " + (dir / "reg/manifest.json").string() + kTiny +
                               "--epochs 1 -o " + run.string());
    CHECK(locked.code != 0);
    CHECK(locked.out.find("lock") != std::string::npos);
  }

  TEST_CASE("several seeds aggregate to mean and std") {
    auto dir = testing::scratch_dir("cli-seeds");
    REQUIRE(sliceset_cli("synth --task classification --seed 3" + kSmall + "-o " + (dir / "d").string()).code == 0);
    const auto run = dir / "run";
    auto t = sliceset_cli("train --manifest " + (dir / "d/manifest.json").string() + kTiny +
                          "--epochs 2 --seeds 3 --task classification -o " + run.string());
    REQUIRE_MESSAGE(t.code == 0, t.out);
    CHECK(t.out.find("mean +/- std") != std::string::npos);
    auto agg = json::parse(slurp(run / "aggregate_report.json"));
    CHECK(agg.at("runs") == 3);
    const auto& ba = agg.at("balanced_accuracy");
    CHECK(ba.at("values").size() == 3);
    double mean = 0;
    for (double v : ba.at("values")) mean += v;
    CHECK(ba.at("mean").get<double>() == doctest::Approx(mean / 3));
    CHECK(ba.contains("std"));

    std::string ckpts;
    for (int s = 0; s < 3; ++s) ckpts += " --checkpoint " + (run / ("seed-" + std::to_string(s)) / "checkpoint.ssnw").string();
    auto e = sliceset_cli("eval" + ckpts + " --manifest " + (run / "test_manifest.json").string());
    REQUIRE_MESSAGE(e.code == 0, e.out);
    CHECK(json::parse(e.out) == agg);
  }

  TEST_CASE("pretrained archive prints the load report before training") {
    auto dir = testing::scratch_dir("cli-pretrained");
    REQUIRE(sliceset_cli("synth --task classification --seed 4" + kSmall + "-o " + (dir / "d").string()).code == 0);
    auto x = sliceset_cli("export-weights --pretrain-2d --encoder cnn5 --width 4 --images 40 --epochs 1 -o " +
                          (dir / "enc.ssnw").string());
    REQUIRE_MESSAGE(x.code == 0, x.out);
    auto t = sliceset_cli("train --manifest " + (dir / "d/manifest.json").string() + kTiny +
                          "--epochs 1 --task classification --pretrained " + (dir / "enc.ssnw").string() + " -o " +
                          (dir / "run").string());
    REQUIRE_MESSAGE(t.code == 0, t.out);
    const auto report = t.out.find("load report: matched 25/25");
    const auto epoch = t.out.find("epoch 1/1");
    CHECK(report != std::string::npos);
    CHECK(epoch != std::string::npos);
    CHECK(report < epoch);

    auto i = sliceset_cli("import-weights --archive " + (dir / "enc.ssnw").string() +
                          " --encoder cnn5 --width 4 -o " + (dir / "model.ssnw").string());
    REQUIRE_MESSAGE(i.code == 0, i.out);
    CHECK(i.out.find("reinitialized") != std::string::npos);
  }

  TEST_CASE("check suites") {
    auto m = sliceset_cli("check metrics");
    CHECK(m.code == 0);
    CHECK(m.out.find("PASS") != std::string::npos);
    CHECK(sliceset_cli("check nonsense").code == 2);
  }
}
