#include <benchmark/benchmark.h>

#include <random>

#include "sliceset/init.hpp"
#include "sliceset/losses.hpp"
#include "sliceset/model.hpp"
#include "sliceset/ops.hpp"
#include "sliceset/slicing.hpp"
#include "sliceset/synthetic.hpp"

using namespace sliceset;

namespace {

Tensor<float> randn(Shape shape, std::uint64_t seed, bool grad = false) {
  Tensor<float> t(std::move(shape), grad);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  for (auto& x : t.mutable_data()) x = n(rng);
  return t;
}

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  auto x = randn({16, c, 32, 32}, 1);
  auto k = randn({c, c, 3, 3}, 2);
  Tensor<float> none;
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv2d(x, k, none, 1, 1));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_Conv2d)->Arg(4)->Arg(16)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  auto x = randn({16, c, 32, 32}, 1, true);
  auto k = randn({c, c, 3, 3}, 2, true);
  Tensor<float> none;
  for (auto _ : state) {
    auto y = ops::sum(ops::conv2d(x, k, none, 1, 1));
    backward(y);
    x.zero_grad();
    k.zero_grad();
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(4)->Arg(16);

ModelConfig small_config(EncoderKind kind, std::size_t width, const Extents& extents) {
  ModelConfig mc;
  mc.encoder = {kind, 1, width};
  mc.aggregator.kind = AggregatorKind::attention;
  mc.positional = true;
  return config_for_extents(mc, extents);
}

void BM_EncodeSlices(benchmark::State& state) {
  const auto kind = static_cast<EncoderKind>(state.range(0));
  const Extents e = kind == EncoderKind::cnn5 ? Extents{16, 20, 16} : Extents{16, 32, 32};
  Model model(small_config(kind, kind == EncoderKind::cnn5 ? 8 : 2, e));
  he_init(model, 0);
  SyntheticSpec spec;
  spec.extents = e;
  spec.count = 1;
  const auto slices = to_tensor<float>(model.slice(generate_synthetic(spec).front()));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(model.encode_slices(slices, Mode::eval));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(e[0]));
}
BENCHMARK(BM_EncodeSlices)->Arg(static_cast<int>(EncoderKind::cnn5))->Arg(static_cast<int>(EncoderKind::resnet18));

// One optimizer-free training step: batch forward, loss, backward.
void BM_TrainStep(benchmark::State& state) {
  const Extents e{16, 20, 16};
  Model model(small_config(EncoderKind::cnn5, 4, e));
  he_init(model, 0);
  SyntheticSpec spec;
  spec.extents = e;
  spec.count = 8;
  const auto volumes = generate_synthetic(spec);
  std::vector<SliceStack> stacks;
  std::vector<double> targets;
  for (const auto& v : volumes) stacks.push_back(model.slice(v)), targets.push_back(v.target);
  std::vector<const SliceStack*> ptrs;
  for (const auto& s : stacks) ptrs.push_back(&s);
  const auto batch = batch_tensor<float>(ptrs);
  const auto params = model.parameters();
  for (auto _ : state) {
    auto l = loss(model.forward(batch, volumes.size(), Mode::train), targets, LossKind::mse);
    backward(l);
    for (auto p : params) p.tensor.zero_grad();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(volumes.size()));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
