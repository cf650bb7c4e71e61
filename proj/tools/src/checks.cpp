#include "sliceset/cli/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sliceset/errors.hpp"
#include "sliceset/init.hpp"
#include "sliceset/losses.hpp"
#include "sliceset/metrics.hpp"
#include "sliceset/model.hpp"
#include "sliceset/synthetic.hpp"

namespace sliceset::cli {

bool CheckSuiteResult::passed() const {
  return !items.empty() && std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

double CheckSuiteResult::max_value() const {
  double m = 0.0;
  for (const auto& c : items) m = std::max(m, c.value);
  return m;
}

std::string CheckSuiteResult::to_text() const {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3);
  for (const auto& c : items) {
    os << (c.passed ? "PASS " : "FAIL ") << suite << "/" << c.name << "  error " << c.value << " (tolerance "
       << c.tolerance << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << (passed() ? "PASS " : "FAIL ") << suite << ": " << items.size() << " checks, max error " << max_value()
     << std::defaultfloat << std::setprecision(3) << ", " << seconds << " s\n";
  return os.str();
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

double gradient_check(const std::vector<Tensor<double>>& leaves, const std::function<Tensor<double>()>& loss,
                      std::mt19937_64& rng, std::size_t samples_per_leaf, double h) {
  for (auto leaf : leaves) leaf.zero_grad();
  backward(loss());
  double worst = 0.0;
  NoGradGuard guard;
  for (auto leaf : leaves) {
    const std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
    if (analytic.empty()) throw std::logic_error("gradient_check: a leaf received no gradient");
    std::vector<std::size_t> coords(leaf.numel());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > samples_per_leaf) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(samples_per_leaf);
    }
    auto data = leaf.mutable_data();
    for (auto i : coords) {
      const double saved = data[i];
      data[i] = saved + h;
      const double up = loss().item();
      data[i] = saved - h;
      const double down = loss().item();
      data[i] = saved;
      worst = std::max(worst, relative_error(analytic[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

namespace {

using TensorD = Tensor<double>;

constexpr double kGradientTolerance = 1e-3;

TensorD random_tensor(const Shape& shape, std::mt19937_64& rng, bool requires_grad = true, double away_from_zero = 0.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) {
    v = u(rng);
    if (away_from_zero > 0.0 && std::abs(v) < away_from_zero) v += v < 0 ? -away_from_zero : away_from_zero;
  }
  return TensorD(shape, std::move(values), requires_grad);
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Scalar loss <out, R> with a fixed random R, so every output element
// contributes with its own weight.
std::function<TensorD()> projected(std::function<TensorD()> f, std::mt19937_64& rng) {
  NoGradGuard guard;
  const Shape shape = f().shape();
  auto weights = random_tensor(shape, rng, false);
  return [f = std::move(f), weights] { return ops::sum(ops::mul(f(), weights)); };
}

struct GradientCase {
  std::string name;
  std::vector<TensorD> leaves;
  std::function<TensorD()> loss;
  std::size_t samples = 16;
};

std::vector<GradientCase> op_cases(std::mt19937_64& rng) {
  std::vector<GradientCase> cases;
  auto add = [&](std::string name, std::vector<TensorD> leaves, std::function<TensorD()> f) {
    cases.push_back({std::move(name), std::move(leaves), projected(std::move(f), rng)});
  };
  const auto dims = [&](std::size_t n) {
    Shape s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(pick(rng, 1, 4));
    return s;
  };

  {
    const Shape s = dims(3);
    auto a = random_tensor(s, rng), b = random_tensor(s, rng);
    add("add " + shape_string(s), {a, b}, [=] { return ops::add(a, b); });
    add("sub " + shape_string(s), {a, b}, [=] { return ops::sub(a, b); });
    add("mul " + shape_string(s), {a, b}, [=] { return ops::mul(a, b); });
    add("scale+add_scalar " + shape_string(s), {a}, [=] { return ops::add_scalar(ops::scale(a, -1.7), 0.3); });
  }
  {
    const Shape s = dims(4);
    auto a = random_tensor(s, rng, true, 0.05);
    add("relu " + shape_string(s), {a}, [=] { return ops::relu(a); });
  }
  {
    const std::size_t b = pick(rng, 1, 3), k = pick(rng, 2, 5), d = pick(rng, 2, 6);
    auto x = random_tensor({b, k, d}, rng), p = random_tensor({k, d}, rng);
    add("add_trailing " + shape_string({b, k, d}), {x, p}, [=] { return ops::add_trailing(x, p); });
    add("mean_rows_canonical " + shape_string({b, k, d}), {x}, [=] { return ops::mean_rows_canonical(x); });
    add("sum+mean " + shape_string({b, k, d}), {x}, [=] {
      return ops::add(ops::reshape(ops::sum(x), Shape{1}), ops::scale(ops::reshape(ops::mean(ops::mul(x, x)), Shape{1}), 3.0));
    });
  }
  {
    const std::size_t r = pick(rng, 2, 5), c = pick(rng, 2, 5);
    auto a = random_tensor({r, c}, rng);
    add("reshape+transpose " + shape_string({r, c}), {a}, [=] { return ops::transpose(ops::reshape(a, Shape{c, r})); });
    const std::vector<std::size_t> index{r - 1, 0, r - 1, r / 2};
    add("narrow+concat+index_select " + shape_string({r, c}), {a}, [=] {
      return ops::concat<double>({ops::narrow(a, 1, r - 1), ops::index_select(a, std::span<const std::size_t>(index))});
    });
  }
  {
    const Shape s{pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 2, 4), pick(rng, 2, 4)};
    auto a = random_tensor(s, rng);
    add("pad2d " + shape_string(s), {a}, [=] { return ops::pad2d(a, 1, 0, 2, 1); });
    add("global_avg_pool2d " + shape_string(s), {a}, [=] { return ops::global_avg_pool2d(a); });
  }
  {
    const std::size_t n = pick(rng, 1, 4), k = pick(rng, 1, 5), m = pick(rng, 1, 4);
    auto a = random_tensor({n, k}, rng), b = random_tensor({k, m}, rng), bias = random_tensor({m}, rng);
    auto w = random_tensor({m, k}, rng);
    add("matmul " + shape_string({n, k}) + "x" + shape_string({k, m}), {a, b}, [=] { return ops::matmul(a, b); });
    add("linear " + shape_string({n, k}) + "->" + std::to_string(m), {a, w, bias}, [=] { return ops::linear(a, w, bias); });
  }
  {
    const std::size_t n = pick(rng, 1, 2), c = pick(rng, 1, 3), f = pick(rng, 1, 3);
    const std::size_t h = pick(rng, 3, 6), w = pick(rng, 3, 6);
    auto x = random_tensor({n, c, h, w}, rng), k3 = random_tensor({f, c, 3, 3}, rng), bias = random_tensor({f}, rng);
    auto k2 = random_tensor({f, c, 2, 2}, rng);
    add("conv2d 3x3 stride1 pad1 " + shape_string(x.shape()), {x, k3, bias},
        [=] { return ops::conv2d(x, k3, bias, 1, 1); });
    add("conv2d 2x2 stride2 pad0 " + shape_string(x.shape()), {x, k2}, [=] { return ops::conv2d(x, k2, TensorD(), 2, 0); });
    auto k1 = random_tensor({f, c, 1, 1}, rng);
    add("conv2d 1x1 stride2 " + shape_string(x.shape()), {x, k1}, [=] { return ops::conv2d(x, k1, TensorD(), 2, 0); });
  }
  {
    const Shape s{pick(rng, 2, 4), pick(rng, 2, 5)};
    auto a = random_tensor(s, rng);
    add("softmax axis0 " + shape_string(s), {a}, [=] { return ops::softmax(a, 0); });
    add("softmax axis1 " + shape_string(s), {a}, [=] { return ops::softmax(a, 1); });
    add("log_softmax " + shape_string(s), {a}, [=] { return ops::log_softmax(a); });
    auto gain = random_tensor({s[1]}, rng), offset = random_tensor({s[1]}, rng);
    add("layer_norm " + shape_string(s), {a, gain, offset}, [=] { return ops::layer_norm(a, gain, offset); });
  }
  {
    const Shape s{pick(rng, 2, 3), pick(rng, 1, 3), pick(rng, 2, 4), pick(rng, 2, 4)};
    auto x = random_tensor(s, rng), gamma = random_tensor({s[1]}, rng), beta = random_tensor({s[1]}, rng);
    add("batch_norm2d train " + shape_string(s), {x, gamma, beta}, [=] {
      TensorD mean(Shape{s[1]}), var = TensorD::full(Shape{s[1]}, 1.0);
      return ops::batch_norm2d(x, gamma, beta, mean, var, {true, 0.1, 1e-5});
    });
    auto stats = random_tensor({s[1]}, rng, false);
    add("batch_norm2d eval " + shape_string(s), {x, gamma, beta}, [=] {
      TensorD mean = stats.detach(), var = ops::add_scalar(ops::mul(stats, stats), 0.5).detach();
      return ops::batch_norm2d(x, gamma, beta, mean, var, {false, 0.1, 1e-5});
    });
  }
  {
    const Shape s{pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 4, 7), pick(rng, 4, 7)};
    auto x = random_tensor(s, rng);
    add("max_pool2d 2x2 " + shape_string(s), {x}, [=] { return ops::max_pool2d(x, 2, 2); });
    add("max_pool2d 3x3 stride2 pad1 " + shape_string(s), {x}, [=] { return ops::max_pool2d(x, 3, 2, 1); });
  }
  {
    const std::size_t n = pick(rng, 2, 6);
    auto p = random_tensor({n, 1}, rng);
    auto t = random_tensor({n, 1}, rng, false);
    auto shifted = TensorD(Shape{n, 1}, [&] {
      std::vector<double> v(p.data().begin(), p.data().end());
      for (std::size_t i = 0; i < n; ++i) v[i] += (i % 2 ? 0.5 : -0.5);
      return v;
    }(), false);
    cases.push_back({"l1_loss n=" + std::to_string(n), {p}, [=] { return ops::l1_loss(p, shifted); }});
    cases.push_back({"mse_loss n=" + std::to_string(n), {p}, [=] { return ops::mse_loss(p, t); }});
    auto logits = random_tensor({n, 3}, rng);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(pick(rng, 0, 2));
    cases.push_back({"cross_entropy " + shape_string({n, 3}), {logits},
                     [=] { return ops::cross_entropy(logits, std::span<const int>(labels)); }});
  }
  return cases;
}

std::vector<Volume> small_volumes(Extents extents, std::size_t count, Task task, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.extents = extents;
  spec.count = count;
  spec.task = task;
  spec.seed = seed;
  spec.blob_radius = 1.0;
  auto volumes = generate_synthetic(spec);
  for (auto& v : volumes) v = normalize(v);
  return volumes;
}

GradientCase model_case(const std::string& name, ModelConfig config, Extents extents, LossKind loss_kind,
                        std::uint64_t seed, std::mt19937_64& rng, std::size_t samples) {
  auto volumes = small_volumes(extents, 2, config.task, seed);
  config = config_for_extents(config, extents);
  auto model = std::make_shared<SliceSetModel<double>>(config);
  he_init(*model, seed);
  if (config.positional) {
    for (auto& v : model->positional_table().mutable_data()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  }
  const SliceStack a = model->slice(volumes[0]), b = model->slice(volumes[1]);
  const std::vector<const SliceStack*> stacks{&a, &b};
  const TensorD slices = batch_tensor<double>(stacks);
  const std::vector<double> targets{volumes[0].target, volumes[1].target};
  std::vector<TensorD> leaves;
  for (const auto& e : model->parameters()) leaves.push_back(e.tensor);
  std::function<TensorD()> f;
  if (loss_kind == LossKind::cross_entropy) {
    f = [=] { return loss(model->forward(slices, 2, Mode::train), std::span<const double>(targets), loss_kind); };
  } else {
    f = projected([=] { return model->forward(slices, 2, Mode::train); }, rng);
  }
  return {name, leaves, f, samples};
}

}  // namespace

CheckSuiteResult check_gradients(std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  auto cases = op_cases(rng);

  ModelConfig mean_cfg;
  mean_cfg.aggregator.kind = AggregatorKind::mean;
  mean_cfg.task = Task::regression;
  cases.push_back(model_case("model cnn5-mean regression 8x12x8", mean_cfg, {8, 12, 8}, LossKind::mse, seed + 1, rng, 4));

  ModelConfig attn_cfg;
  attn_cfg.aggregator.kind = AggregatorKind::attention;
  attn_cfg.positional = true;
  attn_cfg.task = Task::classification;
  cases.push_back(
      model_case("model cnn5-attention+pe classification 8x12x8", attn_cfg, {8, 12, 8}, LossKind::cross_entropy, seed + 2, rng, 4));

  ModelConfig axial_cfg;
  axial_cfg.aggregator.kind = AggregatorKind::attention;
  axial_cfg.axis = Axis::axial;
  axial_cfg.encoder.width = 4;
  cases.push_back(model_case("model cnn5(w4)-attention axial 8x12x8", axial_cfg, {8, 12, 8}, LossKind::mse, seed + 3, rng, 8));

  ModelConfig res_cfg;
  res_cfg.encoder = {EncoderKind::resnet18, 1, 2};
  res_cfg.positional = true;
  cases.push_back(model_case("model resnet18(w2)-mean+pe 3x32x32", res_cfg, {3, 32, 32}, LossKind::mse, seed + 4, rng, 3));

  ModelConfig bottleneck_cfg;
  bottleneck_cfg.encoder = {EncoderKind::resnet50, 1, 1};
  bottleneck_cfg.aggregator.kind = AggregatorKind::attention;
  cases.push_back(model_case("model resnet50(w1)-attention 3x32x32", bottleneck_cfg, {3, 32, 32}, LossKind::mse, seed + 5, rng, 2));

  CheckSuiteResult result;
  result.suite = "gradients";
  for (auto& c : cases) {
    CheckItem item;
    item.name = c.name;
    item.tolerance = kGradientTolerance;
    item.value = gradient_check(c.leaves, c.loss, rng, c.samples);
    item.passed = item.value < item.tolerance;
    result.items.push_back(item);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CheckSuiteResult check_permutation(std::uint64_t seed, std::size_t pairs) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  const Extents extents{12, 16, 12};
  const std::size_t volume_count = 10;
  const auto volumes = small_volumes(extents, volume_count, Task::regression, seed);
  CheckSuiteResult result;
  result.suite = "permutation";
  NoGradGuard guard;

  for (auto kind : {AggregatorKind::mean, AggregatorKind::attention}) {
    ModelConfig config;
    config.aggregator.kind = kind;
    config = config_for_extents(config, extents);
    Model model(config);
    he_init(model, seed + 11);
    const std::size_t k = config.num_slices;

    std::vector<double> base(volume_count);
    for (std::size_t v = 0; v < volume_count; ++v) base[v] = model.forward(volumes[v]).item();
    CheckItem item;
    item.name = std::string(aggregator_name(kind)) + " aggregator, " + std::to_string(pairs) + " permutations";
    item.tolerance = 1.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t v = p % volume_count;
      std::vector<std::size_t> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const double permuted = model.forward(permute_along_axis(volumes[v], config.axis, order)).item();
      // error in units of the allowed tolerance 1e-5 * (1 + |prediction|)
      item.value = std::max(item.value, std::abs(permuted - base[v]) / (1e-5 * (1.0 + std::abs(base[v]))));
    }
    item.passed = item.value < item.tolerance;
    item.detail = "normalized by 1e-5*(1+|prediction|)";
    result.items.push_back(item);

    ModelConfig with_pe = config;
    with_pe.positional = true;
    Model pe_model(with_pe);
    he_init(pe_model, seed + 11);
    const auto source = model.state();
    for (const auto& e : pe_model.state()) {
      auto match = std::find_if(source.begin(), source.end(), [&](const auto& s) { return s.name == e.name; });
      if (match == source.end()) continue;
      Tensor<float> dst = e.tensor;
      std::copy(match->tensor.data().begin(), match->tensor.data().end(), dst.mutable_data().begin());
    }
    CheckItem zero_pe;
    zero_pe.name = std::string(aggregator_name(kind)) + " aggregator, zero positional table vs disabled";
    zero_pe.tolerance = 0.5;
    std::size_t differing = 0;
    for (std::size_t v = 0; v < volume_count; ++v) {
      const auto a = model.forward(volumes[v]);
      const auto b = pe_model.forward(volumes[v]);
      if (std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)) != 0) ++differing;
    }
    zero_pe.value = static_cast<double>(differing);
    zero_pe.passed = differing == 0;
    zero_pe.detail = "count of volumes whose outputs are not bit-identical";
    result.items.push_back(zero_pe);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

// Independent oracles, written from the definitions.
double oracle_mae(const std::vector<double>& p, const std::vector<double>& t) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(static_cast<long double>(p[i]) - t[i]);
  return static_cast<double>(s / p.size());
}

double oracle_rmse(const std::vector<double>& p, const std::vector<double>& t) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double d = static_cast<long double>(p[i]) - t[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s / p.size()));
}

// Macro-averaged per-class recall.
double oracle_balanced_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  double total = 0;
  for (int cls : {0, 1}) {
    int hits = 0, members = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != cls) continue;
      ++members;
      hits += pred[i] == cls;
    }
    total += static_cast<double>(hits) / members;
  }
  return total / 2;
}

// 2TP / (2TP + FP + FN)
double oracle_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    tp += pred[i] == 1 && truth[i] == 1;
    fp += pred[i] == 1 && truth[i] == 0;
    fn += pred[i] == 0 && truth[i] == 1;
  }
  return tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

// O(n^2): rank of i = 1 + #{j : s_j > s_i or (s_j == s_i and j < i)}.
double oracle_average_precision(const std::vector<double>& scores, const std::vector<int>& truth) {
  const std::size_t n = scores.size();
  auto rank = [&](std::size_t i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) r += scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
    return r;
  };
  double total = 0;
  int positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truth[i] != 1) continue;
    ++positives;
    const std::size_t ri = rank(i);
    std::size_t above = 0;
    for (std::size_t j = 0; j < n; ++j) above += truth[j] == 1 && rank(j) <= ri;
    total += static_cast<double>(above) / ri;
  }
  return total / positives;
}

}  // namespace

CheckSuiteResult check_metrics(std::uint64_t seed, std::size_t instances) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  constexpr double tol = 1e-9;
  double worst_reg = 0, worst_ba = 0, worst_f1 = 0, worst_ap = 0;

  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::size_t n = pick(rng, 2, 200);
    std::normal_distribution<double> gauss(50.0, 20.0);
    std::vector<double> pred(n), target(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = gauss(rng);
      target[i] = gauss(rng);
    }
    worst_reg = std::max({worst_reg, std::abs(metrics::mae(pred, target) - oracle_mae(pred, target)),
                          std::abs(metrics::rmse(pred, target) - oracle_rmse(pred, target))});

    std::vector<int> truth(n), labels(n);
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.1, 0.9)(rng));
    for (std::size_t i = 0; i < n; ++i) truth[i] = coin(rng);
    truth[0] = 1;
    truth[1] = 0;
    // every fourth instance predicts no positives; every fifth is perfect
    for (std::size_t i = 0; i < n; ++i) labels[i] = inst % 4 == 0 ? 0 : (inst % 5 == 0 ? truth[i] : coin(rng));
    std::vector<double> scores(n);
    const bool coarse = inst % 3 == 0;  // many tied scores
    for (std::size_t i = 0; i < n; ++i) {
      double s = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      if (coarse) s = std::round(s * 5) / 5;
      if (inst % 5 == 0) s = truth[i] ? 2.0 + s : s;
      scores[i] = s;
    }
    worst_ba = std::max(worst_ba, std::abs(metrics::balanced_accuracy(labels, truth) - oracle_balanced_accuracy(labels, truth)));
    worst_f1 = std::max(worst_f1, std::abs(metrics::f1_score(labels, truth) - oracle_f1(labels, truth)));
    worst_ap = std::max(worst_ap, std::abs(metrics::average_precision(scores, truth) - oracle_average_precision(scores, truth)));
    if (inst % 4 == 0 && metrics::f1_score(labels, truth) != 0.0) worst_f1 = std::max(worst_f1, 1.0);
    if (inst % 5 == 0 && inst % 4 != 0) {
      const double perfect = std::min({metrics::balanced_accuracy(labels, truth), metrics::f1_score(labels, truth),
                                       metrics::average_precision(scores, truth)});
      if (perfect != 1.0) worst_ap = std::max(worst_ap, 1.0);
    }
  }

  CheckSuiteResult result;
  result.suite = "metrics";
  const auto item = [&](std::string name, double value) {
    result.items.push_back({std::move(name), value, tol, value < tol, std::to_string(instances) + " instances"});
  };
  item("mae+rmse vs definitional", worst_reg);
  item("balanced_accuracy vs per-class recall", worst_ba);
  item("f1 vs 2TP/(2TP+FP+FN), no-positive case = 0", worst_f1);
  item("average_precision vs brute-force rank walk, perfect = 1", worst_ap);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CheckSuiteResult run_check(std::string_view suite, std::uint64_t seed) {
  if (suite == "gradients") return check_gradients(seed);
  if (suite == "permutation") return check_permutation(seed);
  if (suite == "metrics") return check_metrics(seed);
  throw ConfigError("suite: unknown check suite '" + std::string(suite) + "' (expected gradients, permutation or metrics)");
}

}  // namespace sliceset::cli
