#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "helpers.hpp"
#include "sliceset/errors.hpp"
#include "sliceset/ops.hpp"

using namespace sliceset;
using testing::random_tensor;
using testing::values;

namespace {

// Six-loop cross-correlation.
std::vector<double> naive_conv(const Tensor<double>& x, const Tensor<double>& k, const Tensor<double>* bias,
                               std::size_t stride, std::size_t pad) {
  const auto& xs = x.shape();
  const auto& ks = k.shape();
  const std::size_t n = xs[0], c = xs[1], h = xs[2], w = xs[3], f = ks[0], kh = ks[2], kw = ks[3];
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1, ow = (w + 2 * pad - kw) / stride + 1;
  std::vector<double> out(n * f * oh * ow, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < f; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double s = bias ? bias->data()[o] : 0.0;
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v) {
                const long y = static_cast<long>(i * stride + u) - static_cast<long>(pad);
                const long z = static_cast<long>(j * stride + v) - static_cast<long>(pad);
                if (y < 0 || z < 0 || y >= static_cast<long>(h) || z >= static_cast<long>(w)) continue;
                s += x.data()[((b * c + ch) * h + y) * w + z] * k.data()[((o * c + ch) * kh + u) * kw + v];
              }
          out[((b * f + o) * oh + i) * ow + j] = s;
        }
  return out;
}

// Central differences of a scalar function with respect to every leaf element.
double max_fd_error(std::vector<Tensor<double>> leaves, const std::function<Tensor<double>()>& f) {
  for (auto& l : leaves) l.zero_grad();
  backward(f());
  double worst = 0.0;
  NoGradGuard guard;
  for (auto& l : leaves) {
    const std::vector<double> g(l.grad().begin(), l.grad().end());
    auto d = l.mutable_data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double saved = d[i];
      d[i] = saved + 1e-6;
      const double up = f().item();
      d[i] = saved - 1e-6;
      const double down = f().item();
      d[i] = saved;
      const double numeric = (up - down) / 2e-6;
      worst = std::max(worst, std::abs(numeric - g[i]) / std::max({1e-3, std::abs(numeric), std::abs(g[i])}));
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("zero extents are rejected") {
    CHECK_THROWS_AS(Tensor<float>(Shape{2, 0, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor<float>(Shape{2}, std::vector<float>{1, 2, 3}), ShapeError);
  }

  TEST_CASE("shared subexpressions accumulate gradients") {
    Tensor<double> x(Shape{3}, {1.0, -2.0, 0.5}, true);
    auto y = ops::sum(ops::add(ops::mul(x, x), x));  // d/dx = 2x + 1
    backward(y);
    CHECK(values(Tensor<double>(Shape{3}, std::vector<double>(x.grad().begin(), x.grad().end()))) ==
          std::vector<double>{3.0, -3.0, 2.0});
  }

  TEST_CASE("leaf gradients accumulate across backward calls until zeroed") {
    Tensor<double> x(Shape{2}, {1.0, 2.0}, true);
    backward(ops::sum(ops::scale(x, 3.0)));
    backward(ops::sum(ops::scale(x, 3.0)));
    CHECK(x.grad()[0] == 6.0);
    x.zero_grad();
    CHECK(x.grad()[1] == 0.0);
  }

  TEST_CASE("no-grad mode records no graph") {
    Tensor<float> x(Shape{2}, {1.0f, 2.0f}, true);
    NoGradGuard guard;
    auto y = ops::mul(x, x);
    CHECK_FALSE(y.requires_grad());
    CHECK(y.is_leaf());
  }

  TEST_CASE("long chains backpropagate without recursion") {
    Tensor<double> x(Shape{1}, {1.0}, true);
    Tensor<double> y = x;
    for (int i = 0; i < 20000; ++i) y = ops::add_scalar(y, 1e-3);
    backward(ops::sum(y));
    CHECK(x.grad()[0] == 1.0);
  }

  TEST_CASE("backward needs a scalar") {
    Tensor<double> x(Shape{2}, {1.0, 2.0}, true);
    CHECK_THROWS_AS(backward(ops::scale(x, 2.0)), ShapeError);
  }
}

TEST_SUITE("ops") {
  TEST_CASE("conv2d matches the six-loop oracle") {
    std::mt19937_64 rng(3);
    for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 0}, {1, 1}, {2, 1}, {2, 0}}) {
      auto x = random_tensor<double>({2, 3, 7, 6}, rng);
      auto k = random_tensor<double>({4, 3, 3, 3}, rng);
      auto b = random_tensor<double>({4}, rng);
      const auto got = values(ops::conv2d(x, k, b, stride, pad));
      const auto want = naive_conv(x, k, &b, stride, pad);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("float conv2d agrees with the double oracle") {
    std::mt19937_64 rng(4);
    auto xd = random_tensor<double>({1, 2, 9, 9}, rng);
    auto kd = random_tensor<double>({3, 2, 3, 3}, rng);
    const auto want = naive_conv(xd, kd, nullptr, 1, 1);
    Tensor<float> xf(xd.shape(), std::vector<float>(xd.data().begin(), xd.data().end()));
    Tensor<float> kf(kd.shape(), std::vector<float>(kd.data().begin(), kd.data().end()));
    const auto got = values(ops::conv2d(xf, kf, Tensor<float>(), 1, 1));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-5));
  }

  TEST_CASE("linear matches explicit dot products") {
    std::mt19937_64 rng(5);
    auto x = random_tensor<double>({3, 4}, rng), w = random_tensor<double>({2, 4}, rng), b = random_tensor<double>({2}, rng);
    const auto y = values(ops::linear(x, w, b));
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t o = 0; o < 2; ++o) {
        double s = b.data()[o];
        for (std::size_t i = 0; i < 4; ++i) s += x.data()[n * 4 + i] * w.data()[o * 4 + i];
        CHECK(y[n * 2 + o] == doctest::Approx(s).epsilon(1e-14));
      }
  }

  TEST_CASE("matmul and transpose") {
    Tensor<double> a(Shape{2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor<double> b(Shape{3, 2}, {7, 8, 9, 10, 11, 12});
    CHECK(values(ops::matmul(a, b)) == std::vector<double>{58, 64, 139, 154});
    CHECK(values(ops::transpose(a)) == std::vector<double>{1, 4, 2, 5, 3, 6});
    CHECK_THROWS_AS(ops::matmul(a, a), ShapeError);
  }

  TEST_CASE("layer_norm hand values") {
    Tensor<double> x(Shape{1, 3}, {1, 2, 3});
    auto y = values(ops::layer_norm(x, Tensor<double>::full(Shape{3}, 1.0), Tensor<double>(Shape{3})));
    const double s = std::sqrt(2.0 / 3.0 + 1e-5);
    CHECK(y[0] == doctest::Approx(-1.0 / s));
    CHECK(y[1] == doctest::Approx(0.0));
    CHECK(y[2] == doctest::Approx(1.0 / s));
  }

  TEST_CASE("softmax and log_softmax") {
    Tensor<double> x(Shape{1, 2}, {0.0, std::log(2.0)});
    auto p = values(ops::softmax(x, 1));
    CHECK(p[0] == doctest::Approx(1.0 / 3));
    CHECK(p[1] == doctest::Approx(2.0 / 3));
    auto lp = values(ops::log_softmax(x));
    CHECK(lp[0] == doctest::Approx(std::log(1.0 / 3)));
    Tensor<double> big(Shape{1, 2}, {1000.0, 1000.0});
    CHECK(values(ops::softmax(big, 1))[0] == doctest::Approx(0.5));
  }

  TEST_CASE("batch_norm2d statistics") {
    // one channel, values 1..4 in a 2x2 map, batch 1
    Tensor<double> x(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor<double> gamma = Tensor<double>::full(Shape{1}, 2.0), beta = Tensor<double>::full(Shape{1}, 0.5);
    Tensor<double> rm(Shape{1}), rv = Tensor<double>::full(Shape{1}, 1.0);
    auto y = values(ops::batch_norm2d(x, gamma, beta, rm, rv, {true, 0.1, 1e-5}));
    const double sd = std::sqrt(1.25 + 1e-5);  // biased variance of 1..4
    CHECK(y[0] == doctest::Approx(2.0 * (1 - 2.5) / sd + 0.5));
    CHECK(rm.data()[0] == doctest::Approx(0.25));
    CHECK(rv.data()[0] == doctest::Approx(0.9 + 0.1 * (5.0 / 3.0)));  // unbiased 1.6667
    auto e = values(ops::batch_norm2d(x, gamma, beta, rm, rv, {false, 0.1, 1e-5}));
    CHECK(e[3] == doctest::Approx(2.0 * (4 - 0.25) / std::sqrt(rv.data()[0] + 1e-5) + 0.5));
    CHECK(rm.data()[0] == doctest::Approx(0.25));  // eval leaves buffers alone
  }

  TEST_CASE("max_pool2d") {
    std::vector<double> v(16);
    std::iota(v.begin(), v.end(), 1.0);
    Tensor<double> x(Shape{1, 1, 4, 4}, v);
    CHECK(values(ops::max_pool2d(x, 2, 2)) == std::vector<double>{6, 8, 14, 16});
    // padded cells never win, even against negative values
    Tensor<double> neg(Shape{1, 1, 2, 2}, {-4, -3, -2, -1});
    CHECK(values(ops::max_pool2d(neg, 3, 2, 1)) == std::vector<double>{-1});
  }

  TEST_CASE("pooling, padding and reductions") {
    Tensor<double> x(Shape{1, 2, 1, 2}, {1, 3, 5, 9});
    CHECK(values(ops::global_avg_pool2d(x)) == std::vector<double>{2, 7});
    auto p = ops::pad2d(x, 1, 0, 0, 1);
    CHECK(p.shape() == Shape{1, 2, 2, 3});
    CHECK(values(p) == std::vector<double>{0, 0, 0, 1, 3, 0, 0, 0, 0, 5, 9, 0});
    CHECK(ops::sum(x).item() == 18);
    CHECK(ops::mean(x).item() == 4.5);
  }

  TEST_CASE("losses") {
    Tensor<double> p(Shape{2}, {3, 5}), t(Shape{2}, {1, 5});
    CHECK(ops::l1_loss(p, t).item() == doctest::Approx(1.0));
    CHECK(ops::mse_loss(p, t).item() == doctest::Approx(2.0));
    CHECK(ops::l1_loss(p, p).item() == 0.0);
    Tensor<double> logits(Shape{1, 2}, {0, 0});
    const std::vector<int> label{0};
    CHECK(ops::cross_entropy(logits, std::span<const int>(label)).item() == doctest::Approx(std::log(2.0)));
    const std::vector<int> bad{2};
    CHECK_THROWS(ops::cross_entropy(logits, std::span<const int>(bad)));
  }

  TEST_CASE("mean_rows_canonical is bit-identical under row permutation") {
    std::mt19937_64 rng(9);
    auto x = random_tensor<float>({7, 33}, rng);
    const std::vector<std::size_t> order{6, 2, 4, 0, 1, 5, 3};
    auto a = values(ops::mean_rows_canonical(x));
    auto b = values(ops::mean_rows_canonical(ops::index_select(x, std::span<const std::size_t>(order))));
    CHECK(a == b);
    double s = 0;
    for (std::size_t k = 0; k < 7; ++k) s += x.data()[k * 33];
    CHECK(a[0] == doctest::Approx(s / 7).epsilon(1e-6));
  }

  TEST_CASE("shape ops") {
    Tensor<double> a(Shape{3, 2}, {1, 2, 3, 4, 5, 6});
    CHECK(values(ops::narrow(a, 1, 2)) == std::vector<double>{3, 4, 5, 6});
    const std::vector<std::size_t> idx{2, 0};
    CHECK(values(ops::index_select(a, std::span<const std::size_t>(idx))) == std::vector<double>{5, 6, 1, 2});
    CHECK(ops::concat<double>({a, a}).shape() == Shape{6, 2});
    CHECK_THROWS_AS(ops::reshape(a, Shape{4}), ShapeError);
    Tensor<double> row(Shape{2}, {10, 20});
    CHECK(values(ops::add_trailing(a, row)) == std::vector<double>{11, 22, 13, 24, 15, 26});
  }

  TEST_CASE("finite differences on composite expressions") {
    std::mt19937_64 rng(11);
    auto x = random_tensor<double>({2, 2, 5, 5}, rng, true);
    auto k = random_tensor<double>({3, 2, 3, 3}, rng, true);
    auto g = random_tensor<double>({3}, rng, true), b = random_tensor<double>({3}, rng, true);
    auto w = random_tensor<double>({4, 27}, rng, false);
    auto r = random_tensor<double>({2, 4}, rng, false);
    auto f = [&] {
      Tensor<double> rm(Shape{3}), rv = Tensor<double>::full(Shape{3}, 1.0);
      auto h = ops::batch_norm2d(ops::conv2d(x, k, Tensor<double>(), 1, 0), g, b, rm, rv, {true, 0.1, 1e-5});
      h = ops::max_pool2d(ops::relu(h), 2, 1);  // 3x3 -> 2x2
      auto flat = ops::reshape(ops::pad2d(h, 0, 1, 0, 1), Shape{2, 27});
      return ops::sum(ops::mul(ops::softmax(ops::matmul(flat, ops::transpose(w)), 1), r));
    };
    CHECK(max_fd_error({x, k, g, b}, f) < 1e-5);
  }
}
