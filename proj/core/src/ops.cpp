#include "sliceset/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sliceset/errors.hpp"

namespace sliceset::ops {

namespace {

using Acc = double;

template <typename T>
using Node = detail::Node<T>;

template <typename T>
Node<T>& input(Node<T>& self, std::size_t i) {
  return *self.inputs[i];
}

std::string describe(const char* op, const std::string& detail) { return std::string(op) + ": " + detail; }

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(describe(op, "shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape())));
  }
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& a, std::size_t rank, const char* what) {
  if (!a.defined() || a.dim() != rank) {
    throw ShapeError(describe(op, std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                                      shape_string(a.shape())));
  }
}

template <typename T, typename F>
Tensor<T> unary_map(const char* op, const Tensor<T>& a, F&& f, typename Tensor<T>::Backward backward) {
  std::vector<T> out(a.numel());
  auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor<T>::make_result(a.shape(), std::move(out), op, {a}, std::move(backward));
}

}  // namespace

// ---- elementwise -----------------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("add", a, b);
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), "add", {a, b}, [](Node<T>& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto& in = input(self, k);
      if (!in.requires_grad) continue;
      auto& g = in.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("sub", a, b);
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node<T>& self) {
    auto& lhs = input(self, 0);
    auto& rhs = input(self, 1);
    if (lhs.requires_grad) {
      auto& g = lhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (rhs.requires_grad) {
      auto& g = rhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("mul", a, b);
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node<T>& self) {
    auto& lhs = input(self, 0);
    auto& rhs = input(self, 1);
    if (lhs.requires_grad) {
      auto& g = lhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * rhs.data[i];
    }
    if (rhs.requires_grad) {
      auto& g = rhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * lhs.data[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor) {
  return unary_map(
      "scale", a, [factor](T v) { return static_cast<T>(v * factor); },
      [factor](Node<T>& self) {
        auto& g = input(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += static_cast<T>(self.grad[i] * factor);
      });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, double value) {
  return unary_map(
      "add_scalar", a, [value](T v) { return static_cast<T>(v + value); },
      [](Node<T>& self) {
        auto& g = input(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary_map(
      "relu", a, [](T v) { return v > T(0) ? v : T(0); },
      [](Node<T>& self) {
        auto& in = input(self, 0);
        auto& g = in.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (in.data[i] > T(0)) g[i] += self.grad[i];
        }
      });
}

template <typename T>
Tensor<T> add_trailing(const Tensor<T>& a, const Tensor<T>& b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.begin(), bs.end(), as.end() - static_cast<std::ptrdiff_t>(bs.size()))) {
    throw ShapeError(describe("add_trailing", shape_string(bs) + " is not a trailing shape of " + shape_string(as)));
  }
  const std::size_t inner = b.numel();
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i % inner];
  return Tensor<T>::make_result(as, std::move(out), "add_trailing", {a, b}, [inner](Node<T>& self) {
    auto& lhs = input(self, 0);
    auto& rhs = input(self, 1);
    if (lhs.requires_grad) {
      auto& g = lhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (rhs.requires_grad) {
      std::vector<Acc> acc(inner, 0.0);
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc[i % inner] += self.grad[i];
      auto& g = rhs.ensure_grad();
      for (std::size_t i = 0; i < inner; ++i) g[i] += static_cast<T>(acc[i]);
    }
  });
}

// ---- reductions ------------------------------------------------------------

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  Acc total = 0.0;
  for (auto v : a.data()) total += v;
  return Tensor<T>::make_result(Shape{1}, {static_cast<T>(total)}, "sum", {a}, [](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    const T seed = self.grad[0];
    for (auto& v : g) v += seed;
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  Acc total = 0.0;
  for (auto v : a.data()) total += v;
  const double n = static_cast<double>(a.numel());
  return Tensor<T>::make_result(Shape{1}, {static_cast<T>(total / n)}, "mean", {a}, [n](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    const T seed = static_cast<T>(self.grad[0] / n);
    for (auto& v : g) v += seed;
  });
}

template <typename T>
Tensor<T> mean_rows_canonical(const Tensor<T>& a) {
  const auto& s = a.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw ShapeError(describe("mean_rows_canonical", "expected [K, D] or [B, K, D], got " + shape_string(s)));
  }
  const std::size_t batch = s.size() == 3 ? s[0] : 1;
  const std::size_t rows = s[s.size() - 2];
  const std::size_t cols = s.back();
  Shape out_shape = s.size() == 3 ? Shape{batch, cols} : Shape{cols};
  std::vector<T> out(batch * cols);
  std::vector<T> column(rows);
  auto x = a.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t d = 0; d < cols; ++d) {
      for (std::size_t k = 0; k < rows; ++k) column[k] = x[(b * rows + k) * cols + d];
      std::sort(column.begin(), column.end());
      Acc total = 0.0;
      for (auto v : column) total += v;
      out[b * cols + d] = static_cast<T>(total / static_cast<double>(rows));
    }
  }
  return Tensor<T>::make_result(std::move(out_shape), std::move(out), "mean_rows", {a},
                                [batch, rows, cols](Node<T>& self) {
                                  auto& g = input(self, 0).ensure_grad();
                                  const double inv = 1.0 / static_cast<double>(rows);
                                  for (std::size_t b = 0; b < batch; ++b)
                                    for (std::size_t k = 0; k < rows; ++k)
                                      for (std::size_t d = 0; d < cols; ++d)
                                        g[(b * rows + k) * cols + d] += static_cast<T>(self.grad[b * cols + d] * inv);
                                });
}

// ---- shape -----------------------------------------------------------------

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError(describe("reshape", "cannot view " + shape_string(a.shape()) + " as " + shape_string(shape)));
  }
  std::vector<T> out(a.data().begin(), a.data().end());
  return Tensor<T>::make_result(std::move(shape), std::move(out), "reshape", {a}, [](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> narrow(const Tensor<T>& a, std::size_t begin, std::size_t count) {
  if (a.dim() == 0 || count == 0 || begin + count > a.size(0)) {
    throw ShapeError(describe("narrow", "rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                            ") out of range for " + shape_string(a.shape())));
  }
  const std::size_t row = a.numel() / a.size(0);
  Shape shape = a.shape();
  shape[0] = count;
  auto x = a.data();
  std::vector<T> out(x.begin() + static_cast<std::ptrdiff_t>(begin * row),
                     x.begin() + static_cast<std::ptrdiff_t>((begin + count) * row));
  return Tensor<T>::make_result(std::move(shape), std::move(out), "narrow", {a}, [begin, row](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    const std::size_t offset = begin * row;
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t rows = 0;
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) {
    if (p.dim() == 0 || Shape(p.shape().begin() + 1, p.shape().end()) != tail) {
      throw ShapeError(describe("concat", "incompatible part " + shape_string(p.shape())));
    }
    rows += p.size(0);
    sizes.push_back(p.numel());
  }
  Shape shape = parts[0].shape();
  shape[0] = rows;
  std::vector<T> out;
  out.reserve(shape_numel(shape));
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return Tensor<T>::make_result(std::move(shape), std::move(out), "concat", parts, [sizes](Node<T>& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      auto& in = input(self, k);
      if (in.requires_grad) {
        auto& g = in.ensure_grad();
        for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += self.grad[offset + i];
      }
      offset += sizes[k];
    }
  });
}

template <typename T>
Tensor<T> index_select(const Tensor<T>& a, std::span<const std::size_t> index) {
  if (a.dim() == 0 || index.empty()) throw ShapeError("index_select: empty input or index");
  const std::size_t rows = a.size(0);
  const std::size_t row = a.numel() / rows;
  for (auto i : index) {
    if (i >= rows) throw ShapeError(describe("index_select", "index " + std::to_string(i) + " out of range"));
  }
  Shape shape = a.shape();
  shape[0] = index.size();
  std::vector<T> out(index.size() * row);
  auto x = a.data();
  for (std::size_t r = 0; r < index.size(); ++r)
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(index[r] * row), row,
                out.begin() + static_cast<std::ptrdiff_t>(r * row));
  std::vector<std::size_t> idx(index.begin(), index.end());
  return Tensor<T>::make_result(std::move(shape), std::move(out), "index_select", {a},
                                [idx = std::move(idx), row](Node<T>& self) {
                                  auto& g = input(self, 0).ensure_grad();
                                  for (std::size_t r = 0; r < idx.size(); ++r)
                                    for (std::size_t j = 0; j < row; ++j) g[idx[r] * row + j] += self.grad[r * row + j];
                                });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  require_rank("transpose", a, 2, "input");
  const std::size_t m = a.size(0), n = a.size(1);
  std::vector<T> out(m * n);
  auto x = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
  return Tensor<T>::make_result(Shape{n, m}, std::move(out), "transpose", {a}, [m, n](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  });
}

template <typename T>
Tensor<T> pad2d(const Tensor<T>& a, std::size_t top, std::size_t bottom, std::size_t left, std::size_t right) {
  require_rank("pad2d", a, 4, "input");
  const std::size_t planes = a.size(0) * a.size(1);
  const std::size_t h = a.size(2), w = a.size(3);
  const std::size_t oh = h + top + bottom, ow = w + left + right;
  std::vector<T> out(planes * oh * ow, T(0));
  auto x = a.data();
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < h; ++i)
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>((p * h + i) * w), w,
                  out.begin() + static_cast<std::ptrdiff_t>((p * oh + i + top) * ow + left));
  return Tensor<T>::make_result(Shape{a.size(0), a.size(1), oh, ow}, std::move(out), "pad2d", {a},
                                [=](Node<T>& self) {
                                  auto& g = input(self, 0).ensure_grad();
                                  for (std::size_t p = 0; p < planes; ++p)
                                    for (std::size_t i = 0; i < h; ++i)
                                      for (std::size_t j = 0; j < w; ++j)
                                        g[(p * h + i) * w + j] += self.grad[(p * oh + i + top) * ow + left + j];
                                });
}

// ---- linear algebra --------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul", a, 2, "lhs");
  require_rank("matmul", b, 2, "rhs");
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
  if (b.size(0) != k) {
    throw ShapeError(describe("matmul", "inner dimensions differ: " + shape_string(a.shape()) + " x " +
                                            shape_string(b.shape())));
  }
  std::vector<T> out(m * n);
  std::vector<Acc> acc(n);
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      const Acc av = x[i * k + r];
      const T* brow = y.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = static_cast<T>(acc[j]);
  }
  return Tensor<T>::make_result(Shape{m, n}, std::move(out), "matmul", {a, b}, [m, k, n](Node<T>& self) {
    auto& lhs = input(self, 0);
    auto& rhs = input(self, 1);
    const T* g = self.grad.data();
    if (lhs.requires_grad) {
      auto& ga = lhs.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < k; ++r) {
          Acc s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += static_cast<Acc>(g[i * n + j]) * rhs.data[r * n + j];
          ga[i * k + r] += static_cast<T>(s);
        }
    }
    if (rhs.requires_grad) {
      auto& gb = rhs.ensure_grad();
      std::vector<Acc> acc(n);
      for (std::size_t r = 0; r < k; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          const Acc av = lhs.data[i * k + r];
          for (std::size_t j = 0; j < n; ++j) acc[j] += av * g[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) gb[r * n + j] += static_cast<T>(acc[j]);
      }
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank("linear", in, 2, "input");
  require_rank("linear", weight, 2, "weight");
  const std::size_t n = in.size(0), din = in.size(1), dout = weight.size(0);
  if (weight.size(1) != din) {
    throw ShapeError(describe("linear", "input features " + std::to_string(din) + " do not match weight " +
                                            shape_string(weight.shape())));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{dout}) {
    throw ShapeError(describe("linear", "bias shape " + shape_string(bias.shape()) + " expected [" +
                                            std::to_string(dout) + "]"));
  }
  std::vector<T> out(n * dout);
  auto x = in.data(), w = weight.data();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t o = 0; o < dout; ++o) {
      Acc s = has_bias ? static_cast<Acc>(bias.data()[o]) : 0.0;
      const T* xr = x.data() + r * din;
      const T* wr = w.data() + o * din;
      for (std::size_t i = 0; i < din; ++i) s += static_cast<Acc>(wr[i]) * xr[i];
      out[r * dout + o] = static_cast<T>(s);
    }
  std::vector<Tensor<T>> inputs{in, weight};
  if (has_bias) inputs.push_back(bias);
  return Tensor<T>::make_result(Shape{n, dout}, std::move(out), "linear", inputs, [=](Node<T>& self) {
    auto& xin = input(self, 0);
    auto& win = input(self, 1);
    const T* g = self.grad.data();
    if (xin.requires_grad) {
      auto& gx = xin.ensure_grad();
      std::vector<Acc> acc(din);
      for (std::size_t r = 0; r < n; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t o = 0; o < dout; ++o) {
          const Acc go = g[r * dout + o];
          const T* wr = win.data.data() + o * din;
          for (std::size_t i = 0; i < din; ++i) acc[i] += go * wr[i];
        }
        for (std::size_t i = 0; i < din; ++i) gx[r * din + i] += static_cast<T>(acc[i]);
      }
    }
    if (win.requires_grad) {
      auto& gw = win.ensure_grad();
      std::vector<Acc> acc(din);
      for (std::size_t o = 0; o < dout; ++o) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
          const Acc go = g[r * dout + o];
          const T* xr = xin.data.data() + r * din;
          for (std::size_t i = 0; i < din; ++i) acc[i] += go * xr[i];
        }
        for (std::size_t i = 0; i < din; ++i) gw[o * din + i] += static_cast<T>(acc[i]);
      }
    }
    if (has_bias && input(self, 2).requires_grad) {
      auto& gb = input(self, 2).ensure_grad();
      for (std::size_t o = 0; o < dout; ++o) {
        Acc s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += g[r * dout + o];
        gb[o] += static_cast<T>(s);
      }
    }
  });
}

namespace {

struct ConvGeometry {
  std::size_t channels, height, width;
  std::size_t kh, kw, stride, padding;
  std::size_t out_h, out_w;
  std::size_t patch() const { return channels * kh * kw; }
  std::size_t pixels() const { return out_h * out_w; }
};

// Patch matrix in [patch][pixel] layout.
template <typename T>
void im2col(const T* image, const ConvGeometry& g, T* col) {
  const std::size_t pixels = g.pixels();
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t i = 0; i < g.kh; ++i)
      for (std::size_t j = 0; j < g.kw; ++j) {
        T* row = col + ((c * g.kh + i) * g.kw + j) * pixels;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.padding);
          T* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill_n(dst, g.out_w, T(0));
            continue;
          }
          const T* src = image + (c * g.height + static_cast<std::size_t>(iy)) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.padding);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) ? T(0) : src[ix];
          }
        }
      }
}

template <typename T>
void col2im_add(const Acc* col, const ConvGeometry& g, T* image) {
  const std::size_t pixels = g.pixels();
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t i = 0; i < g.kh; ++i)
      for (std::size_t j = 0; j < g.kw; ++j) {
        const Acc* row = col + ((c * g.kh + i) * g.kw + j) * pixels;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          T* dst = image + (c * g.height + static_cast<std::size_t>(iy)) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
            dst[ix] += static_cast<T>(row[oy * g.out_w + ox]);
          }
        }
      }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& in, const Tensor<T>& kernel, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding) {
  require_rank("conv2d", in, 4, "input");
  require_rank("conv2d", kernel, 4, "kernel");
  if (stride == 0) throw ShapeError("conv2d: stride must be at least 1");
  const std::size_t batch = in.size(0);
  const std::size_t filters = kernel.size(0);
  ConvGeometry geo{in.size(1), in.size(2), in.size(3), kernel.size(2), kernel.size(3), stride, padding, 0, 0};
  if (kernel.size(1) != geo.channels) {
    throw ShapeError(describe("conv2d", "input has " + std::to_string(geo.channels) + " channels but kernel " +
                                            shape_string(kernel.shape()) + " expects " +
                                            std::to_string(kernel.size(1))));
  }
  if (geo.kh > geo.height + 2 * padding || geo.kw > geo.width + 2 * padding) {
    throw ShapeError(describe("conv2d", "kernel " + shape_string(kernel.shape()) + " exceeds padded input " +
                                            shape_string(in.shape())));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{filters}) {
    throw ShapeError(describe("conv2d", "bias shape " + shape_string(bias.shape()) + " expected [" +
                                            std::to_string(filters) + "]"));
  }
  geo.out_h = (geo.height + 2 * padding - geo.kh) / stride + 1;
  geo.out_w = (geo.width + 2 * padding - geo.kw) / stride + 1;

  const std::size_t patch = geo.patch(), pixels = geo.pixels();
  const std::size_t in_plane = geo.channels * geo.height * geo.width;
  std::vector<T> out(batch * filters * pixels);
  std::vector<T> col(patch * pixels);
  std::vector<Acc> acc(pixels);
  auto x = in.data(), w = kernel.data();
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(x.data() + n * in_plane, geo, col.data());
    for (std::size_t f = 0; f < filters; ++f) {
      std::fill(acc.begin(), acc.end(), has_bias ? static_cast<Acc>(bias.data()[f]) : 0.0);
      const T* wf = w.data() + f * patch;
      for (std::size_t r = 0; r < patch; ++r) {
        const Acc wv = wf[r];
        const T* cr = col.data() + r * pixels;
        for (std::size_t p = 0; p < pixels; ++p) acc[p] += wv * cr[p];
      }
      T* dst = out.data() + (n * filters + f) * pixels;
      for (std::size_t p = 0; p < pixels; ++p) dst[p] = static_cast<T>(acc[p]);
    }
  }

  std::vector<Tensor<T>> inputs{in, kernel};
  if (has_bias) inputs.push_back(bias);
  return Tensor<T>::make_result(
      Shape{batch, filters, geo.out_h, geo.out_w}, std::move(out), "conv2d", inputs,
      [geo, batch, filters, has_bias](Node<T>& self) {
        auto& xin = input(self, 0);
        auto& kin = input(self, 1);
        const std::size_t patch = geo.patch(), pixels = geo.pixels();
        const std::size_t in_plane = geo.channels * geo.height * geo.width;
        std::vector<T> col(patch * pixels);
        std::vector<Acc> dcol;
        std::vector<Acc> dw;
        if (xin.requires_grad) dcol.resize(patch * pixels);
        if (kin.requires_grad) dw.assign(filters * patch, 0.0);
        for (std::size_t n = 0; n < batch; ++n) {
          const T* g = self.grad.data() + n * filters * pixels;
          if (kin.requires_grad) {
            im2col(xin.data.data() + n * in_plane, geo, col.data());
            for (std::size_t f = 0; f < filters; ++f) {
              const T* gf = g + f * pixels;
              Acc* dwf = dw.data() + f * patch;
              for (std::size_t r = 0; r < patch; ++r) {
                const T* cr = col.data() + r * pixels;
                Acc s = 0.0;
                for (std::size_t p = 0; p < pixels; ++p) s += static_cast<Acc>(gf[p]) * cr[p];
                dwf[r] += s;
              }
            }
          }
          if (xin.requires_grad) {
            std::fill(dcol.begin(), dcol.end(), 0.0);
            for (std::size_t f = 0; f < filters; ++f) {
              const T* gf = g + f * pixels;
              const T* wf = kin.data.data() + f * patch;
              for (std::size_t r = 0; r < patch; ++r) {
                const Acc wv = wf[r];
                Acc* dr = dcol.data() + r * pixels;
                for (std::size_t p = 0; p < pixels; ++p) dr[p] += wv * gf[p];
              }
            }
            col2im_add(dcol.data(), geo, xin.ensure_grad().data() + n * in_plane);
          }
        }
        if (kin.requires_grad) {
          auto& gk = kin.ensure_grad();
          for (std::size_t i = 0; i < dw.size(); ++i) gk[i] += static_cast<T>(dw[i]);
        }
        if (has_bias && input(self, 2).requires_grad) {
          auto& gb = input(self, 2).ensure_grad();
          for (std::size_t f = 0; f < filters; ++f) {
            Acc s = 0.0;
            for (std::size_t n = 0; n < batch; ++n) {
              const T* gf = self.grad.data() + (n * filters + f) * pixels;
              for (std::size_t p = 0; p < pixels; ++p) s += gf[p];
            }
            gb[f] += static_cast<T>(s);
          }
        }
      });
}

// ---- normalization ---------------------------------------------------------

template <typename T>
Tensor<T> softmax(const Tensor<T>& a, std::size_t axis) {
  if (axis >= a.dim()) throw ShapeError("softmax: axis out of range for " + shape_string(a.shape()));
  const auto& s = a.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];
  std::vector<T> out(a.numel());
  auto x = a.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      Acc peak = -std::numeric_limits<Acc>::infinity();
      for (std::size_t l = 0; l < len; ++l) peak = std::max<Acc>(peak, x[base + l * inner]);
      Acc total = 0.0;
      for (std::size_t l = 0; l < len; ++l) total += std::exp(static_cast<Acc>(x[base + l * inner]) - peak);
      for (std::size_t l = 0; l < len; ++l)
        out[base + l * inner] = static_cast<T>(std::exp(static_cast<Acc>(x[base + l * inner]) - peak) / total);
    }
  return Tensor<T>::make_result(s, std::move(out), "softmax", {a}, [outer, inner, len](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        Acc dot = 0.0;
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t i = base + l * inner;
          dot += static_cast<Acc>(self.grad[i]) * self.data[i];
        }
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t i = base + l * inner;
          g[i] += static_cast<T>(self.data[i] * (self.grad[i] - dot));
        }
      }
  });
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& a) {
  if (a.dim() == 0) throw ShapeError("log_softmax: empty input");
  const std::size_t len = a.shape().back();
  const std::size_t rows = a.numel() / len;
  std::vector<T> out(a.numel());
  auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * len;
    Acc peak = *std::max_element(xr, xr + len);
    Acc total = 0.0;
    for (std::size_t l = 0; l < len; ++l) total += std::exp(xr[l] - peak);
    const Acc lse = peak + std::log(total);
    for (std::size_t l = 0; l < len; ++l) out[r * len + l] = static_cast<T>(xr[l] - lse);
  }
  return Tensor<T>::make_result(a.shape(), std::move(out), "log_softmax", {a}, [rows, len](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      Acc total = 0.0;
      for (std::size_t l = 0; l < len; ++l) total += self.grad[r * len + l];
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t i = r * len + l;
        g[i] += static_cast<T>(self.grad[i] - std::exp(static_cast<Acc>(self.data[i])) * total);
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& a, const Tensor<T>& gain, const Tensor<T>& offset, double eps) {
  if (a.dim() == 0) throw ShapeError("layer_norm: empty input");
  const std::size_t len = a.shape().back();
  if (gain.shape() != Shape{len} || offset.shape() != Shape{len}) {
    throw ShapeError(describe("layer_norm", "gain/offset must have shape [" + std::to_string(len) + "]"));
  }
  const std::size_t rows = a.numel() / len;
  std::vector<T> out(a.numel());
  std::vector<Acc> normalized(a.numel());
  std::vector<Acc> inv_std(rows);
  auto x = a.data(), gv = gain.data(), bv = offset.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * len;
    Acc mu = 0.0;
    for (std::size_t l = 0; l < len; ++l) mu += xr[l];
    mu /= static_cast<Acc>(len);
    Acc var = 0.0;
    for (std::size_t l = 0; l < len; ++l) var += (xr[l] - mu) * (xr[l] - mu);
    var /= static_cast<Acc>(len);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t l = 0; l < len; ++l) {
      const Acc xh = (xr[l] - mu) * inv_std[r];
      normalized[r * len + l] = xh;
      out[r * len + l] = static_cast<T>(xh * gv[l] + bv[l]);
    }
  }
  return Tensor<T>::make_result(
      a.shape(), std::move(out), "layer_norm", {a, gain, offset},
      [rows, len, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node<T>& self) {
        auto& xin = input(self, 0);
        auto& gin = input(self, 1);
        auto& oin = input(self, 2);
        if (xin.requires_grad) {
          auto& gx = xin.ensure_grad();
          std::vector<Acc> dxh(len);
          for (std::size_t r = 0; r < rows; ++r) {
            Acc mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t l = 0; l < len; ++l) {
              dxh[l] = static_cast<Acc>(self.grad[r * len + l]) * gin.data[l];
              mean_d += dxh[l];
              mean_dx += dxh[l] * normalized[r * len + l];
            }
            mean_d /= static_cast<Acc>(len);
            mean_dx /= static_cast<Acc>(len);
            for (std::size_t l = 0; l < len; ++l)
              gx[r * len + l] +=
                  static_cast<T>(inv_std[r] * (dxh[l] - mean_d - normalized[r * len + l] * mean_dx));
          }
        }
        if (gin.requires_grad || oin.requires_grad) {
          std::vector<Acc> dg(len, 0.0), db(len, 0.0);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t l = 0; l < len; ++l) {
              dg[l] += self.grad[r * len + l] * normalized[r * len + l];
              db[l] += self.grad[r * len + l];
            }
          if (gin.requires_grad) {
            auto& g = gin.ensure_grad();
            for (std::size_t l = 0; l < len; ++l) g[l] += static_cast<T>(dg[l]);
          }
          if (oin.requires_grad) {
            auto& g = oin.ensure_grad();
            for (std::size_t l = 0; l < len; ++l) g[l] += static_cast<T>(db[l]);
          }
        }
      });
}

template <typename T>
Tensor<T> batch_norm2d(const Tensor<T>& a, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                       Tensor<T>& running_var, const BatchNormOptions& options) {
  require_rank("batch_norm2d", a, 4, "input");
  const std::size_t batch = a.size(0), channels = a.size(1), plane = a.size(2) * a.size(3);
  const Shape cshape{channels};
  if (gamma.shape() != cshape || beta.shape() != cshape || running_mean.shape() != cshape ||
      running_var.shape() != cshape) {
    throw ShapeError(describe("batch_norm2d", "per-channel parameters must have shape [" + std::to_string(channels) + "]"));
  }
  const std::size_t count = batch * plane;
  std::vector<Acc> mu(channels), inv_std(channels);
  auto x = a.data();
  if (options.training) {
    if (count < 2) throw ShapeError("batch_norm2d: training mode needs more than one value per channel");
    auto rm = running_mean.mutable_data();
    auto rv = running_var.mutable_data();
    for (std::size_t c = 0; c < channels; ++c) {
      Acc s = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* p = x.data() + (n * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) s += p[i];
      }
      mu[c] = s / static_cast<Acc>(count);
      Acc v = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* p = x.data() + (n * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) v += (p[i] - mu[c]) * (p[i] - mu[c]);
      }
      const Acc biased = v / static_cast<Acc>(count);
      const Acc unbiased = v / static_cast<Acc>(count - 1);
      inv_std[c] = 1.0 / std::sqrt(biased + options.eps);
      rm[c] = static_cast<T>((1.0 - options.momentum) * rm[c] + options.momentum * mu[c]);
      rv[c] = static_cast<T>((1.0 - options.momentum) * rv[c] + options.momentum * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mu[c] = running_mean.data()[c];
      inv_std[c] = 1.0 / std::sqrt(static_cast<Acc>(running_var.data()[c]) + options.eps);
    }
  }
  std::vector<T> out(a.numel());
  std::vector<Acc> normalized;
  if (options.training) normalized.resize(a.numel());
  auto gv = gamma.data(), bv = beta.data();
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const Acc xh = (x[base + i] - mu[c]) * inv_std[c];
        if (options.training) normalized[base + i] = xh;
        out[base + i] = static_cast<T>(xh * gv[c] + bv[c]);
      }
    }
  const bool training = options.training;
  return Tensor<T>::make_result(
      a.shape(), std::move(out), "batch_norm2d", {a, gamma, beta},
      [=, normalized = std::move(normalized)](Node<T>& self) {
        auto& xin = input(self, 0);
        auto& gin = input(self, 1);
        auto& bin = input(self, 2);
        std::vector<Acc> dsum(channels, 0.0), dxsum(channels, 0.0);
        for (std::size_t n = 0; n < batch; ++n)
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t base = (n * channels + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              const Acc g = self.grad[base + i];
              const Acc xh = training ? normalized[base + i] : (xin.data[base + i] - mu[c]) * inv_std[c];
              dsum[c] += g;
              dxsum[c] += g * xh;
            }
          }
        if (xin.requires_grad) {
          auto& gx = xin.ensure_grad();
          const Acc m = static_cast<Acc>(count);
          for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t c = 0; c < channels; ++c) {
              const std::size_t base = (n * channels + c) * plane;
              const Acc k = gin.data[c] * inv_std[c];
              for (std::size_t i = 0; i < plane; ++i) {
                const Acc g = self.grad[base + i];
                if (training) {
                  gx[base + i] += static_cast<T>(k * (g - dsum[c] / m - normalized[base + i] * dxsum[c] / m));
                } else {
                  gx[base + i] += static_cast<T>(k * g);
                }
              }
            }
        }
        if (gin.requires_grad) {
          auto& g = gin.ensure_grad();
          for (std::size_t c = 0; c < channels; ++c) g[c] += static_cast<T>(dxsum[c]);
        }
        if (bin.requires_grad) {
          auto& g = bin.ensure_grad();
          for (std::size_t c = 0; c < channels; ++c) g[c] += static_cast<T>(dsum[c]);
        }
      });
}

// ---- pooling ---------------------------------------------------------------

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& a, std::size_t window, std::size_t stride, std::size_t padding) {
  require_rank("max_pool2d", a, 4, "input");
  if (window == 0 || stride == 0) throw ShapeError("max_pool2d: window and stride must be positive");
  if (2 * padding > window) throw ShapeError("max_pool2d: padding must not exceed half the window");
  const std::size_t planes = a.size(0) * a.size(1), h = a.size(2), w = a.size(3);
  if (window > h + 2 * padding || window > w + 2 * padding) {
    throw ShapeError(describe("max_pool2d", "window " + std::to_string(window) + " exceeds padded input " +
                                                shape_string(a.shape())));
  }
  const std::size_t oh = (h + 2 * padding - window) / stride + 1;
  const std::size_t ow = (w + 2 * padding - window) / stride + 1;
  std::vector<T> out(planes * oh * ow);
  std::vector<std::size_t> arg(out.size());
  auto x = a.data();
  const auto sh = static_cast<std::ptrdiff_t>(h), sw = static_cast<std::ptrdiff_t>(w);
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto y0 = static_cast<std::ptrdiff_t>(oy * stride) - static_cast<std::ptrdiff_t>(padding);
        const auto x0 = static_cast<std::ptrdiff_t>(ox * stride) - static_cast<std::ptrdiff_t>(padding);
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_index = 0;
        bool found = false;
        for (std::ptrdiff_t iy = std::max<std::ptrdiff_t>(y0, 0); iy < std::min(y0 + static_cast<std::ptrdiff_t>(window), sh); ++iy)
          for (std::ptrdiff_t ix = std::max<std::ptrdiff_t>(x0, 0); ix < std::min(x0 + static_cast<std::ptrdiff_t>(window), sw); ++ix) {
            const std::size_t idx = (p * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix);
            if (!found || x[idx] > best) {
              best = x[idx];
              best_index = idx;
              found = true;
            }
          }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out[o] = best;
        arg[o] = best_index;
      }
  return Tensor<T>::make_result(Shape{a.size(0), a.size(1), oh, ow}, std::move(out), "max_pool2d", {a},
                                [arg = std::move(arg)](Node<T>& self) {
                                  auto& g = input(self, 0).ensure_grad();
                                  for (std::size_t o = 0; o < arg.size(); ++o) g[arg[o]] += self.grad[o];
                                });
}

template <typename T>
Tensor<T> global_avg_pool2d(const Tensor<T>& a) {
  require_rank("global_avg_pool2d", a, 4, "input");
  const std::size_t n = a.size(0), c = a.size(1), plane = a.size(2) * a.size(3);
  std::vector<T> out(n * c);
  auto x = a.data();
  for (std::size_t i = 0; i < n * c; ++i) {
    Acc s = 0.0;
    for (std::size_t j = 0; j < plane; ++j) s += x[i * plane + j];
    out[i] = static_cast<T>(s / static_cast<Acc>(plane));
  }
  return Tensor<T>::make_result(Shape{n, c}, std::move(out), "global_avg_pool2d", {a}, [plane](Node<T>& self) {
    auto& g = input(self, 0).ensure_grad();
    const Acc inv = 1.0 / static_cast<Acc>(plane);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T v = static_cast<T>(self.grad[i] * inv);
      for (std::size_t j = 0; j < plane; ++j) g[i * plane + j] += v;
    }
  });
}

// ---- losses ----------------------------------------------------------------

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  require_same_shape("l1_loss", prediction, target);
  auto p = prediction.data(), t = target.data();
  const double n = static_cast<double>(p.size());
  Acc s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(static_cast<Acc>(p[i]) - t[i]);
  return Tensor<T>::make_result(Shape{1}, {static_cast<T>(s / n)}, "l1_loss", {prediction, target},
                                [n](Node<T>& self) {
                                  auto& pin = input(self, 0);
                                  auto& tin = input(self, 1);
                                  if (!pin.requires_grad) return;
                                  auto& g = pin.ensure_grad();
                                  const Acc seed = self.grad[0] / n;
                                  for (std::size_t i = 0; i < g.size(); ++i) {
                                    const Acc d = static_cast<Acc>(pin.data[i]) - tin.data[i];
                                    g[i] += static_cast<T>(d > 0 ? seed : (d < 0 ? -seed : 0.0));
                                  }
                                });
}

template <typename T>
Tensor<T> mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  require_same_shape("mse_loss", prediction, target);
  auto p = prediction.data(), t = target.data();
  const double n = static_cast<double>(p.size());
  Acc s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Acc d = static_cast<Acc>(p[i]) - t[i];
    s += d * d;
  }
  return Tensor<T>::make_result(Shape{1}, {static_cast<T>(s / n)}, "mse_loss", {prediction, target},
                                [n](Node<T>& self) {
                                  auto& pin = input(self, 0);
                                  auto& tin = input(self, 1);
                                  if (!pin.requires_grad) return;
                                  auto& g = pin.ensure_grad();
                                  const Acc seed = 2.0 * self.grad[0] / n;
                                  for (std::size_t i = 0; i < g.size(); ++i)
                                    g[i] += static_cast<T>(seed * (static_cast<Acc>(pin.data[i]) - tin.data[i]));
                                });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  require_rank("cross_entropy", logits, 2, "logits");
  const std::size_t n = logits.size(0), classes = logits.size(1);
  if (labels.size() != n) {
    throw ShapeError(describe("cross_entropy", std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                                                   " rows of logits"));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw std::invalid_argument("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(classes) + ")");
    }
  }
  auto x = logits.data();
  std::vector<Acc> probs(n * classes);
  Acc total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const T* xr = x.data() + r * classes;
    const Acc peak = *std::max_element(xr, xr + classes);
    Acc z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(xr[c] - peak);
    const Acc lse = peak + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) probs[r * classes + c] = std::exp(xr[c] - lse);
    total += lse - xr[static_cast<std::size_t>(labels[r])];
  }
  std::vector<int> y(labels.begin(), labels.end());
  return Tensor<T>::make_result(Shape{1}, {static_cast<T>(total / static_cast<Acc>(n))}, "cross_entropy", {logits},
                                [n, classes, probs = std::move(probs), y = std::move(y)](Node<T>& self) {
                                  auto& g = input(self, 0).ensure_grad();
                                  const Acc seed = self.grad[0] / static_cast<Acc>(n);
                                  for (std::size_t r = 0; r < n; ++r)
                                    for (std::size_t c = 0; c < classes; ++c) {
                                      const Acc onehot = static_cast<std::size_t>(y[r]) == c ? 1.0 : 0.0;
                                      g[r * classes + c] += static_cast<T>(seed * (probs[r * classes + c] - onehot));
                                    }
                                });
}

#define SLICESET_INSTANTIATE_OPS(T)                                                                                \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                                      \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                                      \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                                      \
  template Tensor<T> scale(const Tensor<T>&, double);                                                              \
  template Tensor<T> add_scalar(const Tensor<T>&, double);                                                         \
  template Tensor<T> relu(const Tensor<T>&);                                                                       \
  template Tensor<T> add_trailing(const Tensor<T>&, const Tensor<T>&);                                             \
  template Tensor<T> sum(const Tensor<T>&);                                                                        \
  template Tensor<T> mean(const Tensor<T>&);                                                                       \
  template Tensor<T> mean_rows_canonical(const Tensor<T>&);                                                        \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                             \
  template Tensor<T> narrow(const Tensor<T>&, std::size_t, std::size_t);                                           \
  template Tensor<T> concat(const std::vector<Tensor<T>>&);                                                        \
  template Tensor<T> index_select(const Tensor<T>&, std::span<const std::size_t>);                                 \
  template Tensor<T> transpose(const Tensor<T>&);                                                                  \
  template Tensor<T> pad2d(const Tensor<T>&, std::size_t, std::size_t, std::size_t, std::size_t);                  \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                                   \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t);       \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                                       \
  template Tensor<T> log_softmax(const Tensor<T>&);                                                                \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double);                     \
  template Tensor<T> batch_norm2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&,   \
                                  const BatchNormOptions&);                                                        \
  template Tensor<T> max_pool2d(const Tensor<T>&, std::size_t, std::size_t, std::size_t);                          \
  template Tensor<T> global_avg_pool2d(const Tensor<T>&);                                                          \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);                                                  \
  template Tensor<T> mse_loss(const Tensor<T>&, const Tensor<T>&);                                                 \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);

SLICESET_INSTANTIATE_OPS(float)
SLICESET_INSTANTIATE_OPS(double)

#undef SLICESET_INSTANTIATE_OPS

}  // namespace sliceset::ops
