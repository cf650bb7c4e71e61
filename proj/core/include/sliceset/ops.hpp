#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sliceset/tensor.hpp"

// Differentiable operations. Reductions accumulate in double regardless of
// the storage type; results are rounded once to T. Broadcasting is limited
// to the bias-style patterns documented per op.
namespace sliceset::ops {

// ---- elementwise -----------------------------------------------------------

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, double factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, double value);
template <typename T> Tensor<T> relu(const Tensor<T>& a);

// `b` must equal the trailing dimensions of `a`; it is added to every
// leading index (bias / positional-table pattern).
template <typename T> Tensor<T> add_trailing(const Tensor<T>& a, const Tensor<T>& b);

// ---- reductions ------------------------------------------------------------

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

// Mean over axis 1 of a [B, K, D] tensor (or axis 0 of [K, D]). For every
// output element the K contributions are sorted by value before summing, so
// the result is bit-identical under any permutation of the K rows.
template <typename T> Tensor<T> mean_rows_canonical(const Tensor<T>& a);

// ---- shape -----------------------------------------------------------------

template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);
// Rows [begin, begin + count) along axis 0.
template <typename T> Tensor<T> narrow(const Tensor<T>& a, std::size_t begin, std::size_t count);
// Concatenation along axis 0; trailing extents must agree.
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& parts);
// out[i] = a[index[i]] along axis 0.
template <typename T> Tensor<T> index_select(const Tensor<T>& a, std::span<const std::size_t> index);
template <typename T> Tensor<T> transpose(const Tensor<T>& a);
template <typename T> Tensor<T> pad2d(const Tensor<T>& a, std::size_t top, std::size_t bottom,
                                      std::size_t left, std::size_t right);

// ---- linear algebra --------------------------------------------------------

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// input [N, din], weight [dout, din], optional bias [dout] -> [N, dout]
template <typename T> Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

// input [N, C, H, W], kernel [F, C, kh, kw], optional bias [F] -> [N, F, H', W']
// with H' = (H + 2 * padding - kh) / stride + 1. Plain cross-correlation.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding);

// ---- normalization ---------------------------------------------------------

// Softmax along `axis`.
template <typename T> Tensor<T> softmax(const Tensor<T>& a, std::size_t axis);
// Log-softmax along the last axis.
template <typename T> Tensor<T> log_softmax(const Tensor<T>& a);

// Normalizes over the last axis, then applies gain and offset of that length.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& a, const Tensor<T>& gain, const Tensor<T>& offset, double eps = 1e-5);

struct BatchNormOptions {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};

// Per-channel normalization of [N, C, H, W]. In training mode batch
// statistics are used and the running buffers are updated in place (running
// variance uses the unbiased estimate); in eval mode the running buffers are
// used and left untouched.
template <typename T>
Tensor<T> batch_norm2d(const Tensor<T>& a, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                       Tensor<T>& running_var, const BatchNormOptions& options);

// ---- pooling ---------------------------------------------------------------

// Window max over [N, C, H, W]; padded positions never win.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& a, std::size_t window, std::size_t stride, std::size_t padding = 0);
// [N, C, H, W] -> [N, C]
template <typename T> Tensor<T> global_avg_pool2d(const Tensor<T>& a);

// ---- losses ----------------------------------------------------------------

// Mean absolute / squared error between equally shaped tensors; target does
// not receive gradients.
template <typename T> Tensor<T> l1_loss(const Tensor<T>& prediction, const Tensor<T>& target);
template <typename T> Tensor<T> mse_loss(const Tensor<T>& prediction, const Tensor<T>& target);
// Mean negative log-likelihood of `labels` under softmax(logits), logits [N, C].
template <typename T> Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

}  // namespace sliceset::ops
