#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sliceset/ops.hpp"
#include "sliceset/tensor.hpp"

namespace sliceset {

enum class Mode { train, eval };

// How `he_init` treats a state entry.
enum class InitRule {
  he_normal,  // Normal(0, sqrt(2 / fan_in)), fan_in = product of shape[1:]
  zeros,
  ones,
};

/// One named tensor of a model's state. Trainable entries are optimized;
/// the rest (batch-norm running statistics, target scaling) are buffers
/// that are still serialized and transferred.
template <typename T>
struct StateEntry {
  std::string name;
  Tensor<T> tensor;
  bool trainable = true;
  InitRule init = InitRule::zeros;
};

template <typename T>
using StateList = std::vector<StateEntry<T>>;

template <typename T>
StateList<T> trainable_only(const StateList<T>& state) {
  StateList<T> out;
  for (const auto& e : state)
    if (e.trainable) out.push_back(e);
  return out;
}

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         std::size_t padding, bool with_bias);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(const std::string& prefix, StateList<T>& out) const;

  std::size_t in_channels() const { return weight_.size(1); }
  std::size_t out_channels() const { return weight_.size(0); }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
  std::size_t stride_ = 1;
  std::size_t padding_ = 0;
};

template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(std::size_t channels, double momentum = 0.1, double eps = 1e-5);

  Tensor<T> forward(const Tensor<T>& x, Mode mode);
  void collect(const std::string& prefix, StateList<T>& out) const;

  // Frozen layers normalize with the running statistics and never update
  // them, even in train mode. The affine parameters still train.
  void set_frozen(bool frozen) { frozen_ = frozen; }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  bool frozen_ = false;
};

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in_features, std::size_t out_features, bool with_bias = true);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(const std::string& prefix, StateList<T>& out) const;

  std::size_t in_features() const { return weight_.size(1); }
  std::size_t out_features() const { return weight_.size(0); }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::size_t features, double eps = 1e-5);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(const std::string& prefix, StateList<T>& out) const;

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
  double eps_ = 1e-5;
};

extern template class Conv2d<float>;
extern template class Conv2d<double>;
extern template class BatchNorm2d<float>;
extern template class BatchNorm2d<double>;
extern template class Linear<float>;
extern template class Linear<double>;
extern template class LayerNorm<float>;
extern template class LayerNorm<double>;

}  // namespace sliceset
