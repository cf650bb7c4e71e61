#include "sliceset/layers.hpp"

namespace sliceset {

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
                  std::size_t padding, bool with_bias)
    : weight_(Shape{out_channels, in_channels, kernel, kernel}, true), stride_(stride), padding_(padding) {
  if (with_bias) bias_ = Tensor<T>(Shape{out_channels}, true);
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) const {
  return ops::conv2d(x, weight_, bias_, stride_, padding_);
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, StateList<T>& out) const {
  out.push_back({prefix + "weight", weight_, true, InitRule::he_normal});
  if (bias_.defined()) out.push_back({prefix + "bias", bias_, true, InitRule::zeros});
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels, double momentum, double eps)
    : weight_(Tensor<T>::full(Shape{channels}, T(1), true)),
      bias_(Shape{channels}, true),
      running_mean_(Shape{channels}),
      running_var_(Tensor<T>::full(Shape{channels}, T(1))),
      momentum_(momentum),
      eps_(eps) {}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
  return ops::batch_norm2d(x, weight_, bias_, running_mean_, running_var_, {mode == Mode::train && !frozen_, momentum_, eps_});
}

template <typename T>
void BatchNorm2d<T>::collect(const std::string& prefix, StateList<T>& out) const {
  out.push_back({prefix + "weight", weight_, true, InitRule::ones});
  out.push_back({prefix + "bias", bias_, true, InitRule::zeros});
  out.push_back({prefix + "running_mean", running_mean_, false, InitRule::zeros});
  out.push_back({prefix + "running_var", running_var_, false, InitRule::ones});
}

template <typename T>
Linear<T>::Linear(std::size_t in_features, std::size_t out_features, bool with_bias)
    : weight_(Shape{out_features, in_features}, true) {
  if (with_bias) bias_ = Tensor<T>(Shape{out_features}, true);
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) const {
  return ops::linear(x, weight_, bias_);
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, StateList<T>& out) const {
  out.push_back({prefix + "weight", weight_, true, InitRule::he_normal});
  if (bias_.defined()) out.push_back({prefix + "bias", bias_, true, InitRule::zeros});
}

template <typename T>
LayerNorm<T>::LayerNorm(std::size_t features, double eps)
    : weight_(Tensor<T>::full(Shape{features}, T(1), true)), bias_(Shape{features}, true), eps_(eps) {}

template <typename T>
Tensor<T> LayerNorm<T>::forward(const Tensor<T>& x) const {
  return ops::layer_norm(x, weight_, bias_, eps_);
}

template <typename T>
void LayerNorm<T>::collect(const std::string& prefix, StateList<T>& out) const {
  out.push_back({prefix + "weight", weight_, true, InitRule::ones});
  out.push_back({prefix + "bias", bias_, true, InitRule::zeros});
}

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;

}  // namespace sliceset
