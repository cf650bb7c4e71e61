#include "sliceset/encoders.hpp"

#include <array>

#include "sliceset/errors.hpp"

namespace sliceset {

std::string_view encoder_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::cnn5: return "cnn5";
    case EncoderKind::resnet18: return "resnet18";
    case EncoderKind::resnet50: return "resnet50";
  }
  return "unknown";
}

EncoderKind parse_encoder(std::string_view text, std::string_view field) {
  if (text == "cnn5") return EncoderKind::cnn5;
  if (text == "resnet18") return EncoderKind::resnet18;
  if (text == "resnet50") return EncoderKind::resnet50;
  throw ConfigError(std::string(field) + ": unknown encoder '" + std::string(text) +
                    "' (expected cnn5, resnet18 or resnet50)");
}

std::size_t resolved_width(const EncoderConfig& config) {
  if (config.width != 0) return config.width;
  return config.kind == EncoderKind::cnn5 ? 32 : 64;
}

std::size_t embedding_dim(const EncoderConfig& config) {
  switch (config.kind) {
    case EncoderKind::cnn5: return 32;
    case EncoderKind::resnet18: return 8 * resolved_width(config);
    case EncoderKind::resnet50: return 32 * resolved_width(config);
  }
  return 0;
}

std::size_t min_slice_extent(const EncoderConfig& config) { return config.kind == EncoderKind::cnn5 ? 8 : 32; }

template <typename T>
void Encoder<T>::check_input(const Tensor<T>& slices) const {
  if (slices.dim() != 4) throw ShapeError("encoder expects [N, C, H, W] slices, got " + shape_string(slices.shape()));
  if (slices.size(1) != config_.input_channels) {
    throw ShapeError("encoder expects " + std::to_string(config_.input_channels) + " input channels, got " +
                     std::to_string(slices.size(1)));
  }
  const std::size_t minimum = min_slice_extent(config_);
  if (slices.size(2) < minimum || slices.size(3) < minimum) {
    throw ShapeError(std::string(encoder_name(config_.kind)) + " needs slices of at least " + std::to_string(minimum) +
                     "x" + std::to_string(minimum) + ", got " + std::to_string(slices.size(2)) + "x" +
                     std::to_string(slices.size(3)));
  }
}

// ---- cnn5 ------------------------------------------------------------------

template <typename T>
Cnn5Encoder<T>::Cnn5Encoder(const EncoderConfig& config) : Encoder<T>(config) {
  if (config.kind != EncoderKind::cnn5) throw ConfigError("encoder.kind: Cnn5Encoder built with " + std::string(encoder_name(config.kind)));
  const std::size_t w = resolved_width(config);
  const std::array<std::size_t, 5> channels{w, 2 * w, 4 * w, 8 * w, 32};
  std::size_t in = config.input_channels;
  for (auto out : channels) {
    blocks_.push_back({Conv2d<T>(in, out, 3, 1, 1, false), BatchNorm2d<T>(out)});
    in = out;
  }
}

template <typename T>
Tensor<T> Cnn5Encoder<T>::forward(const Tensor<T>& slices, Mode mode) {
  this->check_input(slices);
  Tensor<T> x = slices;
  for (auto& block : blocks_) {
    x = ops::relu(block.bn.forward(block.conv.forward(x), mode));
    const std::size_t pad_h = x.size(2) % 2, pad_w = x.size(3) % 2;
    if (pad_h || pad_w) x = ops::pad2d(x, 0, pad_h, 0, pad_w);
    x = ops::max_pool2d(x, 2, 2);
  }
  return ops::global_avg_pool2d(x);
}

template <typename T>
void Cnn5Encoder<T>::collect(const std::string& prefix, StateList<T>& out) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string name = prefix + "block" + std::to_string(b + 1) + ".";
    blocks_[b].conv.collect(name + "conv.", out);
    blocks_[b].bn.collect(name + "bn.", out);
  }
}

template <typename T>
void Cnn5Encoder<T>::set_batchnorm_frozen(bool frozen) {
  for (auto& block : blocks_) block.bn.set_frozen(frozen);
}

// ---- resnet ----------------------------------------------------------------

template <typename T>
ResNetEncoder<T>::ResNetEncoder(const EncoderConfig& config) : Encoder<T>(config) {
  const bool bottleneck = config.kind == EncoderKind::resnet50;
  if (!bottleneck && config.kind != EncoderKind::resnet18) throw ConfigError("encoder.kind: ResNetEncoder built with cnn5");
  const std::size_t w = resolved_width(config);
  const std::size_t expansion = bottleneck ? 4 : 1;
  const std::array<std::size_t, 4> depth = bottleneck ? std::array<std::size_t, 4>{3, 4, 6, 3}
                                                      : std::array<std::size_t, 4>{2, 2, 2, 2};
  conv1_ = Conv2d<T>(config.input_channels, w, 7, 2, 3, false);
  bn1_ = BatchNorm2d<T>(w);
  std::size_t in = w;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t planes = w << l;
    std::vector<Block> layer;
    for (std::size_t b = 0; b < depth[l]; ++b) {
      const std::size_t stride = (b == 0 && l > 0) ? 2 : 1;
      Block block;
      block.bottleneck = bottleneck;
      if (bottleneck) {
        block.conv1 = Conv2d<T>(in, planes, 1, 1, 0, false);
        block.conv2 = Conv2d<T>(planes, planes, 3, stride, 1, false);
        block.conv3 = Conv2d<T>(planes, planes * expansion, 1, 1, 0, false);
        block.bn3 = BatchNorm2d<T>(planes * expansion);
      } else {
        block.conv1 = Conv2d<T>(in, planes, 3, stride, 1, false);
        block.conv2 = Conv2d<T>(planes, planes, 3, 1, 1, false);
      }
      block.bn1 = BatchNorm2d<T>(planes);
      block.bn2 = BatchNorm2d<T>(planes);
      if (stride != 1 || in != planes * expansion) {
        block.has_downsample = true;
        block.down_conv = Conv2d<T>(in, planes * expansion, 1, stride, 0, false);
        block.down_bn = BatchNorm2d<T>(planes * expansion);
      }
      in = planes * expansion;
      layer.push_back(std::move(block));
    }
    layers_.push_back(std::move(layer));
  }
}

template <typename T>
Tensor<T> ResNetEncoder<T>::forward(const Tensor<T>& slices, Mode mode) {
  this->check_input(slices);
  Tensor<T> x = ops::relu(bn1_.forward(conv1_.forward(slices), mode));
  x = ops::max_pool2d(x, 3, 2, 1);
  for (auto& layer : layers_) {
    for (auto& block : layer) {
      Tensor<T> identity = block.has_downsample ? block.down_bn.forward(block.down_conv.forward(x), mode) : x;
      Tensor<T> y = ops::relu(block.bn1.forward(block.conv1.forward(x), mode));
      y = block.bn2.forward(block.conv2.forward(y), mode);
      if (block.bottleneck) y = block.bn3.forward(block.conv3.forward(ops::relu(y)), mode);
      x = ops::relu(ops::add(y, identity));
    }
  }
  return ops::global_avg_pool2d(x);
}

template <typename T>
void ResNetEncoder<T>::collect(const std::string& prefix, StateList<T>& out) const {
  conv1_.collect(prefix + "conv1.", out);
  bn1_.collect(prefix + "bn1.", out);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    for (std::size_t b = 0; b < layers_[l].size(); ++b) {
      const auto& block = layers_[l][b];
      const std::string name = prefix + "layer" + std::to_string(l + 1) + "." + std::to_string(b) + ".";
      block.conv1.collect(name + "conv1.", out);
      block.bn1.collect(name + "bn1.", out);
      block.conv2.collect(name + "conv2.", out);
      block.bn2.collect(name + "bn2.", out);
      if (block.bottleneck) {
        block.conv3.collect(name + "conv3.", out);
        block.bn3.collect(name + "bn3.", out);
      }
      if (block.has_downsample) {
        block.down_conv.collect(name + "downsample.0.", out);
        block.down_bn.collect(name + "downsample.1.", out);
      }
    }
  }
}

template <typename T>
void ResNetEncoder<T>::set_batchnorm_frozen(bool frozen) {
  bn1_.set_frozen(frozen);
  for (auto& layer : layers_)
    for (auto& block : layer) {
      block.bn1.set_frozen(frozen);
      block.bn2.set_frozen(frozen);
      if (block.bottleneck) block.bn3.set_frozen(frozen);
      if (block.has_downsample) block.down_bn.set_frozen(frozen);
    }
}

template <typename T>
std::unique_ptr<Encoder<T>> make_encoder(const EncoderConfig& config) {
  if (config.input_channels == 0) throw ConfigError("encoder.input_channels: must be positive");
  if (config.kind == EncoderKind::cnn5) return std::make_unique<Cnn5Encoder<T>>(config);
  return std::make_unique<ResNetEncoder<T>>(config);
}

template class Encoder<float>;
template class Encoder<double>;
template class Cnn5Encoder<float>;
template class Cnn5Encoder<double>;
template class ResNetEncoder<float>;
template class ResNetEncoder<double>;
template std::unique_ptr<Encoder<float>> make_encoder<float>(const EncoderConfig&);
template std::unique_ptr<Encoder<double>> make_encoder<double>(const EncoderConfig&);

}  // namespace sliceset
