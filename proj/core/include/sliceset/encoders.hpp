#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sliceset/layers.hpp"

namespace sliceset {

enum class EncoderKind { cnn5, resnet18, resnet50 };

std::string_view encoder_name(EncoderKind kind);
EncoderKind parse_encoder(std::string_view text, std::string_view field = "encoder.kind");

/// 2D slice encoder configuration.
///
/// `width` scales the channel counts; 0 selects the standard width (32 for
/// cnn5, 64 for the residual networks). The embedding size follows from the
/// kind and width: cnn5 always emits 32 features; resnet18 emits 8 * width
/// (512 at standard width) and resnet50 32 * width (2048).
struct EncoderConfig {
  EncoderKind kind = EncoderKind::cnn5;
  std::size_t input_channels = 1;
  std::size_t width = 0;
};

std::size_t resolved_width(const EncoderConfig& config);
std::size_t embedding_dim(const EncoderConfig& config);
// Smallest accepted slice height/width.
std::size_t min_slice_extent(const EncoderConfig& config);

/// Maps [N, C, H, W] slices to [N, d] embeddings. One parameter set serves
/// every slice.
template <typename T>
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual Tensor<T> forward(const Tensor<T>& slices, Mode mode) = 0;
  virtual void collect(const std::string& prefix, StateList<T>& out) const = 0;
  virtual void set_batchnorm_frozen(bool frozen) = 0;

  const EncoderConfig& config() const { return config_; }
  std::size_t embedding_dim() const { return sliceset::embedding_dim(config_); }

 protected:
  explicit Encoder(EncoderConfig config) : config_(config) {}
  void check_input(const Tensor<T>& slices) const;

 private:
  EncoderConfig config_;
};

/// Five blocks of [3x3 conv -> batch norm -> relu -> 2x2 max pool] with
/// channels w, 2w, 4w, 8w, 32, then global average pooling. Odd spatial
/// extents are zero-padded to even before each pool.
template <typename T>
class Cnn5Encoder final : public Encoder<T> {
 public:
  explicit Cnn5Encoder(const EncoderConfig& config);

  Tensor<T> forward(const Tensor<T>& slices, Mode mode) override;
  void collect(const std::string& prefix, StateList<T>& out) const override;
  void set_batchnorm_frozen(bool frozen) override;

 private:
  struct Block {
    Conv2d<T> conv;
    BatchNorm2d<T> bn;
  };
  std::vector<Block> blocks_;
};

/// ResNet-18 (basic blocks 2-2-2-2) or ResNet-50 (bottlenecks 3-4-6-3)
/// without the final fully connected layer; the embedding is the global
/// average pool output. State names follow the torchvision layout
/// (conv1, bn1, layerL.B.conv1, layerL.B.downsample.0, ...).
template <typename T>
class ResNetEncoder final : public Encoder<T> {
 public:
  explicit ResNetEncoder(const EncoderConfig& config);

  Tensor<T> forward(const Tensor<T>& slices, Mode mode) override;
  void collect(const std::string& prefix, StateList<T>& out) const override;
  void set_batchnorm_frozen(bool frozen) override;

 private:
  struct Block {
    Conv2d<T> conv1, conv2, conv3;
    BatchNorm2d<T> bn1, bn2, bn3;
    bool bottleneck = false;
    bool has_downsample = false;
    Conv2d<T> down_conv;
    BatchNorm2d<T> down_bn;
  };
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  std::vector<std::vector<Block>> layers_;
};

template <typename T>
std::unique_ptr<Encoder<T>> make_encoder(const EncoderConfig& config);

}  // namespace sliceset
