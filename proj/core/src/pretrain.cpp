#include "sliceset/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sliceset/errors.hpp"
#include "sliceset/init.hpp"
#include "sliceset/transfer.hpp"

namespace sliceset {

namespace {

Tensor<float> image_batch(const ImageDataset& images, std::span<const std::size_t> indices, std::size_t channels) {
  const std::size_t plane = images.height * images.width;
  std::vector<float> data(indices.size() * channels * plane);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const float* src = images.pixels.data() + indices[b] * plane;
    for (std::size_t c = 0; c < channels; ++c) std::copy(src, src + plane, data.begin() + (b * channels + c) * plane);
  }
  return Tensor<float>(Shape{indices.size(), channels, images.height, images.width}, std::move(data));
}

}  // namespace

PretrainResult pretrain_2d(const ImageDataset& images, const PretrainConfig& config) {
  validate(config.optimizer);
  if (images.size() < 2) throw ConfigError("pretrain: need at least two images");
  if (images.pixels.size() != images.size() * images.height * images.width) {
    throw ShapeError("pretrain: pixel buffer does not match the image count and extents");
  }
  if (config.epochs < 1) throw ConfigError("pretrain.epochs: must be at least 1");
  if (config.batch_size < 2) throw ConfigError("pretrain.batch_size: must be at least 2");
  const int max_label = *std::max_element(images.labels.begin(), images.labels.end());
  const int min_label = *std::min_element(images.labels.begin(), images.labels.end());
  if (min_label < 0) throw std::invalid_argument("pretrain: negative label");
  const std::size_t classes = std::max<std::size_t>(2, static_cast<std::size_t>(max_label) + 1);

  auto encoder = make_encoder<float>(config.encoder);
  Linear<float> head(encoder->embedding_dim(), classes);
  StateList<float> state;
  encoder->collect("encoder.", state);
  head.collect("head.linear.", state);
  he_init(state, config.seed);
  Optimizer<float> optimizer(trainable_only(state), config.optimizer);

  const std::size_t channels = config.encoder.input_channels;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);

  PretrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); ++batch_index) {
      std::size_t end = std::min(order.size(), begin + config.batch_size);
      if (order.size() - end == 1) ++end;
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      std::vector<int> labels;
      for (auto i : idx) labels.push_back(images.labels[i]);
      optimizer.zero_grad();
      const auto logits = head.forward(encoder->forward(image_batch(images, idx, channels), Mode::train));
      const auto batch_loss = ops::cross_entropy(logits, std::span<const int>(labels));
      const double value = static_cast<double>(batch_loss.item());
      if (!std::isfinite(value)) {
        throw TrainingDiverged("non-finite pretraining loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index + 1));
      }
      backward(batch_loss);
      optimizer.step();
      loss_sum += value * static_cast<double>(idx.size());
      begin = end;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
  }

  NoGradGuard guard;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < images.size(); begin += config.batch_size) {
    std::vector<std::size_t> idx(std::min(config.batch_size, images.size() - begin));
    std::iota(idx.begin(), idx.end(), begin);
    const auto logits = head.forward(encoder->forward(image_batch(images, idx, channels), Mode::eval));
    const auto y = logits.data();
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto row = y.subspan(b * classes, classes);
      const auto predicted = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += predicted == images.labels[idx[b]] ? 1 : 0;
    }
  }
  result.train_accuracy = static_cast<double>(correct) / static_cast<double>(images.size());

  StateList<float> encoder_state;
  encoder->collect("encoder.", encoder_state);
  result.archive = export_state(encoder_state);
  auto& meta = result.archive.metadata();
  meta["source"] = "pretrain_2d";
  meta["encoder.kind"] = std::string(encoder_name(config.encoder.kind));
  meta["encoder.width"] = std::to_string(resolved_width(config.encoder));
  meta["encoder.input_channels"] = std::to_string(channels);
  return result;
}

}  // namespace sliceset
