#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>

#include "sliceset/aggregators.hpp"
#include "sliceset/encoders.hpp"
#include "sliceset/slicing.hpp"
#include "sliceset/volume.hpp"

namespace sliceset {

struct ModelConfig {
  EncoderConfig encoder;
  AggregatorConfig aggregator;
  bool positional = false;
  std::size_t num_slices = 0;  // K; required when positional is enabled
  Axis axis = Axis::sagittal;
  Task task = Task::regression;
};

void validate(const ModelConfig& config);

// Builds a config whose num_slices matches volumes of `extents`.
ModelConfig config_for_extents(ModelConfig config, const Extents& extents);

/// Slice-set network: a shared 2D encoder embeds every slice, a trainable
/// K x d table is added to the embeddings (when enabled), the embeddings are
/// pooled permutation-invariantly, and a linear head predicts.
///
/// State names: encoder.*, positional.table, aggregator.*, head.linear.*,
/// and for regression the buffers head.target_shift / head.target_scale
/// that map the head output back to target units.
template <typename T>
class SliceSetModel {
 public:
  explicit SliceSetModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::size_t embedding_dim() const { return encoder_->embedding_dim(); }
  std::size_t output_dim() const { return config_.task == Task::regression ? 1 : 2; }

  // [N, C, H, W] -> [N, d]
  Tensor<T> encode_slices(const Tensor<T>& slices, Mode mode);
  // [K, d] or [B, K, d]; identity when positional encodings are disabled.
  Tensor<T> add_positional(const Tensor<T>& embeddings) const;
  // [B, K, d] -> [B, aggregated_dim]
  Tensor<T> aggregate(const Tensor<T>& embeddings) const;
  // [B, aggregated_dim] -> [B, output_dim]
  Tensor<T> head(const Tensor<T>& pooled) const;

  // slices holds `batch` volumes of K consecutive slices: [B * K, C, H, W].
  Tensor<T> forward(const Tensor<T>& slices, std::size_t batch, Mode mode);
  Tensor<T> forward(const Volume& volume, Mode mode = Mode::eval);

  SliceStack slice(const Volume& volume) const;

  StateList<T> state() const;
  StateList<T> parameters() const { return trainable_only(state()); }
  std::size_t parameter_count() const;

  Encoder<T>& encoder() { return *encoder_; }
  const Encoder<T>& encoder() const { return *encoder_; }
  Tensor<T>& positional_table() { return positional_; }
  const AttentionAggregator<T>* attention() const { return attention_ ? &*attention_ : nullptr; }

  void set_target_scaling(double shift, double scale);
  double target_shift() const;
  double target_scale() const;

 private:
  ModelConfig config_;
  std::unique_ptr<Encoder<T>> encoder_;
  Tensor<T> positional_;
  MeanAggregator<T> mean_;
  std::optional<AttentionAggregator<T>> attention_;
  Linear<T> head_;
  Tensor<T> target_shift_;
  Tensor<T> target_scale_;
};

extern template class SliceSetModel<float>;
extern template class SliceSetModel<double>;

using Model = SliceSetModel<float>;

}  // namespace sliceset
