#include "sliceset/model.hpp"

#include "sliceset/errors.hpp"

namespace sliceset {

void validate(const ModelConfig& config) {
  if (config.encoder.input_channels == 0) throw ConfigError("encoder.input_channels: must be positive");
  if (config.positional && config.num_slices == 0) {
    throw ConfigError("num_slices: required when positional encodings are enabled");
  }
}

ModelConfig config_for_extents(ModelConfig config, const Extents& extents) {
  config.num_slices = slice_geometry(extents, config.axis).count;
  return config;
}

template <typename T>
SliceSetModel<T>::SliceSetModel(const ModelConfig& config)
    : config_(config), encoder_(make_encoder<T>(config.encoder)) {
  validate(config_);
  const std::size_t d = encoder_->embedding_dim();
  if (config_.positional) positional_ = Tensor<T>(Shape{config_.num_slices, d}, true);
  if (config_.aggregator.kind == AggregatorKind::attention) {
    attention_.emplace(d, resolved_model_dim(config_.aggregator, d), resolved_ff_dim(config_.aggregator, d));
  }
  head_ = Linear<T>(aggregated_dim(config_.aggregator, d), output_dim());
  if (config_.task == Task::regression) {
    target_shift_ = Tensor<T>(Shape{1});
    target_scale_ = Tensor<T>::full(Shape{1}, T(1));
  }
}

template <typename T>
Tensor<T> SliceSetModel<T>::encode_slices(const Tensor<T>& slices, Mode mode) {
  return encoder_->forward(slices, mode);
}

template <typename T>
Tensor<T> SliceSetModel<T>::add_positional(const Tensor<T>& embeddings) const {
  if (!config_.positional) return embeddings;
  const auto& s = embeddings.shape();
  if (s.size() < 2 || s[s.size() - 2] != config_.num_slices || s.back() != positional_.size(1)) {
    throw ShapeError("positional table is " + shape_string(positional_.shape()) + " but embeddings are " +
                     shape_string(s));
  }
  return ops::add_trailing(embeddings, positional_);
}

template <typename T>
Tensor<T> SliceSetModel<T>::aggregate(const Tensor<T>& embeddings) const {
  if (attention_) return attention_->forward(embeddings);
  return mean_.forward(embeddings);
}

template <typename T>
Tensor<T> SliceSetModel<T>::head(const Tensor<T>& pooled) const {
  auto out = head_.forward(pooled);
  if (config_.task == Task::regression) {
    out = ops::add_scalar(ops::scale(out, static_cast<double>(target_scale_.item())),
                          static_cast<double>(target_shift_.item()));
  }
  return out;
}

template <typename T>
Tensor<T> SliceSetModel<T>::forward(const Tensor<T>& slices, std::size_t batch, Mode mode) {
  if (batch == 0 || slices.dim() != 4 || slices.size(0) % batch != 0) {
    throw ShapeError("forward: " + shape_string(slices.shape()) + " cannot hold " + std::to_string(batch) + " volumes");
  }
  const std::size_t k = slices.size(0) / batch;
  auto embeddings = encode_slices(slices, mode);
  embeddings = ops::reshape(embeddings, Shape{batch, k, embedding_dim()});
  return head(aggregate(add_positional(embeddings)));
}

template <typename T>
SliceStack SliceSetModel<T>::slice(const Volume& volume) const {
  return slice_volume(volume, config_.axis, config_.encoder.input_channels);
}

template <typename T>
Tensor<T> SliceSetModel<T>::forward(const Volume& volume, Mode mode) {
  return forward(to_tensor<T>(slice(volume)), 1, mode);
}

template <typename T>
StateList<T> SliceSetModel<T>::state() const {
  StateList<T> out;
  encoder_->collect("encoder.", out);
  if (config_.positional) out.push_back({"positional.table", positional_, true, InitRule::zeros});
  if (attention_) attention_->collect("aggregator.", out);
  head_.collect("head.linear.", out);
  if (config_.task == Task::regression) {
    out.push_back({"head.target_shift", target_shift_, false, InitRule::zeros});
    out.push_back({"head.target_scale", target_scale_, false, InitRule::ones});
  }
  return out;
}

template <typename T>
std::size_t SliceSetModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : parameters()) n += e.tensor.numel();
  return n;
}

template <typename T>
void SliceSetModel<T>::set_target_scaling(double shift, double scale) {
  if (config_.task != Task::regression) throw ConfigError("target scaling applies to regression models only");
  if (!(scale > 0.0)) throw ConfigError("target scale must be positive");
  target_shift_.mutable_data()[0] = static_cast<T>(shift);
  target_scale_.mutable_data()[0] = static_cast<T>(scale);
}

template <typename T>
double SliceSetModel<T>::target_shift() const {
  return config_.task == Task::regression ? static_cast<double>(target_shift_.item()) : 0.0;
}

template <typename T>
double SliceSetModel<T>::target_scale() const {
  return config_.task == Task::regression ? static_cast<double>(target_scale_.item()) : 1.0;
}

template class SliceSetModel<float>;
template class SliceSetModel<double>;

}  // namespace sliceset
