#include "sliceset/aggregators.hpp"

#include <cmath>
#include <vector>

#include "sliceset/errors.hpp"

namespace sliceset {

std::string_view aggregator_name(AggregatorKind kind) { return kind == AggregatorKind::mean ? "mean" : "attention"; }

AggregatorKind parse_aggregator(std::string_view text, std::string_view field) {
  if (text == "mean") return AggregatorKind::mean;
  if (text == "attention") return AggregatorKind::attention;
  throw ConfigError(std::string(field) + ": unknown aggregator '" + std::string(text) + "' (expected mean or attention)");
}

std::size_t resolved_model_dim(const AggregatorConfig& config, std::size_t embedding_dim) {
  return config.model_dim ? config.model_dim : embedding_dim;
}

std::size_t resolved_ff_dim(const AggregatorConfig& config, std::size_t embedding_dim) {
  return config.ff_hidden_dim ? config.ff_hidden_dim : 4 * resolved_model_dim(config, embedding_dim);
}

std::size_t aggregated_dim(const AggregatorConfig& config, std::size_t embedding_dim) {
  return config.kind == AggregatorKind::mean ? embedding_dim : resolved_model_dim(config, embedding_dim);
}

template <typename T>
AttentionAggregator<T>::AttentionAggregator(std::size_t embedding_dim, std::size_t model_dim, std::size_t ff_hidden_dim)
    : model_dim_(model_dim),
      proj_(embedding_dim, model_dim),
      ff1_(model_dim, ff_hidden_dim),
      ff2_(ff_hidden_dim, model_dim),
      norm_(model_dim) {}

template <typename T>
Tensor<T> AttentionAggregator<T>::attend(const Tensor<T>& projected) const {
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(model_dim_));
  auto scores = ops::scale(ops::matmul(projected, ops::transpose(projected)), inv_sqrt);
  return ops::softmax(scores, 1);
}

template <typename T>
Tensor<T> AttentionAggregator<T>::attention_weights(const Tensor<T>& embeddings) const {
  if (embeddings.dim() != 2) throw ShapeError("attention_weights expects [K, d]");
  return attend(proj_.forward(embeddings));
}

template <typename T>
Tensor<T> AttentionAggregator<T>::forward(const Tensor<T>& embeddings) const {
  if (embeddings.dim() != 3) throw ShapeError("attention aggregator expects [B, K, d], got " + shape_string(embeddings.shape()));
  const std::size_t batch = embeddings.size(0), slices = embeddings.size(1), d = embeddings.size(2);
  auto projected = proj_.forward(ops::reshape(embeddings, Shape{batch * slices, d}));
  std::vector<Tensor<T>> attended;
  attended.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    auto z = ops::narrow(projected, b * slices, slices);
    attended.push_back(ops::matmul(attend(z), z));
  }
  auto stacked = ops::reshape(ops::concat(attended), Shape{batch, slices, model_dim_});
  auto pooled = ops::mean_rows_canonical(stacked);
  auto hidden = ff2_.forward(ops::relu(ff1_.forward(pooled)));
  return norm_.forward(hidden);
}

template <typename T>
void AttentionAggregator<T>::collect(const std::string& prefix, StateList<T>& out) const {
  proj_.collect(prefix + "proj.", out);
  ff1_.collect(prefix + "ff1.", out);
  ff2_.collect(prefix + "ff2.", out);
  norm_.collect(prefix + "norm.", out);
}

template class AttentionAggregator<float>;
template class AttentionAggregator<double>;

}  // namespace sliceset
