#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "sliceset/layers.hpp"

namespace sliceset {

enum class AggregatorKind { mean, attention };

std::string_view aggregator_name(AggregatorKind kind);
AggregatorKind parse_aggregator(std::string_view text, std::string_view field = "aggregator.kind");

// model_dim == 0 means "embedding size"; ff_hidden_dim == 0 means 4 * model_dim.
struct AggregatorConfig {
  AggregatorKind kind = AggregatorKind::mean;
  std::size_t model_dim = 0;
  std::size_t ff_hidden_dim = 0;
};

std::size_t resolved_model_dim(const AggregatorConfig& config, std::size_t embedding_dim);
std::size_t resolved_ff_dim(const AggregatorConfig& config, std::size_t embedding_dim);
// Width of the aggregated representation fed to the head.
std::size_t aggregated_dim(const AggregatorConfig& config, std::size_t embedding_dim);

/// Arithmetic mean over slices; [B, K, d] -> [B, d]. Bit-identical under
/// slice permutation (contributions are summed in sorted order).
template <typename T>
class MeanAggregator {
 public:
  Tensor<T> forward(const Tensor<T>& embeddings) const { return ops::mean_rows_canonical(embeddings); }
};

/// Single-head self-attention over the K slice embeddings of each volume.
///
///   Z = proj(E)                       (queries = keys = values)
///   A = softmax(Z Z^T / sqrt(m))      row-wise
///   pooled = mean_k (A Z)_k
///   out = layer_norm(ff2(relu(ff1(pooled))))
template <typename T>
class AttentionAggregator {
 public:
  AttentionAggregator(std::size_t embedding_dim, std::size_t model_dim, std::size_t ff_hidden_dim);

  // [B, K, d] -> [B, m]
  Tensor<T> forward(const Tensor<T>& embeddings) const;
  // Attention matrix of one volume, [K, d] -> [K, K].
  Tensor<T> attention_weights(const Tensor<T>& embeddings) const;
  void collect(const std::string& prefix, StateList<T>& out) const;

  std::size_t model_dim() const { return model_dim_; }

 private:
  Tensor<T> attend(const Tensor<T>& projected) const;

  std::size_t model_dim_;
  Linear<T> proj_;
  Linear<T> ff1_;
  Linear<T> ff2_;
  LayerNorm<T> norm_;
};

extern template class AttentionAggregator<float>;
extern template class AttentionAggregator<double>;

}  // namespace sliceset
