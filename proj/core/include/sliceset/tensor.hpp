#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sliceset {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

// One vertex of the dynamic computation graph. Produced by exactly one op
// (or created as a leaf) and never mutated afterwards except for `grad`.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into inputs that require grad.
  std::function<void(Node&)> backward;

  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

}  // namespace detail

// Thread-local switch for graph recording. Evaluation code disables it so
// that forward passes do not retain intermediate buffers.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool enabled);
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Dense row-major tensor with reverse-mode gradient support.
///
/// A Tensor is a cheap handle; copies alias the same storage. Tensors
/// produced by ops are immutable. Leaves (parameters, running statistics)
/// may be written through `mutable_data()`.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Backward = std::function<void(detail::Node<T>&)>;

  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim() const { return shape().size(); }
  std::size_t size(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const T> data() const;
  std::span<T> mutable_data();
  T item() const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool is_leaf() const;
  const char* op_name() const;

  bool has_grad() const;
  std::span<const T> grad() const;
  std::span<T> mutable_grad();
  void zero_grad();

  // Copy of the data without any graph history.
  Tensor detach() const;

  detail::Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node<T>>& node_ptr() const { return node_; }

  // Builds an op output. Records inputs and the backward closure only when
  // recording is enabled and at least one input requires grad.
  static Tensor make_result(Shape shape, std::vector<T> data, const char* op,
                            std::initializer_list<Tensor> inputs, Backward backward);
  static Tensor make_result(Shape shape, std::vector<T> data, const char* op,
                            const std::vector<Tensor>& inputs, Backward backward);

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

/// Topologically ordered record of the operations reachable from a scalar
/// loss. Inputs always precede the operations that consume them.
template <typename T>
class Graph {
 public:
  static Graph build(const Tensor<T>& loss);

  std::size_t size() const { return order_.size(); }
  std::span<detail::Node<T>* const> order() const { return order_; }

  // Seeds d(loss)/d(loss) = 1 and visits every recorded op once in reverse
  // order. Leaf gradients accumulate across calls; interior gradients are
  // reset at the start of each pass.
  void backward();

 private:
  Tensor<T> loss_;
  std::vector<detail::Node<T>*> order_;
};

template <typename T>
void backward(const Tensor<T>& loss) {
  Graph<T>::build(loss).backward();
}

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace sliceset
