#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "eegscreen/nn/tensor.hpp"

namespace eegscreen::nn {

// One value in the define-by-run graph. backward_fn reads node.grad and adds
// into the grads of parents that require them.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
};

// Handle to a graph node. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false);
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  const Shape& dims() const { return node_->value.dims(); }
  const Tensor<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  // The optimizer step is the only place parameter values change.
  Tensor<T>& mutable_value() { return node_->value; }
  void zero_grad();

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// While alive on this thread, ops produce constants and record no graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Creates the output node of an op. When grad recording is off or no parent
// needs a gradient the node is a constant and backward_fn is dropped.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward_fn);

// Reverse-mode sweep from a scalar. Leaf gradients accumulate across calls
// (reset with zero_grad); interior gradients are recomputed.
// Throws Error(GraphCycle) if the graph is not a DAG and
// Error(ShapeMismatch) if the root is not a single value.
template <typename T>
void backward(const Var<T>& root);

extern template class Var<float>;
extern template class Var<double>;

}  // namespace eegscreen::nn
