#include "eegscreen/nn/autograd.hpp"

#include <unordered_map>
#include <utility>

#include "eegscreen/error.hpp"

namespace eegscreen::nn {

namespace {
thread_local bool t_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }
bool grad_enabled() { return t_grad_enabled; }

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  if (requires_grad) node_->grad = Tensor<T>(node_->value.dims());
}

template <typename T>
void Var<T>::zero_grad() {
  if (node_ && !node_->grad.empty()) node_->grad.fill(T(0));
}

template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward_fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (const auto& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Var<T>(std::move(node));
}

template <typename T>
void backward(const Var<T>& root) {
  if (!root.defined()) throw Error(Errc::ShapeMismatch, "backward on an undefined value");
  if (root.value().size() != 1) throw Error(Errc::ShapeMismatch, "backward needs a scalar root");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS; revisiting a node that is still open means a cycle.
  enum class Mark { Open, Done };
  std::unordered_map<Node<T>*, Mark> marks;
  std::vector<Node<T>*> order;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  marks[root.node().get()] = Mark::Open;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (!parent || !parent->requires_grad) continue;
      const auto it = marks.find(parent);
      if (it == marks.end()) {
        marks[parent] = Mark::Open;
        stack.emplace_back(parent, 0);
      } else if (it->second == Mark::Open) {
        throw Error(Errc::GraphCycle, "computation graph contains a cycle");
      }
    } else {
      marks[node] = Mark::Done;
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node<T>* node : order) {
    const bool leaf = !node->backward_fn;
    if (node->grad.dims() != node->value.dims()) {
      node->grad = Tensor<T>(node->value.dims(), T(0));
    } else if (!leaf) {
      node->grad.fill(T(0));
    }
  }
  root.node()->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

template class Var<float>;
template class Var<double>;
template Var<float> make_op(Tensor<float>, std::vector<Var<float>>, std::function<void(Node<float>&)>);
template Var<double> make_op(Tensor<double>, std::vector<Var<double>>, std::function<void(Node<double>&)>);
template void backward(const Var<float>&);
template void backward(const Var<double>&);

}  // namespace eegscreen::nn
