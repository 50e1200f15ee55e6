#pragma once

#include "dhvton/tensor.hpp"

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dhvton {

// Reverse-mode autodiff over Tensor<T>. Each op appends a node holding its
// output value, shared_ptr edges to its inputs, and a closure that routes the
// node's cotangent into the parents. Graphs are per-expression: once the last
// Var referencing a node goes out of scope the subgraph frees itself.

template <typename T>
struct Node;
template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily by ensure_grad()
  bool requires_grad = false;
  std::vector<NodePtr<T>> parents;
  std::function<void(Node<T>&)> backward_fn;

  void ensure_grad() {
    if ((int64_t)grad.data.size() != value.numel()) grad = Tensor<T>::zeros(value.shape);
  }
};

inline bool& grad_mode_flag() {
  thread_local bool enabled = true;
  return enabled;
}

// RAII guard: ops executed inside record no edges (pure inference).
struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_mode_flag()) { grad_mode_flag() = false; }
  ~NoGradGuard() { grad_mode_flag() = prev; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(NodePtr<T> n) : node_(std::move(n)) {}

  static Var constant(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    return Var(std::move(n));
  }
  static Var leaf(Tensor<T> v, bool requires_grad) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    n->requires_grad = requires_grad;
    return Var(std::move(n));
  }

  bool valid() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  Tensor<T>& grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape; }
  NodePtr<T>& node() { return node_; }
  const NodePtr<T>& node() const { return node_; }

  void zero_grad() {
    node_->ensure_grad();
    std::fill(node_->grad.data.begin(), node_->grad.data.end(), T(0));
  }

  void backward() { backward(Tensor<T>::full(node_->value.shape, T(1))); }

  void backward(const Tensor<T>& seed) {
    if (!node_->requires_grad) return;
    check_same_shape(seed, node_->value, "backward seed");

    // Iterative post-order DFS over the requires_grad subgraph.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> visited;
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
      Node<T>* n = stack.back().first;
      size_t& i = stack.back().second;
      if (i < n->parents.size()) {
        Node<T>* p = n->parents[i++].get();
        if (p->requires_grad && !visited.count(p)) {
          visited.insert(p);
          stack.emplace_back(p, 0);
        }
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }

    node_->ensure_grad();
    for (int64_t i = 0; i < seed.numel(); ++i) node_->grad[i] += seed[i];

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node<T>* n = *it;
      if (!n->backward_fn) continue;
      for (auto& p : n->parents)
        if (p->requires_grad) p->ensure_grad();
      n->backward_fn(*n);
    }
  }

 private:
  NodePtr<T> node_;
};

// Wrap an op result; records edges only when grad mode is on and some input
// needs gradients, otherwise the output is a plain constant.
template <typename T>
Var<T> make_op(Tensor<T> out, std::vector<Var<T>> parents, std::function<void(Node<T>&)> bw) {
  bool record = grad_mode_flag();
  bool any = false;
  if (record)
    for (const auto& p : parents) any = any || p.requires_grad();
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(out);
  if (record && any) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward_fn = std::move(bw);
  }
  return Var<T>(std::move(n));
}

}  // namespace dhvton
