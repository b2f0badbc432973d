#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace csikd {

using Shape = std::vector<int>;

inline std::int64_t numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// One vertex of the reverse-mode graph. `backward_fn` distributes this
// node's grad into its parents; parents are held by shared_ptr so a loss
// tensor keeps exactly the subgraph it depends on alive.
struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }

  void ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
  }
};

// Value-semantics handle to a graph node. Copying a Tensor aliases the node.
class Tensor {
public:
  Tensor() = default;

  Tensor(Shape shape, std::vector<double> values) {
    if (numel(shape) != static_cast<std::int64_t>(values.size()))
      throw std::invalid_argument("tensor values length " + std::to_string(values.size()) +
                                  " does not match shape " + shape_str(shape));
    node_ = std::make_shared<TensorNode>();
    node_->shape = std::move(shape);
    node_->values = std::move(values);
  }

  static Tensor zeros(Shape shape) {
    return Tensor(std::move(shape), std::vector<double>(), true);
  }

  static Tensor full(Shape shape, double v) {
    Tensor t = zeros(std::move(shape));
    for (double& x : t.values()) x = v;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t size() const { return node_->size(); }
  std::vector<double>& values() { return node_->values; }
  const std::vector<double>& values() const { return node_->values; }
  std::vector<double>& grad() { return node_->grad; }
  const std::vector<double>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }

  Tensor& set_requires_grad(bool v = true) {
    node_->requires_grad = v;
    return *this;
  }

  void zero_grad() { node_->grad.assign(node_->values.size(), 0.0); }

  double item() const {
    if (size() != 1) throw std::invalid_argument("item() on non-scalar tensor");
    return node_->values[0];
  }

  NodePtr node() const { return node_; }

  // Populates gradients of every reachable requires_grad node. Repeated
  // calls accumulate into existing grads.
  void backward() const {
    if (size() != 1)
      throw std::invalid_argument("backward() requires a scalar loss, got " +
                                  shape_str(shape()));
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    topo(node_.get(), seen, order);
    // Interior grads are per-call scratch; only leaf grads accumulate
    // across repeated backward calls.
    for (TensorNode* n : order)
      if (n->backward_fn) n->grad.assign(n->values.size(), 0.0);
    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      TensorNode* n = *it;
      if (n->backward_fn && n->requires_grad) {
        n->ensure_grad();
        n->backward_fn(*n);
      }
    }
  }

private:
  Tensor(Shape shape, std::vector<double>&&, bool) {
    node_ = std::make_shared<TensorNode>();
    node_->values.assign(static_cast<std::size_t>(numel(shape)), 0.0);
    node_->shape = std::move(shape);
  }

  static void topo(TensorNode* n, std::unordered_set<TensorNode*>& seen,
                   std::vector<TensorNode*>& order) {
    // Iterative DFS; graphs from deep models overflow the stack otherwise.
    struct Frame {
      TensorNode* node;
      std::size_t next_parent;
    };
    std::vector<Frame> stack{{n, 0}};
    seen.insert(n);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_parent < f.node->parents.size()) {
        TensorNode* p = f.node->parents[f.next_parent++].get();
        if (seen.insert(p).second) stack.push_back({p, 0});
      } else {
        order.push_back(f.node);
        stack.pop_back();
      }
    }
  }

  NodePtr node_;
};

namespace detail {

// Builds a result node wired into the graph. requires_grad is inherited
// from any parent that wants gradients.
inline Tensor make_op(Shape shape, std::vector<double> values,
                      std::vector<Tensor> parents,
                      std::function<void(TensorNode&)> backward_fn) {
  Tensor out(std::move(shape), std::move(values));
  TensorNode& n = *out.node();
  bool needs = false;
  for (const Tensor& p : parents) {
    n.parents.push_back(p.node());
    needs = needs || p.node()->requires_grad;
  }
  n.requires_grad = needs;
  if (needs) n.backward_fn = std::move(backward_fn);
  return out;
}

}  // namespace detail

}  // namespace csikd
