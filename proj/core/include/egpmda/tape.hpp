#pragma once
// Reverse-mode tape. Operations append nodes in execution order, which is a
// topological order by construction, so the backward sweep is a single
// reverse pass that visits each node exactly once. One tape records one
// forward pass; build a fresh tape per training step.

#include <functional>
#include <stdexcept>
#include <vector>

#include "egpmda/tensor.hpp"

namespace egpmda {

struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  using PullFn = std::function<void(Tape&, int32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Gradient-tracked input (model parameter).
  Var leaf(Tensor value) { return push(std::move(value), true, {}, nullptr); }

  // Input that never needs a gradient (node features, supervision).
  Var constant(Tensor value) { return push(std::move(value), false, {}, nullptr); }

  Var record(Tensor value, std::vector<Var> parents, PullFn pull) {
    bool track = false;
    for (Var p : parents) track = track || node(p).track;
    return push(std::move(value), track, std::move(parents), track ? std::move(pull) : nullptr);
  }

  const Tensor& value(Var v) const { return node(v).value; }

  bool tracks_grad(Var v) const { return node(v).track; }

  // Gradient after backward(); zeros for tracked vars the loss never reached.
  const Tensor& grad(Var v) const {
    const Node& n = node(v);
    if (!n.track) throw std::logic_error("Tape::grad: variable does not track gradients");
    return n.grad;
  }

  Tensor& grad_mut(Var v) { return nodes_[check(v)].grad; }

  // Accumulates d(loss)/d(node) for every tracked node reachable from loss.
  void backward(Var loss) {
    Node& l = nodes_[check(loss)];
    if (!l.value.is_scalar()) throw std::invalid_argument("Tape::backward: loss must be a scalar");
    if (!l.track) throw std::logic_error("Tape::backward: loss does not depend on any tracked input");
    l.grad[0] += 1.0;
    for (int32_t i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.track && n.pull) n.pull(*this, i);
    }
  }

  size_t size() const { return nodes_.size(); }

  const std::vector<Var>& parents(int32_t id) const { return nodes_[static_cast<size_t>(id)].parents; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<Var> parents;
    PullFn pull;
    bool track = false;
  };

  size_t check(Var v) const {
    if (!v.valid() || static_cast<size_t>(v.id) >= nodes_.size())
      throw std::out_of_range("Tape: invalid variable handle");
    return static_cast<size_t>(v.id);
  }

  const Node& node(Var v) const { return nodes_[check(v)]; }

  Var push(Tensor value, bool track, std::vector<Var> parents, PullFn pull) {
    Node n;
    if (track) n.grad = Tensor::zeros(value.shape());
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.pull = std::move(pull);
    n.track = track;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
};

}  // namespace egpmda
