#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "isk/num/tensor.hpp"

namespace isk::num {

class Tape;

// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Record of executed primitive operations in execution order. Reverse-mode
// accumulation replays the record backwards; each node is visited exactly
// once and fan-out gradients accumulate additively. Nodes are immutable
// once created.
class Tape {
 public:
  // Leaf holding a constant (no gradient).
  Var constant(Tensor value);

  // Leaf referencing external storage, e.g. a model parameter. The pointee
  // must outlive the tape and stay unmodified until backward() is done.
  Var input(const Tensor* value);             // no gradient
  Var param(const Tensor* value);             // gradient accumulated

  // Stable for the life of the tape: appending further nodes never moves
  // existing ones, so references may be held across later op calls.
  const Tensor& val(Var v) const;
  bool wants_grad(Var v) const { return node(v).requires_grad; }

  // Gradient of the last backward() root w.r.t. this node. Zero tensor if
  // the node was never reached.
  Tensor grad(Var v) const;

  // Runs reverse-mode accumulation from a scalar root.
  void backward(Var root);

  void clear();
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // --- used by op implementations ---
  using BackFn = std::function<void(Tape&, int self)>;
  Var make(Tensor value, std::vector<Var> parents, BackFn back, const char* op);
  // Gradient accumulator for a parent; nullptr when the parent does not
  // require a gradient (accumulation can be skipped).
  Tensor* grad_sink(Var v);
  const char* op_name(Var v) const { return node(v).op; }

 private:
  struct Node {
    Tensor value;                  // owned value (unused when external set)
    const Tensor* external = nullptr;
    Tensor grad;                   // lazily allocated
    bool grad_live = false;
    bool requires_grad = false;
    BackFn back;
    std::vector<Var> parents;
    const char* op = "";
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  // Deque keeps node references stable as the record grows.
  std::deque<Node> nodes_;
};

}  // namespace isk::num
