#include "isk/num/tape.hpp"

#include "isk/num/error.hpp"

namespace isk::num {

const Tape::Node& Tape::node(Var v) const {
  ISK_CHECK(v.id >= 0 && v.id < static_cast<int>(nodes_.size()),
            "invalid tape handle " << v.id);
  return nodes_[static_cast<size_t>(v.id)];
}

Tape::Node& Tape::node(Var v) {
  ISK_CHECK(v.id >= 0 && v.id < static_cast<int>(nodes_.size()),
            "invalid tape handle " << v.id);
  return nodes_[static_cast<size_t>(v.id)];
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(const Tensor* value) {
  ISK_CHECK(value != nullptr, "null input tensor");
  Node n;
  n.external = value;
  n.op = "input";
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(const Tensor* value) {
  ISK_CHECK(value != nullptr, "null parameter tensor");
  Node n;
  n.external = value;
  n.requires_grad = true;
  n.op = "param";
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::val(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad_live) return n.grad;
  return Tensor(val(v).shape());
}

Var Tape::make(Tensor value, std::vector<Var> parents, BackFn back, const char* op) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  for (Var p : n.parents) {
    if (node(p).requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  if (n.requires_grad) n.back = std::move(back);
  n.op = op;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor* Tape::grad_sink(Var v) {
  Node& n = node(v);
  if (!n.requires_grad) return nullptr;
  if (!n.grad_live) {
    n.grad = Tensor(val(v).shape());
    n.grad_live = true;
  }
  return &n.grad;
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  ISK_CHECK(val(root).size() == 1,
            "backward root must be scalar, got shape " << val(root).shape_str());
  ISK_CHECK(r.requires_grad, "backward root does not depend on any parameter");
  Tensor* seed = grad_sink(root);
  (*seed)[0] += real(1);
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.requires_grad || !n.grad_live || !n.back) continue;
    n.back(*this, id);
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace isk::num
