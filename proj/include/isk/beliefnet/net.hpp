#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "isk/num/adam.hpp"
#include "isk/num/ops.hpp"
#include "isk/num/rng.hpp"
#include "isk/num/tape.hpp"

namespace isk::beliefnet {

using num::ParamStore;
using num::Rng;
using num::Tape;
using num::Tensor;
using num::Var;
using num::real;

// One tape-leaf per stored parameter, created once per tape so gradients
// from every forward pass of an episode accumulate into a single node.
class Binding {
 public:
  Binding(Tape& t, const ParamStore& store);
  // Adopts already-created leaf Vars, one per store entry in store order
  // (finite-difference checks create the leaves themselves).
  Binding(const ParamStore& store, std::vector<Var> vars);

  Var of(const std::string& name) const;
  const ParamStore& store() const { return *store_; }

  // Gradients in store order, ready for the optimizer; parameters the
  // objective never touched yield zero tensors.
  std::vector<Tensor> grads(const Tape& t) const;

 private:
  const ParamStore* store_;
  std::vector<Var> vars_;
  std::unordered_map<std::string, int> index_;
};

// Belief-state outputs of one forward pass; all probabilities.
struct BeliefOut {
  Var fx;      // reconstruction: Bernoulli probabilities or Gaussian means
  Var fy;      // label distribution [B, L]; invalid when the task is label-free
  Var value;   // [B]
  Var policy;  // [B, Q], exact zeros on asked questions
};

}  // namespace isk::beliefnet
