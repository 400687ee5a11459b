#pragma once

#include <memory>
#include <string>
#include <vector>

#include "isk/num/tensor.hpp"

namespace isk::num {

// Named, ordered collection of trainable tensors. Pointers returned by
// create() stay valid for the lifetime of the store, so tapes can
// reference parameters without copies.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::unique_ptr<Tensor> value;
  };

  Tensor* create(const std::string& name, Tensor init);
  Tensor* find(const std::string& name);  // nullptr when absent
  const std::vector<Entry>& entries() const { return entries_; }
  int count() const { return static_cast<int>(entries_.size()); }
  long long total_size() const;

 private:
  std::vector<Entry> entries_;
};

struct AdamConfig {
  real alpha = real(1e-4);
  real beta1 = real(0.9);
  real beta2 = real(0.999);
  real eps = real(1e-8);
};

// Adam with bias correction. Throws on a non-finite gradient, naming the
// parameter, before any state is modified.
class Adam {
 public:
  Adam(ParamStore& params, AdamConfig cfg);

  // grads[i] must match the shape of params.entries()[i].
  void step(const std::vector<Tensor>& grads);

  long long steps_done() const { return step_; }

  // Checkpoint access: first and second moments per parameter, step count.
  std::vector<Tensor>& moment1() { return m_; }
  std::vector<Tensor>& moment2() { return v_; }
  void restore_steps(long long n) { step_ = n; }

 private:
  ParamStore& params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  long long step_ = 0;
};

}  // namespace isk::num
