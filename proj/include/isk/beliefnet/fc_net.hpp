#pragma once

#include "isk/beliefnet/net.hpp"

namespace isk::beliefnet {

// Fully connected belief network for flat observations. Four shared hidden
// layers (dense -> layer norm -> leaky ReLU, with an additive shortcut:
// a linear projection of the input into the first layer, identity after),
// then four linear heads: reconstruction, label distribution, value, and
// a policy restricted to unasked questions.
struct FcConfig {
  int input_width = 0;    // masked answer table + asked mask
  int hidden = 512;
  int x_size = 0;         // reconstruction width
  int label_count = 0;    // 0: no label head
  int question_count = 0;
  bool bernoulli_x = true;  // sigmoid reconstruction head; raw means otherwise

  void validate() const;
};

class FcNet {
 public:
  // Creates this net's parameters in `store` (fixed, documented order) and
  // initializes them from `rng`.
  FcNet(const FcConfig& cfg, ParamStore& store, Rng& rng);

  // encoded: [B, input_width]; unasked: [B, question_count] with ones on
  // questions still available.
  BeliefOut forward(Tape& t, const Binding& b, Var encoded,
                    const Tensor& unasked) const;

  const FcConfig& config() const { return cfg_; }

 private:
  FcConfig cfg_;
};

}  // namespace isk::beliefnet
