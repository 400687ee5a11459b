#pragma once

#include <vector>

#include "isk/beliefnet/net.hpp"

namespace isk::beliefnet {

// Convolutional belief network for pixel observations, recurrent across
// questions. Bottom-up: a stem convolution at full resolution, then one
// stride-2 convolution per halving down to a small bottleneck, each layer
// followed by layer norm and a leaky ReLU. Conditioning maps (tiled
// statement channels, a coarse summary image) are concatenated to the
// activation whose spatial extent they match. The flattened bottleneck
// drives an LSTM; value and label heads are linear in the LSTM output.
// Top-down: a dense seed reshaped to the bottleneck extent, then one
// transposed convolution per level with the matching bottom-up activation
// concatenated in, ending at input resolution with reconstruction
// channels plus one policy-logit channel. Block sums of the logit channel
// give per-question logits; the policy is a softmax over unasked blocks.
struct ConvConfig {
  int image_channels = 0;  // x channels; the encoded stack adds a mask channel
  int height = 0;
  int width = 0;
  int block = 0;           // question block edge; questions = (H/b)*(W/b)
  int depth = 0;           // stride-2 levels; 0 picks halvings down to extent 4
  int base_channels = 16;  // level l gets min(base << l, max) channels
  int max_channels = 128;
  int lstm_width = 256;
  int label_count = 0;     // 0: no label head
  bool bernoulli_x = true;
  int statement_size = 0;           // tiled at the 4x-downsampled extent
  std::vector<int> summary_shape;   // [1,h,w]; empty: none

  int resolved_depth() const;
  int question_count() const { return (height / block) * (width / block); }
  void validate() const;
};

// Per-question logits by summing a pixel-logit map over non-overlapping
// block x block regions (row-major block order), then a softmax restricted
// to unasked blocks. Exact zeros on asked blocks; a row with every block
// asked is an error.
Var block_policy(Tape& t, Var logit_map, const Tensor& unasked, int block);

class ConvNet {
 public:
  ConvNet(const ConvConfig& cfg, ParamStore& store, Rng& rng);

  struct Step {
    BeliefOut out;
    num::LstmVars state;
  };

  // stack: [B, image_channels+1, H, W] encoded history; statement: [B, S]
  // raw statement rows (empty tensor when unused); summary: [B, 1, h, w]
  // (empty when unused); state: LSTM carry from the previous question;
  // unasked: [B, Q] ones on available questions.
  Step forward(Tape& t, const Binding& b, Var stack, const Tensor& statement,
               const Tensor& summary, num::LstmVars state,
               const Tensor& unasked) const;

  num::LstmVars initial_state(Tape& t, int batch) const;

  const ConvConfig& config() const { return cfg_; }
  // Channel count of the bottom-up activation at a level, conditioning
  // channels included.
  int level_channels(int level) const;

 private:
  ConvConfig cfg_;
  int depth_ = 0;
  std::vector<int> cond_channels_;  // per level, 0..depth
};

}  // namespace isk::beliefnet
