#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "isk/beliefnet/conv_net.hpp"
#include "isk/beliefnet/fc_net.hpp"
#include "isk/beliefnet/history.hpp"
#include "isk/harness/config.hpp"
#include "isk/worlds/env.hpp"

namespace isk::harness {

using beliefnet::BeliefOut;
using beliefnet::Binding;
using beliefnet::TrialHistory;
using num::ParamStore;
using num::Rng;
using num::Tape;
using num::Tensor;
using num::Var;

// Builds the training and held-out environments for a config. For MNIST
// tasks the split is the standard file split; BlockWorld and features use
// seed-partitioned streams (the caller draws from distinct stream labels);
// Hangman uses disjoint corpus regions.
struct EnvPair {
  std::unique_ptr<worlds::Environment> train;
  std::unique_ptr<worlds::Environment> eval;
};
EnvPair make_envs(const ExperimentConfig& cfg);

// One belief network behind a uniform stepping interface. The agent builds
// its own input encodings from histories and examples; with
// full_observation set, every answer is visible from the first step (the
// mask is all ones) while the question game itself is unchanged.
class Agent {
 public:
  Agent(const ExperimentConfig& cfg, const worlds::Environment& env,
        ParamStore& store, Rng& init_rng);

  bool recurrent() const { return conv_.has_value(); }
  bool bernoulli() const { return bernoulli_; }
  const worlds::Environment& env() const { return *env_; }

  struct StepOut {
    BeliefOut out;
    num::LstmVars state;  // next carry; meaningful only for recurrent nets
  };

  // One forward pass over the batch at the histories' current state.
  // `state` must be non-null for recurrent nets (use initial_state at t=0).
  // `final_pass` marks the closing belief snapshot, where no question will
  // be chosen: rows with every question asked get a placeholder policy
  // (uniform mask) instead of tripping the empty-softmax error.
  StepOut forward(Tape& t, const Binding& b,
                  const std::vector<const TrialHistory*>& hs,
                  const std::vector<const worlds::Example*>& exs,
                  const num::LstmVars* state, bool final_pass = false) const;

  num::LstmVars initial_state(Tape& t, int batch) const;
  int lstm_width() const;

 private:
  Tensor encode_batch(const std::vector<const TrialHistory*>& hs,
                      const std::vector<const worlds::Example*>& exs) const;

  const worlds::Environment* env_;
  std::optional<beliefnet::FcNet> fc_;
  std::optional<beliefnet::ConvNet> conv_;
  bool full_observation_ = false;
  bool bernoulli_ = true;
};

}  // namespace isk::harness
