#pragma once

#include <cstdint>
#include <string>

#include "isk/num/adam.hpp"
#include "isk/seekrl/types.hpp"

namespace isk::harness {

using num::real;

enum class PolicySource { kModel, kRandom, kFrequency };

// Everything that defines a run, parsed from a flat key=value file
// ('#' comments and blank lines allowed; unknown keys rejected). The
// digest covers the experiment-defining keys only, so checkpoints stay
// valid when output paths, thread counts, or logging cadence change.
struct ExperimentConfig {
  // experiment identity
  std::string task = "mnist";  // blockworld | cluttered | mnist | hangman | features
  std::string arch = "conv";   // fc | conv
  uint64_t seed = 1;
  int updates = 1000;
  int minibatch = 100;

  // estimator and rewards
  seekrl::HyperParams hp;       // gamma, lambda, horizon, intrinsic_weight,
                                // entropy_coef, gae_renormalize
  seekrl::RewardSpec rewards;   // extrinsic, intrinsic, eps_prob
  real value_coef = real(0.5);  // c_v
  real pred_coef = real(1.0);   // c_f

  // optimizer
  num::AdamConfig adam;

  // task geometry / data
  int canvas = 28;
  int block = 4;
  int clutter = 0;
  int patch = 8;
  int summary_factor = 0;  // 0 = no summary conditioning
  int window = 16;         // hangman secret length
  long long train_begin = 0, train_end = 900000;    // hangman corpus regions
  long long eval_begin = 900000, eval_end = 1000000;
  std::string features_csv;  // features task input table

  // network
  int hidden = 512;  // fc
  int lstm = 256;    // conv
  int base_channels = 16;
  int max_channels = 128;
  int depth = 0;  // 0 = halvings down to extent 4

  // behavior policy / baselines
  PolicySource policy_override = PolicySource::kModel;
  bool full_observation = false;

  // evaluation defaults
  int eval_episodes = 2000;
  bool eval_greedy = true;

  // io / runtime (excluded from the digest)
  std::string data_dir;  // empty = $ISK_DATA_DIR or "data"
  std::string out_dir = "runs/out";
  int metrics_every = 50;
  int ckpt_every = 0;  // 0 = final checkpoint only
  int threads = 1;

  static ExperimentConfig from_file(const std::string& path);
  // `origin` names the source in error messages.
  static ExperimentConfig from_text(const std::string& text, const std::string& origin);

  void apply(const std::string& key, const std::string& value,
             const std::string& origin);
  void validate() const;

  std::string resolved_data_dir() const;
  // Canonical experiment-defining key=value block (sorted keys, "%.17g"
  // reals) and its FNV-1a 64-bit digest.
  std::string canonical() const;
  uint64_t digest() const;
};

const char* policy_source_name(PolicySource s);

}  // namespace isk::harness
