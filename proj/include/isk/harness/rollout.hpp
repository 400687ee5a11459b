#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "isk/harness/agent.hpp"

namespace isk::harness {

// Where actions come from: the model's policy, a uniform-over-unasked
// baseline, or a fixed per-question weight table (corpus frequencies).
struct PolicyDriver {
  PolicySource source = PolicySource::kModel;
  std::vector<real> freq;  // per-question weights, frequency source only
};

// Scalar record of one episode inside a minibatch. Steps taken after an
// early environment finish are not counted; the loss masks keep them out.
struct EpisodeScalars {
  int length = 0;             // counted questions, <= horizon
  bool ended_early = false;   // environment finished before the horizon
  int label = -1;
  std::vector<int> questions;  // length entries
  std::vector<real> ext;       // per-question extrinsic rewards
  std::vector<real> intr;      // per-question intrinsic rewards
  std::vector<real> values;    // pre-question value estimates, length entries
  std::vector<real> levels;    // length+1 reconstruction log-likelihood levels
};

// One batched lockstep rollout on a single persistent tape (episode
// gradients flow through every forward pass). Per-step Vars are [B];
// `active` rows mark the episodes whose step t counted.
struct RolloutBatch {
  std::unique_ptr<Tape> tape;
  std::unique_ptr<Binding> binding;
  int batch = 0;
  int horizon = 0;
  std::vector<Var> logp, entropy, value;  // horizon entries
  std::vector<Var> label_ll, recon_ll;    // horizon entries; label_ll empty
                                          // for label-free tasks
  std::vector<Tensor> active;             // horizon entries of [B]
  std::vector<EpisodeScalars> episodes;   // batch entries
  std::vector<worlds::Example> examples;
  std::vector<TrialHistory> histories;    // final per-episode histories
  // Batch curves at passes 0..horizon for the metrics row.
  std::vector<real> acc_at;        // label tasks; empty otherwise
  std::vector<real> recon_nll_at;  // mean negative reconstruction level
};

// Fresh examples and episode streams are derived from
// (seed, stream, update, episode), so runs replay exactly and thread
// count cannot change any byte.
RolloutBatch rollout_minibatch(const Agent& agent, const ParamStore& store,
                               const ExperimentConfig& cfg,
                               const PolicyDriver& driver, long long update);

// Action choice shared by training, evaluation, and the baselines.
// Model-driven greedy picks the arg-max (lowest id on ties); sampling
// walks the cumulative distribution with one uniform draw. Overridden
// sources always sample. The chosen question is always unasked.
int choose_action(const Tensor& pi, int row, const TrialHistory& h,
                  const PolicyDriver& driver, bool greedy, Rng& rng);

// Reconstruction log-likelihood of one batch row against its example,
// matching the loss ops' arithmetic.
real row_level(const Tensor& fx, int row, const Tensor& x_rows,
               bool bernoulli, real eps_prob);

}  // namespace isk::harness
