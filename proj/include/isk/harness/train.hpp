#pragma once

#include <memory>
#include <string>
#include <vector>

#include "isk/harness/agent.hpp"
#include "isk/harness/rollout.hpp"
#include "isk/num/adam.hpp"

namespace isk::harness {

// One row of training telemetry. Reward means are per-episode sums
// averaged over the minibatch; the curves are batch means at belief
// passes 0..horizon.
struct MetricsRow {
  long long update = 0;  // 1-based count of completed updates
  real loss = 0, policy_loss = 0, value_loss = 0, pred_loss = 0;
  real ext_mean = 0, intr_mean = 0, len_mean = 0;
  std::vector<real> acc_at;        // label tasks only
  std::vector<real> recon_nll_at;  // horizon+1 entries
};

std::string metrics_header(const MetricsRow& row);
std::string metrics_line(const MetricsRow& row);

// Per-episode advantages and value targets scattered into per-step [B]
// tensors (zero where the episode had already ended). The terminal value
// slot is zero: an episode is over after its last question, whether it
// hit the horizon or finished early.
struct StepTensors {
  std::vector<Tensor> adv, target;  // horizon entries of [B]
};
StepTensors advantage_targets(const RolloutBatch& roll, const seekrl::HyperParams& hp);

// Owns the whole training loop: environments, agent, optimizer, metrics,
// checkpoints. Two trainers with the same config produce byte-identical
// metrics files and checkpoints, and resuming from a checkpoint continues
// the exact same trajectory.
class Trainer {
 public:
  explicit Trainer(const ExperimentConfig& cfg);

  // One minibatch update: rollout, losses, backward, Adam. With a policy
  // override the policy-gradient term is dropped (the actions are not the
  // model's) while value and prediction heads still train. A non-finite
  // loss or gradient dumps the offending minibatch as JSONL next to the
  // metrics before rethrowing.
  MetricsRow train_step();

  // Runs until cfg.updates, appending to <out_dir>/metrics.csv every
  // cfg.metrics_every updates (plus the final update) and writing
  // <out_dir>/ckpt_<n>.isk at the ckpt_every cadence and
  // <out_dir>/final.isk at the end.
  void run();

  void save(const std::string& path);
  void resume(const std::string& path);

  const ExperimentConfig& config() const { return cfg_; }
  ParamStore& store() { return store_; }
  num::Adam& optimizer() { return adam_; }
  const Agent& agent() const { return *agent_; }
  const worlds::Environment& train_env() const { return *envs_.train; }
  const worlds::Environment& eval_env() const { return *envs_.eval; }
  const PolicyDriver& driver() const { return driver_; }
  long long updates_done() const { return update_; }
  const std::vector<MetricsRow>& rows() const { return rows_; }

 private:
  void append_metrics(const MetricsRow& row);
  void dump_failure(const RolloutBatch& roll, const std::string& why) const;

  ExperimentConfig cfg_;
  EnvPair envs_;
  ParamStore store_;
  std::unique_ptr<Agent> agent_;
  num::Adam adam_;
  PolicyDriver driver_;
  long long update_ = 0;
  std::vector<MetricsRow> rows_;
};

}  // namespace isk::harness
