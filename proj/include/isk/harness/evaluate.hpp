#pragma once

#include <string>
#include <vector>

#include "isk/harness/rollout.hpp"

namespace isk::harness {

// One asked question with everything the trace writer needs. Policy and
// value are from the pass that chose the question; class belief, level,
// and rewards are from the pass after the answer arrived.
struct EvalStepRecord {
  int question = -1;
  Tensor answer;
  Tensor pi;       // full policy row at ask time
  Tensor fx;       // reconstruction belief at ask time, flat row
  real value = 0;
  Tensor fy;       // post-answer class belief (empty for label-free tasks)
  real level = 0;  // post-answer reconstruction log-likelihood
  real ext = 0, intr = 0;
};

struct EvalEpisode {
  int label = -1;
  int predicted = -1;  // final-pass arg-max class (label tasks)
  int length = 0;
  bool ended_early = false;
  int wrong = 0;  // native-reward tasks: answers with negative reward
  real ext_sum = 0, intr_sum = 0;
  worlds::Example example;
  TrialHistory history;
  std::vector<EvalStepRecord> steps;  // filled only when record_steps

  explicit EvalEpisode(const worlds::QuestionSpace* qs) : history(qs) {}
};

struct EvalOptions {
  int episodes = 2000;
  bool greedy = true;  // model source only; overrides always sample
  PolicySource source = PolicySource::kModel;
  std::vector<real> freq;  // frequency source weights
  bool record_steps = false;
  uint64_t seed = 1;
  int chunk = 100;  // batch width; any value gives identical results
};

struct EvalReport {
  int episodes = 0;
  real ext_mean = 0, intr_mean = 0;   // per-episode reward sums, averaged
  real len_mean = 0;                  // counted questions per episode
  real completion_rate = 0;           // episodes finished before the horizon
  real accuracy_final = 0;            // label tasks
  std::vector<real> acc_at;           // per-pass accuracy, 0..horizon
  std::vector<real> recon_nll_at;     // per-pass mean reconstruction NLL
  std::vector<real> cdf_wrong;        // native tasks: P(completed with <= w wrong)

  std::string to_csv() const;  // long form: metric,arg,value
};

// Greedy or sampled rollouts of the current parameters on `env` (pure
// observation functions let one agent serve both the train and held-out
// environments). Episodes and action draws derive from
// (seed, eval stream, episode index), so reports are reproducible and
// independent of chunking. Early-finished episodes stop asking; their
// final beliefs carry forward through the remaining passes of the curves.
EvalReport evaluate(const Agent& agent, const worlds::Environment& env,
                    const ParamStore& store, const ExperimentConfig& cfg,
                    const EvalOptions& opt,
                    std::vector<EvalEpisode>* out_episodes = nullptr);

// Aggregation helpers, separated so the plumbing is testable with injected
// beliefs: a one-hot-true class matrix must give accuracy 1 at every pass.
real accuracy_of(const Tensor& fy, const std::vector<int>& labels);
std::vector<real> wrong_guess_cdf(const std::vector<EvalEpisode>& eps, int max_wrong);

}  // namespace isk::harness
