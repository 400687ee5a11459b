#pragma once

#include <vector>

#include "isk/seekrl/types.hpp"

// Scalar return/advantage estimators for one episode. Conventions
// (0-based step index t over an episode of T questions):
//   rewards[t]  = reward received after asking question t, length T
//   values[t]   = V at the history prefix before question t, length T+1;
//                 values[T] is the post-episode value (0 for terminal)
// All functions are pure and operate on plain reals; gradient flow through
// values is handled by the loss assembly, not here.

namespace isk::seekrl {

// k-step actor-critic return: sum of k discounted rewards from step t plus
// the discounted bootstrap value at t+k. Requires 1 <= k <= T - t.
real k_step_return(const std::vector<real>& rewards, const std::vector<real>& values,
                   real gamma, int t, int k);

// Mixing weights over the k-step estimates available at a step with
// `remaining` rewards left. Entry i < remaining-1 weights the (i+1)-step
// estimate; the last entry weights the Monte Carlo return. The last entry
// absorbs 1 minus the truncated mass, so the total is exactly 1.0.
// Renormalized scheme: mass is spread over the truncated estimates only
// (Monte Carlo fallback when remaining == 1).
std::vector<real> gae_weights(int remaining, real lambda, bool renormalize);

// Advantage per step: a lambda-weighted average of the k-step returns
// minus the step's value. The weights (1-lambda)*lambda^(k-1) for
// k = 1..T-t-1 plus a tail of lambda^(T-t-1) on the Monte Carlo return sum
// to one exactly; with hp.gae_renormalize the truncated weights are
// rescaled to unit mass instead (Monte Carlo fallback at the last step).
std::vector<real> gae_advantages(const std::vector<real>& rewards,
                                 const std::vector<real>& values,
                                 const HyperParams& hp);

// Regression targets for the value function under the same weighting:
// target[t] = values[t] + advantage[t].
std::vector<real> td_lambda_targets(const std::vector<real>& rewards,
                                    const std::vector<real>& values,
                                    const HyperParams& hp);

// Per-question intrinsic rewards from T+1 reconstruction-likelihood
// levels: reward[t] = weight * (levels[t+1] - levels[t]). Their sum
// telescopes to weight * (levels[T] - levels[0]) exactly.
std::vector<real> per_question_intrinsic(const std::vector<real>& levels, real weight);

}  // namespace isk::seekrl
