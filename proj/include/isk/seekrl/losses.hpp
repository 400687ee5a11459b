#pragma once

#include <vector>

#include "isk/num/ops.hpp"
#include "isk/num/tape.hpp"
#include "isk/seekrl/types.hpp"

// Loss assembly over a batched episode. Per-step quantities are [B]-shaped
// Vars living on one tape (so gradients flow through every forward pass of
// the episode); advantages, value targets and activity masks are plain
// tensors treated as constants. Losses are averaged over the batch and
// summed over steps; `active` zeroes out steps after an episode ended.

namespace isk::seekrl {

using num::Tape;
using num::Tensor;
using num::Var;

// -(1/B) sum_t <logp[t], adv[t] * active[t]>; with a nonzero entropy
// coefficient, also subtracts (coef/B) sum_t <entropy[t], active[t]>.
// Advantages are constants: no gradient flows through them.
Var policy_loss(Tape& t, const std::vector<Var>& logp,
                const std::vector<Tensor>& adv, const std::vector<Tensor>& active,
                real entropy_coef, const std::vector<Var>& entropy);

// (1/B) sum_t <(V[t] - target[t])^2, active[t]>; targets are constants, so
// gradients flow through the value predictions only.
Var td_lambda_loss(Tape& t, const std::vector<Var>& values,
                   const std::vector<Tensor>& targets,
                   const std::vector<Tensor>& active);

// -(1/B) sum_t <label_ll[t] + w_intrinsic * recon_ll[t], active[t]>.
// Either stream may be empty; snapshots are taken at the post-answer
// histories h_{:t+1}.
Var prediction_loss(Tape& t, const std::vector<Var>& label_ll,
                    const std::vector<Var>& recon_ll, real w_intrinsic,
                    const std::vector<Tensor>& active);

// policy + c_v * value + c_f * prediction.
Var total_loss(Tape& t, Var policy, Var value, Var prediction, real c_v, real c_f);

}  // namespace isk::seekrl
