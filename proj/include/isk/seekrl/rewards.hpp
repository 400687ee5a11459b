#pragma once

#include "isk/num/tensor.hpp"
#include "isk/seekrl/types.hpp"

namespace isk::seekrl {

using num::Tensor;

// Floored label log-likelihood: log max(fy[row, y], eps_prob). fy holds one
// class distribution per row.
real extrinsic_label_reward(const Tensor& fy, int row, int y, real eps_prob);

// Reconstruction log-likelihood level of one prediction/target pair,
// matching the differentiable tape ops bit for bit (it is computed by
// them). Bernoulli: sum x*log f + (1-x)*log(1-f), floored; Gaussian:
// -0.5 * sum (x-f)^2.
real intrinsic_level(const Tensor& fx, const Tensor& x, IntrinsicKind kind,
                     real eps_prob);

}  // namespace isk::seekrl
