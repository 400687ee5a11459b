#pragma once

#include "isk/num/tensor.hpp"

namespace isk::seekrl {

using num::real;

// Discounting / estimator hyperparameters shared by the advantage and
// value-target computations.
struct HyperParams {
  real gamma = real(1.0);        // discount, in (0, 1]
  real lambda = real(0.95);      // k-step mixing weight, in (0, 1)
  int horizon = 1;               // questions per episode (T)
  real intrinsic_weight = real(0);
  real entropy_coef = real(0);
  // Finite-horizon tail handling: false = assign the tail weight
  // lambda^(T-t) to the untruncated Monte Carlo return; true = renormalize
  // the truncated weights to unit mass instead.
  bool gae_renormalize = false;

  void validate() const;
};

enum class ExtrinsicKind { kLabelLogLik, kEnvNative, kNone };
enum class IntrinsicKind { kBernoulliDiff, kGaussianDiff, kNone };

struct RewardSpec {
  ExtrinsicKind extrinsic = ExtrinsicKind::kLabelLogLik;
  IntrinsicKind intrinsic = IntrinsicKind::kNone;
  real eps_prob = real(1e-6);  // floor inside every log of a probability

  void validate() const;
};

}  // namespace isk::seekrl
