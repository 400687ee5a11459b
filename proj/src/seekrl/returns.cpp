#include "isk/seekrl/returns.hpp"

#include <cmath>

#include "isk/num/error.hpp"

namespace isk::seekrl {

void HyperParams::validate() const {
  ISK_CHECK(gamma > 0 && gamma <= 1, "gamma must be in (0,1], got " << gamma);
  ISK_CHECK(lambda > 0 && lambda < 1, "lambda must be in (0,1), got " << lambda);
  ISK_CHECK(horizon >= 1, "horizon must be >= 1, got " << horizon);
  ISK_CHECK(intrinsic_weight >= 0,
            "intrinsic weight must be nonnegative, got " << intrinsic_weight);
  ISK_CHECK(entropy_coef >= 0,
            "entropy coefficient must be nonnegative, got " << entropy_coef);
}

void RewardSpec::validate() const {
  ISK_CHECK(extrinsic != ExtrinsicKind::kNone || intrinsic != IntrinsicKind::kNone,
            "at least one reward kind must be active");
  ISK_CHECK(eps_prob > 0 && eps_prob <= real(1e-3),
            "probability floor must be in (0, 1e-3], got " << eps_prob);
}

real k_step_return(const std::vector<real>& rewards, const std::vector<real>& values,
                   real gamma, int t, int k) {
  const int T = static_cast<int>(rewards.size());
  ISK_CHECK(static_cast<int>(values.size()) == T + 1,
            "need " << T + 1 << " values for " << T << " rewards, got "
                    << values.size());
  ISK_CHECK(t >= 0 && t < T, "step " << t << " outside horizon " << T);
  ISK_CHECK(k >= 1 && k <= T - t,
            "k-step return needs 1 <= k <= " << T - t << ", got " << k);
  real acc = 0;
  real disc = 1;
  for (int j = 0; j < k; ++j) {
    acc += disc * rewards[static_cast<size_t>(t + j)];
    disc *= gamma;
  }
  return acc + disc * values[static_cast<size_t>(t + k)];
}

std::vector<real> gae_weights(int remaining, real lambda, bool renormalize) {
  ISK_CHECK(remaining >= 1, "gae_weights: need at least one step, got " << remaining);
  std::vector<real> w(static_cast<size_t>(remaining), real(0));
  if (remaining == 1) {
    w[0] = 1;  // only the Monte Carlo return exists
    return w;
  }
  if (!renormalize) {
    // (1-l) l^(k-1) on the truncated estimates; the Monte Carlo tail takes
    // the leftover mass (algebraically l^(remaining-1)) so the total is
    // exactly one.
    real mass = 0;
    real wk = real(1) - lambda;
    for (int k = 1; k < remaining; ++k) {
      w[static_cast<size_t>(k - 1)] = wk;
      mass += wk;
      wk *= lambda;
    }
    w[static_cast<size_t>(remaining - 1)] = real(1) - mass;
  } else {
    // Spread the mass over the truncated estimates only; the last entry
    // again absorbs the remainder so the total is exactly one.
    const real norm = real(1) - std::pow(lambda, static_cast<real>(remaining - 1));
    real mass = 0;
    real wk = (real(1) - lambda) / norm;
    for (int k = 1; k < remaining - 1; ++k) {
      w[static_cast<size_t>(k - 1)] = wk;
      mass += wk;
      wk *= lambda;
    }
    w[static_cast<size_t>(remaining - 2)] = real(1) - mass;
  }
  return w;
}

namespace {

std::vector<real> advantages_impl(const std::vector<real>& rewards,
                                  const std::vector<real>& values,
                                  const HyperParams& hp) {
  hp.validate();
  const int T = static_cast<int>(rewards.size());
  ISK_CHECK(static_cast<int>(values.size()) == T + 1,
            "need " << T + 1 << " values for " << T << " rewards, got "
                    << values.size());
  std::vector<real> adv(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const int remaining = T - t;
    const std::vector<real> w = gae_weights(remaining, hp.lambda, hp.gae_renormalize);
    real mix = 0;
    for (int k = 1; k < remaining; ++k)
      if (w[static_cast<size_t>(k - 1)] != 0)
        mix += w[static_cast<size_t>(k - 1)] *
               k_step_return(rewards, values, hp.gamma, t, k);
    if (w[static_cast<size_t>(remaining - 1)] != 0) {
      // Monte Carlo return: no bootstrap (terminal value defined as zero).
      const real mc = k_step_return(rewards, values, hp.gamma, t, remaining) -
                      std::pow(hp.gamma, static_cast<real>(remaining)) *
                          values[static_cast<size_t>(T)];
      mix += w[static_cast<size_t>(remaining - 1)] * mc;
    }
    adv[static_cast<size_t>(t)] = mix - values[static_cast<size_t>(t)];
  }
  return adv;
}

}  // namespace

std::vector<real> gae_advantages(const std::vector<real>& rewards,
                                 const std::vector<real>& values,
                                 const HyperParams& hp) {
  return advantages_impl(rewards, values, hp);
}

std::vector<real> td_lambda_targets(const std::vector<real>& rewards,
                                    const std::vector<real>& values,
                                    const HyperParams& hp) {
  std::vector<real> targets = advantages_impl(rewards, values, hp);
  for (size_t t = 0; t < targets.size(); ++t) targets[t] += values[t];
  return targets;
}

std::vector<real> per_question_intrinsic(const std::vector<real>& levels,
                                         real weight) {
  ISK_CHECK(levels.size() >= 2,
            "need at least two intrinsic levels, got " << levels.size());
  std::vector<real> out(levels.size() - 1);
  for (size_t t = 0; t + 1 < levels.size(); ++t)
    out[t] = weight * (levels[t + 1] - levels[t]);
  return out;
}

}  // namespace isk::seekrl
