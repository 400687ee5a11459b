#include "isk/harness/selftest.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isk/beliefnet/conv_net.hpp"
#include "isk/beliefnet/fc_net.hpp"
#include "isk/harness/train.hpp"
#include "isk/num/grad_check.hpp"
#include "isk/seekrl/losses.hpp"
#include "isk/seekrl/returns.hpp"

namespace isk::harness {
namespace {

using beliefnet::BeliefOut;
using beliefnet::ConvConfig;
using beliefnet::ConvNet;
using beliefnet::FcConfig;
using beliefnet::FcNet;

Tensor rand_tensor(std::vector<int> shape, Rng& rng, real lo, real hi) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i)
    t[i] = lo + (hi - lo) * static_cast<real>(rng.next_double());
  return t;
}

std::optional<std::string> check_fc_gradients() {
  FcConfig cfg;
  cfg.input_width = 6;
  cfg.hidden = 5;
  cfg.x_size = 4;
  cfg.label_count = 3;
  cfg.question_count = 4;
  ParamStore store;
  Rng rng = Rng::derive(2024, {num::kStreamInit});
  FcNet net(cfg, store, rng);

  Rng data = Rng::derive(2024, {num::kStreamData});
  Tensor encoded = rand_tensor({2, 6}, data, -1, 1);
  Tensor unasked = Tensor::full({2, 4}, 1);
  unasked.at(0, 1) = 0;
  Tensor wx = rand_tensor({2, 4}, data, -1, 1);
  Tensor wy = rand_tensor({2, 3}, data, -1, 1);
  Tensor wv = rand_tensor({2}, data, -1, 1);
  Tensor wp = rand_tensor({2, 4}, data, -1, 1);
  wp.at(0, 1) = 0;  // no cotangent on the masked-out question

  std::vector<Tensor*> leaves;
  for (const auto& e : store.entries()) leaves.push_back(e.value.get());
  auto build = [&](Tape& t, const std::vector<Var>& vars) {
    Binding b(store, vars);
    BeliefOut out = net.forward(t, b, t.constant(encoded), unasked);
    Var obj = num::dot_const(t, out.fx, wx);
    obj = num::add(t, obj, num::dot_const(t, out.fy, wy));
    obj = num::add(t, obj, num::dot_const(t, out.value, wv));
    return num::add(t, obj, num::dot_const(t, out.policy, wp));
  };
  Rng check = Rng::derive(2024, {num::kStreamEval});
  real err = num::max_rel_grad_err(leaves, build, check, 2, real(1e-5));
  if (err < real(1e-6)) return std::nullopt;
  return "max relative gradient error " + std::to_string(err);
}

std::optional<std::string> check_conv_gradients() {
  ConvConfig cfg;
  cfg.image_channels = 1;
  cfg.height = 8;
  cfg.width = 8;
  cfg.block = 4;
  cfg.depth = 2;
  cfg.base_channels = 2;
  cfg.max_channels = 4;
  cfg.lstm_width = 6;
  cfg.label_count = 2;
  ParamStore store;
  Rng rng = Rng::derive(2027, {num::kStreamInit});
  ConvNet net(cfg, store, rng);

  Rng data = Rng::derive(2027, {num::kStreamData});
  Tensor stack1 = rand_tensor({1, 2, 8, 8}, data, 0, 1);
  Tensor stack2 = rand_tensor({1, 2, 8, 8}, data, 0, 1);
  Tensor unasked1 = Tensor::full({1, 4}, 1);
  Tensor unasked2 = Tensor::full({1, 4}, 1);
  unasked2.at(0, 2) = 0;
  Tensor wx = rand_tensor({1, 1, 8, 8}, data, -1, 1);
  Tensor wy = rand_tensor({1, 2}, data, -1, 1);
  Tensor wv = rand_tensor({1}, data, -1, 1);
  Tensor wp = rand_tensor({1, 4}, data, -1, 1);
  wp.at(0, 2) = 0;

  std::vector<Tensor*> leaves;
  for (const auto& e : store.entries()) leaves.push_back(e.value.get());
  auto build = [&](Tape& t, const std::vector<Var>& vars) {
    Binding b(store, vars);
    Tensor statement, summary;
    auto s1 = net.forward(t, b, t.constant(stack1), statement, summary,
                          net.initial_state(t, 1), unasked1);
    auto s2 = net.forward(t, b, t.constant(stack2), statement, summary, s1.state,
                          unasked2);
    Var obj = num::dot_const(t, s1.out.value, wv);
    obj = num::add(t, obj, num::dot_const(t, s1.out.policy, wp));
    obj = num::add(t, obj, num::dot_const(t, s2.out.fx, wx));
    obj = num::add(t, obj, num::dot_const(t, s2.out.fy, wy));
    return num::add(t, obj, num::dot_const(t, s2.out.value, wv));
  };
  Rng check = Rng::derive(2027, {num::kStreamEval});
  real err = num::max_rel_grad_err(leaves, build, check, 2, real(1e-5));
  if (err < real(1e-6)) return std::nullopt;
  return "max relative gradient error " + std::to_string(err);
}

std::optional<std::string> check_gae_weight_mass() {
  for (real lambda : {real(0.3), real(0.95)})
    for (bool renorm : {false, true})
      for (int remaining = 1; remaining <= 8; ++remaining) {
        std::vector<real> w = seekrl::gae_weights(remaining, lambda, renorm);
        real mass = 0;
        for (real v : w) mass += v;
        if (mass != real(1))
          return "weight mass " + std::to_string(mass) + " for remaining=" +
                 std::to_string(remaining);
      }
  return std::nullopt;
}

std::optional<std::string> check_gae_limits() {
  const std::vector<real> rewards{real(1), real(-0.5), real(2)};
  const std::vector<real> values{real(0.4), real(-0.2), real(0.9), real(0)};
  seekrl::HyperParams hp;
  hp.gamma = real(0.9);
  hp.horizon = 3;

  hp.lambda = real(1e-12);  // one-step temporal difference
  std::vector<real> adv = seekrl::gae_advantages(rewards, values, hp);
  for (int t = 0; t < 3; ++t) {
    const real td = rewards[static_cast<size_t>(t)] +
                    hp.gamma * values[static_cast<size_t>(t) + 1] -
                    values[static_cast<size_t>(t)];
    if (std::fabs(adv[static_cast<size_t>(t)] - td) > real(1e-8))
      return "lambda->0 step " + std::to_string(t) + " off by " +
             std::to_string(adv[static_cast<size_t>(t)] - td);
  }

  hp.lambda = real(1) - real(1e-12);  // Monte Carlo return
  adv = seekrl::gae_advantages(rewards, values, hp);
  for (int t = 0; t < 3; ++t) {
    real mc = 0, g = 1;
    for (int k = t; k < 3; ++k, g *= hp.gamma) mc += g * rewards[static_cast<size_t>(k)];
    mc -= values[static_cast<size_t>(t)];
    if (std::fabs(adv[static_cast<size_t>(t)] - mc) > real(1e-8))
      return "lambda->1 step " + std::to_string(t) + " off by " +
             std::to_string(adv[static_cast<size_t>(t)] - mc);
  }
  return std::nullopt;
}

std::optional<std::string> check_loss_recomputation() {
  ExperimentConfig cfg;
  cfg.task = "blockworld";
  cfg.arch = "fc";
  cfg.canvas = 32;
  cfg.block = 8;
  cfg.hidden = 16;
  cfg.minibatch = 4;
  cfg.updates = 1;
  cfg.seed = 7;
  cfg.hp.horizon = 3;
  cfg.hp.entropy_coef = real(0.01);
  cfg.hp.intrinsic_weight = real(0.1);
  cfg.rewards.intrinsic = seekrl::IntrinsicKind::kBernoulliDiff;

  Trainer trainer(cfg);
  RolloutBatch roll =
      rollout_minibatch(trainer.agent(), trainer.store(), cfg, trainer.driver(), 0);
  Tape& t = *roll.tape;
  StepTensors steps = advantage_targets(roll, cfg.hp);

  Var policy = seekrl::policy_loss(t, roll.logp, steps.adv, roll.active,
                                   cfg.hp.entropy_coef, roll.entropy);
  Var value = seekrl::td_lambda_loss(t, roll.value, steps.target, roll.active);
  Var pred = seekrl::prediction_loss(t, roll.label_ll, roll.recon_ll,
                                     cfg.hp.intrinsic_weight, roll.active);
  Var total = seekrl::total_loss(t, policy, value, pred, cfg.value_coef, cfg.pred_coef);

  const int B = roll.batch;
  real p_ref = 0, v_ref = 0, f_ref = 0;
  for (int s = 0; s < roll.horizon; ++s) {
    const Tensor& active = roll.active[static_cast<size_t>(s)];
    const Tensor& lp = t.val(roll.logp[static_cast<size_t>(s)]);
    const Tensor& ent = t.val(roll.entropy[static_cast<size_t>(s)]);
    const Tensor& v = t.val(roll.value[static_cast<size_t>(s)]);
    const Tensor& lll = t.val(roll.label_ll[static_cast<size_t>(s)]);
    const Tensor& rll = t.val(roll.recon_ll[static_cast<size_t>(s)]);
    for (int b = 0; b < B; ++b) {
      p_ref -= (lp[b] * steps.adv[static_cast<size_t>(s)][b] +
                cfg.hp.entropy_coef * ent[b]) *
               active[b] / B;
      const real d = v[b] - steps.target[static_cast<size_t>(s)][b];
      v_ref += d * d * active[b] / B;
      f_ref -= (lll[b] + cfg.hp.intrinsic_weight * rll[b]) * active[b] / B;
    }
  }
  const real t_ref = p_ref + cfg.value_coef * v_ref + cfg.pred_coef * f_ref;

  auto close = [](real a, real b) {
    return std::fabs(a - b) <= real(1e-9) * std::max({real(1), std::fabs(a), std::fabs(b)});
  };
  if (!close(t.val(policy)[0], p_ref))
    return "policy loss " + std::to_string(t.val(policy)[0]) + " vs " +
           std::to_string(p_ref);
  if (!close(t.val(value)[0], v_ref))
    return "value loss " + std::to_string(t.val(value)[0]) + " vs " +
           std::to_string(v_ref);
  if (!close(t.val(pred)[0], f_ref))
    return "prediction loss " + std::to_string(t.val(pred)[0]) + " vs " +
           std::to_string(f_ref);
  if (!close(t.val(total)[0], t_ref))
    return "total loss " + std::to_string(t.val(total)[0]) + " vs " +
           std::to_string(t_ref);
  return std::nullopt;
}

}  // namespace

bool selftest(std::ostream& os) {
  struct Check {
    const char* name;
    std::function<std::optional<std::string>()> run;
  };
  const Check checks[] = {
      {"fc-gradients", check_fc_gradients},
      {"conv-gradients", check_conv_gradients},
      {"gae-weight-mass", check_gae_weight_mass},
      {"gae-limits", check_gae_limits},
      {"loss-recomputation", check_loss_recomputation},
  };
  bool ok = true;
  for (const Check& c : checks) {
    std::optional<std::string> err;
    try {
      err = c.run();
    } catch (const std::exception& e) {
      err = std::string("exception: ") + e.what();
    }
    if (err) {
      ok = false;
      os << "FAIL " << c.name << " — " << *err << "\n";
    } else {
      os << "ok   " << c.name << "\n";
    }
  }
  os << (ok ? "selftest passed" : "selftest FAILED") << "\n";
  return ok;
}

}  // namespace isk::harness
