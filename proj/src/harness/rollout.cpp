#include "isk/harness/rollout.hpp"

#include <algorithm>

#include "isk/num/error.hpp"
#include "isk/seekrl/rewards.hpp"

namespace isk::harness {

namespace {

// Row r of a batch tensor as a flat [n] tensor.
Tensor slice_row(const Tensor& t, int r) {
  const int n = t.row_size();
  Tensor out({n});
  const real* src = t.data() + static_cast<size_t>(r) * n;
  for (int i = 0; i < n; ++i) out[i] = src[i];
  return out;
}

int lowest_unasked(const TrialHistory& h) {
  for (int q = 0; q < h.questions().count(); ++q)
    if (!h.asked(q)) return q;
  ISK_CHECK(false, "no unasked question left");
  return -1;
}

int argmax_row(const Tensor& pi, int row) {
  const int Q = pi.row_size();
  int best = 0;
  real best_p = pi.at(row, 0);
  for (int q = 1; q < Q; ++q)
    if (pi.at(row, q) > best_p) {
      best_p = pi.at(row, q);
      best = q;
    }
  return best;
}

int sample_cdf(const Tensor& pi, int row, Rng& rng) {
  const int Q = pi.row_size();
  const real u = static_cast<real>(rng.next_double());
  real acc = 0;
  int last_positive = -1;
  for (int q = 0; q < Q; ++q) {
    const real p = pi.at(row, q);
    if (p <= 0) continue;
    last_positive = q;
    acc += p;
    if (u < acc) return q;
  }
  ISK_CHECK(last_positive >= 0, "policy row " << row << " has no positive entry");
  return last_positive;  // u landed in the rounding residue past the last mass
}

}  // namespace

int choose_action(const Tensor& pi, int row, const TrialHistory& h,
                  const PolicyDriver& driver, bool greedy, Rng& rng) {
  const int Q = h.questions().count();
  switch (driver.source) {
    case PolicySource::kModel: {
      const int q = greedy ? argmax_row(pi, row) : sample_cdf(pi, row, rng);
      ISK_CHECK(!h.asked(q), "policy chose already-asked question " << q);
      return q;
    }
    case PolicySource::kRandom: {
      int k = static_cast<int>(rng.uniform_int(h.unasked_count()));
      for (int q = 0; q < Q; ++q)
        if (!h.asked(q) && k-- == 0) return q;
      break;
    }
    case PolicySource::kFrequency: {
      ISK_CHECK(static_cast<int>(driver.freq.size()) == Q,
                "frequency driver has " << driver.freq.size() << " weights for " << Q
                                        << " questions");
      real total = 0;
      for (int q = 0; q < Q; ++q)
        if (!h.asked(q)) total += driver.freq[static_cast<size_t>(q)];
      if (total <= 0) {  // degenerate table: fall back to uniform
        int k = static_cast<int>(rng.uniform_int(h.unasked_count()));
        for (int q = 0; q < Q; ++q)
          if (!h.asked(q) && k-- == 0) return q;
        break;
      }
      const real u = static_cast<real>(rng.next_double()) * total;
      real acc = 0;
      int last = -1;
      for (int q = 0; q < Q; ++q) {
        if (h.asked(q)) continue;
        const real w = driver.freq[static_cast<size_t>(q)];
        if (w <= 0) continue;
        last = q;
        acc += w;
        if (u < acc) return q;
      }
      return last;
    }
  }
  ISK_CHECK(false, "action selection fell through");
  return -1;
}

real row_level(const Tensor& fx, int row, const Tensor& x_rows, bool bernoulli,
               real eps_prob) {
  Tensor f = slice_row(fx, row);
  Tensor x = slice_row(x_rows, row);
  return seekrl::intrinsic_level(f, x,
                                 bernoulli ? seekrl::IntrinsicKind::kBernoulliDiff
                                           : seekrl::IntrinsicKind::kGaussianDiff,
                                 eps_prob);
}

RolloutBatch rollout_minibatch(const Agent& agent, const ParamStore& store,
                               const ExperimentConfig& cfg,
                               const PolicyDriver& driver, long long update) {
  const worlds::Environment& env = agent.env();
  const int B = cfg.minibatch;
  const int T = cfg.hp.horizon;
  const bool labels = env.label_count() > 0;
  const bool native = cfg.rewards.extrinsic == seekrl::ExtrinsicKind::kEnvNative;
  const bool label_reward =
      cfg.rewards.extrinsic == seekrl::ExtrinsicKind::kLabelLogLik;
  const real w_intr = cfg.hp.intrinsic_weight;
  const bool intrinsic = cfg.rewards.intrinsic != seekrl::IntrinsicKind::kNone;

  RolloutBatch out;
  out.batch = B;
  out.horizon = T;
  out.tape = std::make_unique<Tape>();
  out.binding = std::make_unique<Binding>(*out.tape, store);
  Tape& t = *out.tape;
  Binding& bind = *out.binding;

  out.examples.reserve(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b) {
    Rng ex_rng = Rng::derive(cfg.seed, {num::kStreamData,
                                        static_cast<uint64_t>(update),
                                        static_cast<uint64_t>(b)});
    out.examples.push_back(env.sample(ex_rng));
  }
  out.histories.reserve(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b) out.histories.emplace_back(&env.questions());
  std::vector<Rng> act_rng;
  act_rng.reserve(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b)
    act_rng.push_back(Rng::derive(cfg.seed, {num::kStreamActions,
                                             static_cast<uint64_t>(update),
                                             static_cast<uint64_t>(b)}));

  // Reconstruction target rows: each example's x flattened into one row.
  const int x_size = static_cast<int>(out.examples[0].x.size());
  Tensor x_rows({B, x_size});
  std::vector<int> y(static_cast<size_t>(B), 0);
  for (int b = 0; b < B; ++b) {
    const worlds::Example& ex = out.examples[static_cast<size_t>(b)];
    ISK_CHECK(ex.x.size() == x_size, "examples disagree on x size");
    for (int i = 0; i < x_size; ++i) x_rows.at(b, i) = ex.x[i];
    if (labels) {
      ISK_CHECK(ex.y >= 0 && ex.y < env.label_count(),
                "example label " << ex.y << " out of range");
      y[static_cast<size_t>(b)] = ex.y;
    }
  }

  out.episodes.assign(static_cast<size_t>(B), EpisodeScalars{});
  for (int b = 0; b < B; ++b)
    out.episodes[static_cast<size_t>(b)].label =
        labels ? y[static_cast<size_t>(b)] : -1;
  std::vector<char> done(static_cast<size_t>(B), 0);

  std::vector<const TrialHistory*> hs(static_cast<size_t>(B));
  std::vector<const worlds::Example*> exs(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b) {
    hs[static_cast<size_t>(b)] = &out.histories[static_cast<size_t>(b)];
    exs[static_cast<size_t>(b)] = &out.examples[static_cast<size_t>(b)];
  }

  num::LstmVars state{};
  if (agent.recurrent()) state = agent.initial_state(t, B);
  if (labels) out.acc_at.assign(static_cast<size_t>(T) + 1, 0);
  out.recon_nll_at.assign(static_cast<size_t>(T) + 1, 0);

  for (int pass = 0; pass <= T; ++pass) {
    Agent::StepOut step = agent.forward(t, bind, hs, exs,
                                        agent.recurrent() ? &state : nullptr,
                                        pass == T);
    if (agent.recurrent()) state = step.state;
    const Tensor& fx = t.val(step.out.fx);
    const Tensor* fy = labels ? &t.val(step.out.fy) : nullptr;

    if (pass >= 1) {  // prediction terms for question pass-1
      if (labels)
        out.label_ll.push_back(
            num::log_floor(t, num::gather_rows(t, step.out.fy, y),
                           cfg.rewards.eps_prob));
      out.recon_ll.push_back(
          agent.bernoulli()
              ? num::bernoulli_ll_rows(t, step.out.fx, x_rows, cfg.rewards.eps_prob)
              : num::gaussian_ll_rows(t, step.out.fx, x_rows));
    }

    // Levels, rewards, and batch curves at this pass.
    real nll_sum = 0;
    int acc_hits = 0;
    for (int b = 0; b < B; ++b) {
      const real level =
          row_level(fx, b, x_rows, agent.bernoulli(), cfg.rewards.eps_prob);
      nll_sum += -level;
      EpisodeScalars& ep = out.episodes[static_cast<size_t>(b)];
      if (ep.length >= pass) {  // episode counted question pass-1 (or pass==0)
        ep.levels.push_back(level);
        if (pass >= 1) {
          ep.intr.push_back(
              intrinsic
                  ? w_intr * (ep.levels[static_cast<size_t>(pass)] -
                              ep.levels[static_cast<size_t>(pass) - 1])
                  : real(0));
          if (label_reward)
            ep.ext.push_back(seekrl::extrinsic_label_reward(
                *fy, b, y[static_cast<size_t>(b)], cfg.rewards.eps_prob));
        }
      }
      if (labels) {
        int am = 0;
        for (int l = 1; l < env.label_count(); ++l)
          if (fy->at(b, l) > fy->at(b, am)) am = l;
        acc_hits += am == y[static_cast<size_t>(b)] ? 1 : 0;
      }
    }
    if (labels)
      out.acc_at[static_cast<size_t>(pass)] = static_cast<real>(acc_hits) / B;
    out.recon_nll_at[static_cast<size_t>(pass)] = nll_sum / B;

    if (pass == T) break;

    // Ask one question per episode; finished episodes step mechanically.
    out.value.push_back(step.out.value);
    out.entropy.push_back(num::entropy_rows(t, step.out.policy));
    const Tensor& pi = t.val(step.out.policy);
    Tensor active({B});
    std::vector<int> actions(static_cast<size_t>(B), 0);
    for (int b = 0; b < B; ++b) {
      EpisodeScalars& ep = out.episodes[static_cast<size_t>(b)];
      TrialHistory& h = out.histories[static_cast<size_t>(b)];
      const bool live = !done[static_cast<size_t>(b)];
      const int q = live ? choose_action(pi, b, h, driver, false,
                                         act_rng[static_cast<size_t>(b)])
                         : lowest_unasked(h);
      actions[static_cast<size_t>(b)] = q;
      worlds::StepResult res = env.observe(out.examples[static_cast<size_t>(b)], q);
      h.add(q, res.answer);
      if (live) {
        active[b] = 1;
        ep.questions.push_back(q);
        ep.values.push_back(t.val(step.out.value)[b]);
        if (native) ep.ext.push_back(res.reward);
        else if (!label_reward) ep.ext.push_back(0);
        ep.length = pass + 1;
        std::vector<int> asked;
        asked.reserve(ep.questions.size());
        for (const auto& [qq, aa] : h.pairs()) asked.push_back(qq);
        if (env.finished(out.examples[static_cast<size_t>(b)], asked)) {
          done[static_cast<size_t>(b)] = 1;
          ep.ended_early = true;
        }
      }
    }
    out.logp.push_back(num::log_floor(t, num::gather_rows(t, step.out.policy, actions),
                                      cfg.rewards.eps_prob));
    out.active.push_back(std::move(active));
  }

  return out;
}

}  // namespace isk::harness
