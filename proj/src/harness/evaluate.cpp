#include "isk/harness/evaluate.hpp"

#include <algorithm>
#include <cstdio>

#include "isk/num/error.hpp"
#include "isk/seekrl/rewards.hpp"

namespace isk::harness {
namespace {

std::string fmt_real(real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
  return buf;
}

Tensor copy_row(const Tensor& t, int r) {
  const int n = t.row_size();
  Tensor out({n});
  for (int i = 0; i < n; ++i) out[i] = t.at(r, i);
  return out;
}

int argmax_row(const Tensor& m, int row) {
  int best = 0;
  for (int c = 1; c < m.row_size(); ++c)
    if (m.at(row, c) > m.at(row, best)) best = c;
  return best;
}

}  // namespace

real accuracy_of(const Tensor& fy, const std::vector<int>& labels) {
  ISK_CHECK(fy.rows() == static_cast<int>(labels.size()),
            "class belief rows " << fy.rows() << " vs " << labels.size() << " labels");
  int hits = 0;
  for (int b = 0; b < fy.rows(); ++b)
    if (argmax_row(fy, b) == labels[static_cast<size_t>(b)]) ++hits;
  return static_cast<real>(hits) / fy.rows();
}

std::vector<real> wrong_guess_cdf(const std::vector<EvalEpisode>& eps, int max_wrong) {
  ISK_CHECK(max_wrong >= 0, "negative wrong-guess bound");
  std::vector<real> cdf(static_cast<size_t>(max_wrong) + 1, 0);
  if (eps.empty()) return cdf;
  for (const EvalEpisode& ep : eps) {
    if (!ep.ended_early) continue;  // censored: never completed
    for (int w = std::max(ep.wrong, 0); w <= max_wrong; ++w)
      cdf[static_cast<size_t>(w)] += 1;
  }
  for (real& v : cdf) v /= static_cast<real>(eps.size());
  return cdf;
}

EvalReport evaluate(const Agent& agent, const worlds::Environment& env,
                    const ParamStore& store, const ExperimentConfig& cfg,
                    const EvalOptions& opt, std::vector<EvalEpisode>* out_episodes) {
  ISK_CHECK(opt.episodes > 0, "evaluation needs at least one episode");
  ISK_CHECK(opt.chunk > 0, "evaluation chunk must be positive");
  const int T = cfg.hp.horizon;
  const bool labels = env.label_count() > 0;
  const bool native = env.native_reward();
  const bool label_reward = cfg.rewards.extrinsic == seekrl::ExtrinsicKind::kLabelLogLik;
  const bool intrinsic = cfg.rewards.intrinsic != seekrl::IntrinsicKind::kNone;
  const real w_intr = cfg.hp.intrinsic_weight;
  PolicyDriver driver;
  driver.source = opt.source;
  driver.freq = opt.freq;

  EvalReport rep;
  rep.episodes = opt.episodes;
  std::vector<real> acc_sum(static_cast<size_t>(T) + 1, 0);
  std::vector<real> nll_sum(static_cast<size_t>(T) + 1, 0);
  const bool keep = native || out_episodes != nullptr;
  std::vector<EvalEpisode> kept;
  if (keep) kept.reserve(static_cast<size_t>(opt.episodes));

  for (int e0 = 0; e0 < opt.episodes; e0 += opt.chunk) {
    const int B = std::min(opt.chunk, opt.episodes - e0);
    std::vector<EvalEpisode> eps;
    eps.reserve(static_cast<size_t>(B));
    std::vector<Rng> act;
    act.reserve(static_cast<size_t>(B));
    for (int b = 0; b < B; ++b) {
      const auto e = static_cast<uint64_t>(e0 + b);
      Rng ex_rng = Rng::derive(opt.seed, {num::kStreamEval, e, 0});
      eps.emplace_back(&env.questions());
      eps.back().example = env.sample(ex_rng);
      if (labels) eps.back().label = eps.back().example.y;
      act.push_back(Rng::derive(opt.seed, {num::kStreamEval, e, 1}));
    }

    const int x_size = eps[0].example.x.size();
    Tensor x_rows({B, x_size});
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < x_size; ++i)
        x_rows.at(b, i) = eps[static_cast<size_t>(b)].example.x[i];

    std::vector<const TrialHistory*> hs(static_cast<size_t>(B));
    std::vector<const worlds::Example*> exs(static_cast<size_t>(B));
    for (int b = 0; b < B; ++b) {
      hs[static_cast<size_t>(b)] = &eps[static_cast<size_t>(b)].history;
      exs[static_cast<size_t>(b)] = &eps[static_cast<size_t>(b)].example;
    }

    Tensor carry_h, carry_c;
    std::vector<real> cur_level(static_cast<size_t>(B), 0);
    std::vector<int> cur_am(static_cast<size_t>(B), -1);
    std::vector<real> prev_level(static_cast<size_t>(B), 0);
    std::vector<char> done(static_cast<size_t>(B), 0);
    std::vector<char> asked_prev(static_cast<size_t>(B), 0);
    Tensor pi_cur, fy_cur, fx_cur;
    std::vector<real> val_cur(static_cast<size_t>(B), 0);
    bool need_forward = true;

    for (int pass = 0; pass <= T; ++pass) {
      if (need_forward) {
        Tape t;
        Binding bind(t, store);
        num::LstmVars state{};
        if (agent.recurrent())
          state = pass == 0 ? agent.initial_state(t, B)
                            : num::LstmVars{t.constant(carry_h), t.constant(carry_c)};
        Agent::StepOut step = agent.forward(t, bind, hs, exs,
                                            agent.recurrent() ? &state : nullptr,
                                            pass == T);
        if (agent.recurrent()) {
          carry_h = t.val(step.state.h);
          carry_c = t.val(step.state.c);
        }
        const Tensor& fx = t.val(step.out.fx);
        if (opt.record_steps) fx_cur = fx;
        if (labels) fy_cur = t.val(step.out.fy);
        pi_cur = t.val(step.out.policy);
        const Tensor& v = t.val(step.out.value);
        for (int b = 0; b < B; ++b) {
          val_cur[static_cast<size_t>(b)] = v[b];
          cur_level[static_cast<size_t>(b)] =
              row_level(fx, b, x_rows, agent.bernoulli(), cfg.rewards.eps_prob);
          if (labels) cur_am[static_cast<size_t>(b)] = argmax_row(fy_cur, b);
        }
      }

      // Settle the rewards of last pass's questions at the post-answer belief.
      for (int b = 0; b < B; ++b) {
        if (!asked_prev[static_cast<size_t>(b)]) continue;
        asked_prev[static_cast<size_t>(b)] = 0;
        EvalEpisode& ep = eps[static_cast<size_t>(b)];
        const real intr = intrinsic ? w_intr * (cur_level[static_cast<size_t>(b)] -
                                                prev_level[static_cast<size_t>(b)])
                                    : real(0);
        const real ext = label_reward
                             ? seekrl::extrinsic_label_reward(fy_cur, b, ep.label,
                                                              cfg.rewards.eps_prob)
                             : real(0);  // native rewards were added at ask time
        ep.intr_sum += intr;
        ep.ext_sum += ext;
        if (opt.record_steps) {
          EvalStepRecord& rec = ep.steps.back();
          rec.level = cur_level[static_cast<size_t>(b)];
          rec.intr = intr;
          if (label_reward) rec.ext = ext;
          if (labels) rec.fy = copy_row(fy_cur, b);
        }
      }

      for (int b = 0; b < B; ++b) {
        nll_sum[static_cast<size_t>(pass)] += -cur_level[static_cast<size_t>(b)];
        if (labels && cur_am[static_cast<size_t>(b)] == eps[static_cast<size_t>(b)].label)
          acc_sum[static_cast<size_t>(pass)] += 1;
      }

      if (pass == T) break;

      bool stepped = false;
      for (int b = 0; b < B; ++b) {
        if (done[static_cast<size_t>(b)]) continue;
        EvalEpisode& ep = eps[static_cast<size_t>(b)];
        const int q = choose_action(pi_cur, b, ep.history, driver, opt.greedy,
                                    act[static_cast<size_t>(b)]);
        worlds::StepResult res = env.observe(ep.example, q);
        ep.history.add(q, res.answer);
        ep.length = pass + 1;
        if (native) {
          ep.ext_sum += res.reward;
          if (res.reward < 0) ++ep.wrong;
        }
        if (opt.record_steps) {
          EvalStepRecord rec;
          rec.question = q;
          rec.answer = res.answer;
          rec.pi = copy_row(pi_cur, b);
          rec.fx = copy_row(fx_cur, b);
          rec.value = val_cur[static_cast<size_t>(b)];
          if (native) rec.ext = res.reward;
          ep.steps.push_back(std::move(rec));
        }
        prev_level[static_cast<size_t>(b)] = cur_level[static_cast<size_t>(b)];
        asked_prev[static_cast<size_t>(b)] = 1;
        stepped = true;
        std::vector<int> asked;
        asked.reserve(ep.history.pairs().size());
        for (const auto& [qq, aa] : ep.history.pairs()) asked.push_back(qq);
        if (env.finished(ep.example, asked)) {
          done[static_cast<size_t>(b)] = 1;
          ep.ended_early = true;
        }
      }
      need_forward = stepped;
    }

    for (int b = 0; b < B; ++b) {
      EvalEpisode& ep = eps[static_cast<size_t>(b)];
      if (labels) {
        ep.predicted = cur_am[static_cast<size_t>(b)];
        rep.accuracy_final += ep.predicted == ep.label ? 1 : 0;
      }
      rep.ext_mean += ep.ext_sum;
      rep.intr_mean += ep.intr_sum;
      rep.len_mean += ep.length;
      rep.completion_rate += ep.ended_early ? 1 : 0;
      if (keep) kept.push_back(std::move(ep));
    }
  }

  const auto n = static_cast<real>(opt.episodes);
  rep.ext_mean /= n;
  rep.intr_mean /= n;
  rep.len_mean /= n;
  rep.completion_rate /= n;
  if (labels) {
    rep.accuracy_final /= n;
    rep.acc_at.resize(acc_sum.size());
    for (size_t i = 0; i < acc_sum.size(); ++i) rep.acc_at[i] = acc_sum[i] / n;
  }
  rep.recon_nll_at.resize(nll_sum.size());
  for (size_t i = 0; i < nll_sum.size(); ++i) rep.recon_nll_at[i] = nll_sum[i] / n;
  if (native) rep.cdf_wrong = wrong_guess_cdf(kept, T);
  if (out_episodes != nullptr)
    for (EvalEpisode& ep : kept) out_episodes->push_back(std::move(ep));
  return rep;
}

std::string EvalReport::to_csv() const {
  std::string out = "metric,arg,value\n";
  auto row = [&out](const std::string& metric, const std::string& arg, real v) {
    out += metric + "," + arg + "," + fmt_real(v) + "\n";
  };
  row("episodes", "", static_cast<real>(episodes));
  row("ext_mean", "", ext_mean);
  row("intr_mean", "", intr_mean);
  row("len_mean", "", len_mean);
  row("completion_rate", "", completion_rate);
  if (!acc_at.empty()) {
    row("accuracy_final", "", accuracy_final);
    for (size_t i = 0; i < acc_at.size(); ++i)
      row("acc_at", std::to_string(i), acc_at[i]);
  }
  for (size_t i = 0; i < recon_nll_at.size(); ++i)
    row("recon_nll_at", std::to_string(i), recon_nll_at[i]);
  for (size_t i = 0; i < cdf_wrong.size(); ++i)
    row("cdf_wrong", std::to_string(i), cdf_wrong[i]);
  return out;
}

}  // namespace isk::harness
