#include "isk/harness/train.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "isk/harness/checkpoint.hpp"
#include "isk/num/parallel.hpp"
#include "isk/seekrl/losses.hpp"
#include "isk/seekrl/returns.hpp"
#include "isk/worlds/hangman.hpp"
#include "json.hpp"

namespace isk::harness {
namespace {

std::string fmt_real(real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
  return buf;
}

const ExperimentConfig& validated(const ExperimentConfig& cfg) {
  cfg.validate();
  return cfg;
}

std::unique_ptr<Agent> build_agent(const ExperimentConfig& cfg,
                                   const worlds::Environment& env, ParamStore& store) {
  Rng init = Rng::derive(cfg.seed, {num::kStreamInit});
  return std::make_unique<Agent>(cfg, env, store, init);
}

PolicyDriver build_driver(const ExperimentConfig& cfg, const worlds::Environment& env) {
  PolicyDriver d;
  d.source = cfg.policy_override;
  if (d.source == PolicySource::kFrequency) {
    const auto* hang = dynamic_cast<const worlds::HangmanEnv*>(&env);
    ISK_CHECK(hang != nullptr,
              "frequency policy override needs per-question frequencies, which only "
              "the hangman task defines");
    std::vector<long long> counts =
        worlds::unigram_counts(hang->corpus(), hang->begin(), hang->end());
    d.freq.assign(counts.begin(), counts.end());
  }
  return d;
}

}  // namespace

std::string metrics_header(const MetricsRow& row) {
  std::string out = "update,loss,policy_loss,value_loss,pred_loss,ext_mean,intr_mean,len_mean";
  for (size_t i = 0; i < row.acc_at.size(); ++i) out += ",acc_at_" + std::to_string(i);
  for (size_t i = 0; i < row.recon_nll_at.size(); ++i)
    out += ",recon_nll_at_" + std::to_string(i);
  return out;
}

std::string metrics_line(const MetricsRow& row) {
  std::string out = std::to_string(row.update);
  for (real v : {row.loss, row.policy_loss, row.value_loss, row.pred_loss, row.ext_mean,
                 row.intr_mean, row.len_mean})
    out += "," + fmt_real(v);
  for (real v : row.acc_at) out += "," + fmt_real(v);
  for (real v : row.recon_nll_at) out += "," + fmt_real(v);
  return out;
}

StepTensors advantage_targets(const RolloutBatch& roll, const seekrl::HyperParams& hp) {
  StepTensors out;
  out.adv.assign(static_cast<size_t>(roll.horizon), Tensor({roll.batch}));
  out.target.assign(static_cast<size_t>(roll.horizon), Tensor({roll.batch}));
  for (int b = 0; b < roll.batch; ++b) {
    const EpisodeScalars& ep = roll.episodes[static_cast<size_t>(b)];
    const int len = ep.length;
    std::vector<real> rewards(static_cast<size_t>(len));
    for (int t = 0; t < len; ++t)
      rewards[static_cast<size_t>(t)] =
          ep.ext[static_cast<size_t>(t)] + ep.intr[static_cast<size_t>(t)];
    std::vector<real> values = ep.values;
    values.push_back(real(0));  // the game is over after the last question
    std::vector<real> adv = seekrl::gae_advantages(rewards, values, hp);
    std::vector<real> target = seekrl::td_lambda_targets(rewards, values, hp);
    for (int t = 0; t < len; ++t) {
      out.adv[static_cast<size_t>(t)][b] = adv[static_cast<size_t>(t)];
      out.target[static_cast<size_t>(t)][b] = target[static_cast<size_t>(t)];
    }
  }
  return out;
}

Trainer::Trainer(const ExperimentConfig& cfg)
    : cfg_(validated(cfg)),
      envs_(make_envs(cfg_)),
      agent_(build_agent(cfg_, *envs_.train, store_)),
      adam_(store_, cfg_.adam),
      driver_(build_driver(cfg_, *envs_.train)) {
  num::set_threads(cfg_.threads);
}

MetricsRow Trainer::train_step() {
  RolloutBatch roll = rollout_minibatch(*agent_, store_, cfg_, driver_, update_);
  Tape& t = *roll.tape;

  StepTensors steps = advantage_targets(roll, cfg_.hp);
  Var policy = driver_.source == PolicySource::kModel
                   ? seekrl::policy_loss(t, roll.logp, steps.adv, roll.active,
                                         cfg_.hp.entropy_coef, roll.entropy)
                   : t.constant(Tensor::scalar(0));
  Var value = seekrl::td_lambda_loss(t, roll.value, steps.target, roll.active);
  Var pred = seekrl::prediction_loss(t, roll.label_ll, roll.recon_ll,
                                     cfg_.hp.intrinsic_weight, roll.active);
  Var total = seekrl::total_loss(t, policy, value, pred, cfg_.value_coef, cfg_.pred_coef);

  MetricsRow row;
  row.update = update_ + 1;
  row.loss = t.val(total)[0];
  row.policy_loss = t.val(policy)[0];
  row.value_loss = t.val(value)[0];
  row.pred_loss = t.val(pred)[0];
  for (const EpisodeScalars& ep : roll.episodes) {
    for (real r : ep.ext) row.ext_mean += r;
    for (real r : ep.intr) row.intr_mean += r;
    row.len_mean += ep.length;
  }
  row.ext_mean /= roll.batch;
  row.intr_mean /= roll.batch;
  row.len_mean /= roll.batch;
  row.acc_at = roll.acc_at;
  row.recon_nll_at = roll.recon_nll_at;

  if (!std::isfinite(row.loss)) {
    dump_failure(roll, "non-finite loss " + fmt_real(row.loss));
    ISK_CHECK(false, "update " << row.update << ": non-finite loss " << row.loss
                               << " (minibatch dumped to " << cfg_.out_dir << ")");
  }

  t.backward(total);
  try {
    adam_.step(roll.binding->grads(t));
  } catch (const std::exception& e) {
    dump_failure(roll, e.what());
    throw;
  }

  ++update_;
  rows_.push_back(row);
  return row;
}

void Trainer::run() {
  std::filesystem::create_directories(cfg_.out_dir);
  while (update_ < cfg_.updates) {
    MetricsRow row = train_step();
    if (update_ % cfg_.metrics_every == 0 || update_ == cfg_.updates)
      append_metrics(row);
    if (cfg_.ckpt_every > 0 && update_ % cfg_.ckpt_every == 0 && update_ < cfg_.updates)
      save(cfg_.out_dir + "/ckpt_" + std::to_string(update_) + ".isk");
  }
  save(cfg_.out_dir + "/final.isk");
}

void Trainer::save(const std::string& path) {
  CheckpointMeta meta;
  meta.update = update_;
  meta.rng_key = cfg_.seed;  // streams re-derive from (seed, update, episode)
  meta.rng_counter = 0;
  save_checkpoint(path, cfg_.digest(), store_, adam_, meta);
}

void Trainer::resume(const std::string& path) {
  CheckpointMeta meta = load_checkpoint(path, cfg_.digest(), store_, adam_);
  update_ = meta.update;
}

void Trainer::append_metrics(const MetricsRow& row) {
  const std::string path = cfg_.out_dir + "/metrics.csv";
  std::error_code ec;
  const bool fresh =
      !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream os(path, std::ios::app);
  ISK_CHECK(os.good(), "cannot append metrics to " << path);
  if (fresh) os << metrics_header(row) << "\n";
  os << metrics_line(row) << "\n";
}

void Trainer::dump_failure(const RolloutBatch& roll, const std::string& why) const {
  std::error_code ec;
  std::filesystem::create_directories(cfg_.out_dir, ec);
  const std::string path =
      cfg_.out_dir + "/failure_update_" + std::to_string(update_ + 1) + ".jsonl";
  std::ofstream os(path);
  if (!os.good()) return;  // best effort: the original error still propagates
  nlohmann::json head{{"update", update_ + 1},
                      {"why", why},
                      {"config_digest", cfg_.digest()},
                      {"batch", roll.batch},
                      {"horizon", roll.horizon}};
  os << head.dump() << "\n";
  for (int b = 0; b < roll.batch; ++b) {
    const EpisodeScalars& ep = roll.episodes[static_cast<size_t>(b)];
    nlohmann::json line{{"episode", b},
                        {"label", ep.label},
                        {"ended_early", ep.ended_early},
                        {"questions", ep.questions},
                        {"ext", ep.ext},
                        {"intr", ep.intr},
                        {"values", ep.values},
                        {"levels", ep.levels}};
    os << line.dump() << "\n";
  }
}

}  // namespace isk::harness
