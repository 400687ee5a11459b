#include "isk/harness/agent.hpp"

#include <numeric>

#include "isk/beliefnet/encode.hpp"
#include "isk/num/error.hpp"
#include "isk/worlds/blockworld.hpp"
#include "isk/worlds/features.hpp"
#include "isk/worlds/hangman.hpp"
#include "isk/worlds/mnist.hpp"

namespace isk::harness {

EnvPair make_envs(const ExperimentConfig& cfg) {
  const std::string dir = cfg.resolved_data_dir();
  EnvPair envs;
  if (cfg.task == "blockworld") {
    std::array<int, 2> sizes{};
    if (cfg.canvas == 64) sizes = {12, 16};
    else if (cfg.canvas == 32) sizes = {6, 8};
    else ISK_CHECK(false, "blockworld canvas must be 32 or 64, got " << cfg.canvas);
    envs.train = std::make_unique<worlds::BlockWorldEnv>(cfg.canvas, sizes, cfg.block);
    envs.eval = std::make_unique<worlds::BlockWorldEnv>(cfg.canvas, sizes, cfg.block);
  } else if (cfg.task == "mnist" || cfg.task == "cluttered") {
    worlds::MnistData train =
        worlds::load_mnist(dir + "/mnist/train-images-idx3-ubyte",
                           dir + "/mnist/train-labels-idx1-ubyte");
    worlds::MnistData test = worlds::load_mnist(dir + "/mnist/test-images-idx3-ubyte",
                                                dir + "/mnist/test-labels-idx1-ubyte");
    const int digit = train.images.shape()[1];
    const bool plain = cfg.task == "mnist";
    const int canvas = plain ? digit : cfg.canvas;
    const int clutter = plain ? 0 : cfg.clutter;
    const int summary = plain ? 0 : cfg.summary_factor;
    envs.train = std::make_unique<worlds::MnistEnv>(std::move(train), canvas,
                                                    cfg.block, clutter, cfg.patch,
                                                    summary);
    envs.eval = std::make_unique<worlds::MnistEnv>(std::move(test), canvas, cfg.block,
                                                   clutter, cfg.patch, summary);
  } else if (cfg.task == "hangman") {
    worlds::Corpus corpus = worlds::load_corpus(dir + "/hangman/corpus.txt");
    envs.train = std::make_unique<worlds::HangmanEnv>(corpus, cfg.window,
                                                      cfg.train_begin, cfg.train_end);
    envs.eval = std::make_unique<worlds::HangmanEnv>(std::move(corpus), cfg.window,
                                                     cfg.eval_begin, cfg.eval_end);
  } else if (cfg.task == "features") {
    ISK_CHECK(!cfg.features_csv.empty(), "features task needs features_csv");
    const std::string path = cfg.features_csv[0] == '/'
                                 ? cfg.features_csv
                                 : dir + "/" + cfg.features_csv;
    worlds::FeatureTable table = worlds::load_feature_csv(path);
    envs.train = std::make_unique<worlds::FeatureEnv>(table);
    envs.eval = std::make_unique<worlds::FeatureEnv>(std::move(table));
  } else {
    ISK_CHECK(false, "unknown task '" << cfg.task << "'");
  }
  ISK_CHECK(cfg.hp.horizon <= envs.train->questions().count(),
            "config: horizon " << cfg.hp.horizon << " exceeds the "
                               << envs.train->questions().count()
                               << " available questions");
  return envs;
}

Agent::Agent(const ExperimentConfig& cfg, const worlds::Environment& env,
             ParamStore& store, Rng& init_rng)
    : env_(&env), full_observation_(cfg.full_observation) {
  bernoulli_ = cfg.task != "features";
  if (cfg.rewards.intrinsic == seekrl::IntrinsicKind::kBernoulliDiff)
    ISK_CHECK(bernoulli_, "config: bernoulli intrinsic reward on a real-vector task");
  if (cfg.rewards.intrinsic == seekrl::IntrinsicKind::kGaussianDiff)
    ISK_CHECK(!bernoulli_, "config: gaussian intrinsic reward on a binary-pixel task");
  if (cfg.rewards.extrinsic == seekrl::ExtrinsicKind::kLabelLogLik)
    ISK_CHECK(env.label_count() > 0, "config: label reward on a label-free task");
  if (cfg.rewards.extrinsic == seekrl::ExtrinsicKind::kEnvNative)
    ISK_CHECK(env.native_reward(), "config: native reward on an environment without one");

  if (cfg.arch == "fc") {
    beliefnet::FcConfig fcfg;
    fcfg.input_width = beliefnet::encode_fc_width(env.questions());
    fcfg.hidden = cfg.hidden;
    const std::vector<int> xs = env.x_shape();
    fcfg.x_size = static_cast<int>(std::accumulate(xs.begin(), xs.end(), 1LL,
                                                   std::multiplies<long long>()));
    fcfg.label_count = env.label_count();
    fcfg.question_count = env.questions().count();
    fcfg.bernoulli_x = bernoulli_;
    fc_.emplace(fcfg, store, init_rng);
  } else {
    const worlds::PixelGeometry* g = env.pixel_geometry();
    ISK_CHECK(g != nullptr,
              "conv architecture needs a pixel task; '" << env.name() << "' is flat");
    beliefnet::ConvConfig ccfg;
    ccfg.image_channels = g->channels;
    ccfg.height = g->height;
    ccfg.width = g->width;
    ccfg.block = g->block;
    ccfg.depth = cfg.depth;
    ccfg.base_channels = cfg.base_channels;
    ccfg.max_channels = cfg.max_channels;
    ccfg.lstm_width = cfg.lstm;
    ccfg.label_count = env.label_count();
    ccfg.bernoulli_x = bernoulli_;
    ccfg.statement_size = env.statement_size();
    ccfg.summary_shape = env.summary_shape();
    conv_.emplace(ccfg, store, init_rng);
  }
}

int Agent::lstm_width() const {
  return conv_ ? conv_->config().lstm_width : 0;
}

num::LstmVars Agent::initial_state(Tape& t, int batch) const {
  ISK_CHECK(conv_.has_value(), "initial_state: the fc agent carries no state");
  return conv_->initial_state(t, batch);
}

Tensor Agent::encode_batch(const std::vector<const TrialHistory*>& hs,
                           const std::vector<const worlds::Example*>& exs) const {
  const int B = static_cast<int>(hs.size());
  if (fc_) {
    if (!full_observation_) return beliefnet::encode_fc_batch(hs);
    const worlds::QuestionSpace& qs = env_->questions();
    const int width = beliefnet::encode_fc_width(qs);
    Tensor out({B, width});
    for (int r = 0; r < B; ++r) {
      real* row = out.data() + static_cast<size_t>(r) * width;
      int off = 0;
      for (int q = 0; q < qs.count(); ++q) {
        Tensor a = env_->observe(*exs[static_cast<size_t>(r)], q).answer;
        for (int i = 0; i < a.size(); ++i) row[off + i] = a[i];
        off += qs.arity_of(q);
      }
      for (int q = 0; q < qs.count(); ++q) row[qs.total_arity() + q] = 1;
    }
    return out;
  }
  const worlds::PixelGeometry& g = *env_->pixel_geometry();
  if (!full_observation_) return beliefnet::encode_image_batch(hs, g);
  const int hw = g.height * g.width;
  Tensor out({B, g.channels + 1, g.height, g.width});
  for (int r = 0; r < B; ++r) {
    const Tensor& x = exs[static_cast<size_t>(r)]->x;
    ISK_CHECK(x.size() == g.channels * hw, "full observation: example size "
                                               << x.size() << " does not match "
                                               << g.channels << "x" << g.height << "x"
                                               << g.width);
    real* dst = out.data() + static_cast<size_t>(r) * (g.channels + 1) * hw;
    for (int i = 0; i < g.channels * hw; ++i) dst[i] = x[i];
    for (int i = 0; i < hw; ++i) dst[g.channels * hw + i] = 1;
  }
  return out;
}

Agent::StepOut Agent::forward(Tape& t, const Binding& b,
                              const std::vector<const TrialHistory*>& hs,
                              const std::vector<const worlds::Example*>& exs,
                              const num::LstmVars* state, bool final_pass) const {
  ISK_CHECK(!hs.empty() && hs.size() == exs.size(),
            "agent forward: " << hs.size() << " histories vs " << exs.size()
                              << " examples");
  const int B = static_cast<int>(hs.size());
  Tensor unasked = beliefnet::unasked_rows(hs);
  if (final_pass) {
    // The closing belief pass never reads the policy; rows that exhausted
    // the catalogue get a placeholder mask so the softmax stays defined.
    const int Q = unasked.row_size();
    for (int r = 0; r < B; ++r) {
      bool any = false;
      for (int q = 0; q < Q && !any; ++q) any = unasked.at(r, q) > 0;
      if (!any)
        for (int q = 0; q < Q; ++q) unasked.at(r, q) = 1;
    }
  }
  Tensor encoded = encode_batch(hs, exs);

  if (fc_) {
    StepOut s;
    s.out = fc_->forward(t, b, t.constant(std::move(encoded)), unasked);
    return s;
  }

  ISK_CHECK(state != nullptr, "agent forward: recurrent net needs an lstm state");
  Tensor statement, summary;
  if (env_->statement_size() > 0) {
    const int S = env_->statement_size();
    statement = Tensor({B, S});
    for (int r = 0; r < B; ++r) {
      const Tensor& s = exs[static_cast<size_t>(r)]->statement;
      ISK_CHECK(s.size() == S, "agent forward: statement size " << s.size()
                                                                << ", expected " << S);
      for (int i = 0; i < S; ++i) statement.at(r, i) = s[i];
    }
  }
  const std::vector<int> ss = env_->summary_shape();
  if (!ss.empty()) {
    summary = Tensor({B, ss[0], ss[1], ss[2]});
    const int per = ss[0] * ss[1] * ss[2];
    for (int r = 0; r < B; ++r) {
      const Tensor& s = exs[static_cast<size_t>(r)]->summary;
      ISK_CHECK(s.size() == per, "agent forward: summary size " << s.size()
                                                                << ", expected " << per);
      for (int i = 0; i < per; ++i) summary[r * per + i] = s[i];
    }
  }

  beliefnet::ConvNet::Step step = conv_->forward(
      t, b, t.constant(std::move(encoded)), statement, summary, *state, unasked);
  return {step.out, step.state};
}

}  // namespace isk::harness
