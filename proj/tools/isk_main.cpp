#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isk/harness/evaluate.hpp"
#include "isk/harness/selftest.hpp"
#include "isk/harness/trace_io.hpp"
#include "isk/harness/train.hpp"
#include "isk/worlds/pgm.hpp"

namespace {

using namespace isk;
using harness::ExperimentConfig;

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = ExperimentConfig::from_file(path);
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    ISK_CHECK(eq != std::string::npos && eq > 0,
              "override '" << kv << "' is not key=value");
    cfg.apply(kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
  cfg.validate();
  return cfg;
}

harness::EvalOptions eval_options(const ExperimentConfig& cfg) {
  harness::EvalOptions opt;
  opt.episodes = cfg.eval_episodes;
  opt.greedy = cfg.eval_greedy;
  opt.source = cfg.policy_override;
  opt.seed = cfg.seed;
  opt.chunk = cfg.minibatch;
  return opt;
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  if (const auto dir = std::filesystem::path(out).parent_path(); !dir.empty())
    std::filesystem::create_directories(dir);
  std::ofstream os(out, std::ios::trunc);
  ISK_CHECK(os.good(), "cannot write " << out);
  os << text;
}

int run_train(const std::string& config, const std::vector<std::string>& sets,
              const std::string& resume) {
  ExperimentConfig cfg = load_config(config, sets);
  harness::Trainer trainer(cfg);
  if (!resume.empty()) trainer.resume(resume);
  trainer.run();
  std::cout << "trained " << trainer.updates_done() << " updates; checkpoint "
            << cfg.out_dir << "/final.isk\n";
  return 0;
}

int run_eval(const std::string& config, const std::vector<std::string>& sets,
             const std::string& ckpt, int episodes, const std::string& mode,
             const std::string& out) {
  ExperimentConfig cfg = load_config(config, sets);
  harness::Trainer trainer(cfg);
  if (!ckpt.empty()) trainer.resume(ckpt);
  harness::EvalOptions opt = eval_options(cfg);
  if (episodes > 0) opt.episodes = episodes;
  if (!mode.empty()) {
    ISK_CHECK(mode == "greedy" || mode == "sample",
              "eval mode must be greedy or sample, got '" << mode << "'");
    opt.greedy = mode == "greedy";
  }
  opt.freq = trainer.driver().freq;
  harness::EvalReport rep =
      harness::evaluate(trainer.agent(), trainer.eval_env(), trainer.store(), cfg, opt);
  write_or_print(out, rep.to_csv());
  return 0;
}

int run_trace(const std::string& config, const std::vector<std::string>& sets,
              const std::string& ckpt, int episodes, const std::string& out) {
  ExperimentConfig cfg = load_config(config, sets);
  harness::Trainer trainer(cfg);
  if (!ckpt.empty()) trainer.resume(ckpt);
  harness::EvalOptions opt = eval_options(cfg);
  opt.episodes = episodes;
  opt.record_steps = true;
  opt.freq = trainer.driver().freq;
  std::vector<harness::EvalEpisode> eps;
  harness::evaluate(trainer.agent(), trainer.eval_env(), trainer.store(), cfg, opt,
                    &eps);
  harness::write_trace(out, trainer.eval_env(), eps);
  std::cout << "traced " << eps.size() << " episodes to " << out << "\n";
  return 0;
}

int run_gen(const std::string& task, int count, uint64_t seed, const std::string& out,
            int canvas, int block, int clutter, int patch) {
  ISK_CHECK(task == "blockworld" || task == "cluttered",
            "gen supports blockworld and cluttered, got '" << task << "'");
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.canvas = canvas;
  cfg.block = block;
  cfg.clutter = clutter;
  cfg.patch = patch;
  cfg.summary_factor = 0;
  harness::EnvPair envs = harness::make_envs(cfg);
  const worlds::Environment& env = *envs.train;
  const worlds::PixelGeometry* g = env.pixel_geometry();
  ISK_CHECK(g != nullptr, "gen needs a pixel task");

  std::filesystem::create_directories(out);
  std::string labels = "index,label\n";
  for (int i = 0; i < count; ++i) {
    num::Rng rng = num::Rng::derive(seed, {num::kStreamData, static_cast<uint64_t>(i)});
    worlds::Example ex = env.sample(rng);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05d", i);
    num::Tensor img = num::Tensor::from(
        {g->channels, g->height, g->width},
        std::vector<num::real>(ex.x.data(), ex.x.data() + ex.x.size()));
    if (g->channels == 1)
      worlds::save_pgm(out + "/" + name + ".pgm",
                       num::Tensor::from({g->height, g->width},
                                         std::vector<num::real>(
                                             ex.x.data(), ex.x.data() + ex.x.size())));
    else
      worlds::save_pgm_channels(out + "/" + name, img);
    labels += std::to_string(i) + "," + std::to_string(ex.y) + "\n";
  }
  write_or_print(out + "/labels.csv", labels);
  std::cout << "generated " << count << " scenes in " << out << "\n";
  return 0;
}

int run_baseline(const std::string& kind, const std::string& config,
                 const std::vector<std::string>& sets, const std::string& out) {
  ExperimentConfig cfg = load_config(config, sets);
  if (kind == "random") cfg.policy_override = harness::PolicySource::kRandom;
  else if (kind == "freq") cfg.policy_override = harness::PolicySource::kFrequency;
  else if (kind == "full") cfg.full_observation = true;
  else ISK_CHECK(false, "baseline kind must be random, freq, or full, got '" << kind << "'");

  harness::Trainer trainer(cfg);
  trainer.run();
  harness::EvalOptions opt = eval_options(cfg);
  opt.source = cfg.policy_override;
  opt.freq = trainer.driver().freq;
  harness::EvalReport rep =
      harness::evaluate(trainer.agent(), trainer.eval_env(), trainer.store(), cfg, opt);
  write_or_print(out, rep.to_csv());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"information-seeking agent workbench"};
  app.require_subcommand(1);

  std::string config, resume, ckpt, mode, out, task = "blockworld", kind;
  std::vector<std::string> sets;
  int episodes = 0, count = 100, canvas = 32, block = 4, clutter = 8, patch = 8;
  uint64_t seed = 1;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "key=value experiment file")->required();
    cmd->add_option("--set", sets, "override a config key (key=value)");
  };

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_config(train);
  train->add_option("--resume", resume, "checkpoint to continue from");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_config(eval);
  eval->add_option("--ckpt", ckpt, "checkpoint file");
  eval->add_option("--episodes", episodes, "episode count (default: config)");
  eval->add_option("--mode", mode, "greedy | sample");
  eval->add_option("--out", out, "report file (default: stdout)");

  CLI::App* trace = app.add_subcommand("trace", "record step-by-step episodes");
  add_config(trace);
  trace->add_option("--ckpt", ckpt, "checkpoint file");
  trace->add_option("--episodes", episodes, "episodes to trace")->default_val(4);
  trace->add_option("--out", out, "output directory")->required();

  CLI::App* gen = app.add_subcommand("gen", "write scene images and labels");
  gen->add_option("--task", task, "blockworld | cluttered")->required();
  gen->add_option("--count", count, "scene count");
  gen->add_option("--seed", seed, "generation seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--canvas", canvas, "canvas edge");
  gen->add_option("--block", block, "question block edge");
  gen->add_option("--clutter", clutter, "clutter patches (cluttered)");
  gen->add_option("--patch", patch, "clutter patch edge (cluttered)");

  CLI::App* baseline = app.add_subcommand("baseline", "train/evaluate a reference policy");
  baseline->add_option("--kind", kind, "random | freq | full")->required();
  add_config(baseline);
  baseline->add_option("--out", out, "report file (default: stdout)");

  CLI::App* selftest = app.add_subcommand("selftest", "run internal diagnostics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(config, sets, resume);
    if (eval->parsed()) return run_eval(config, sets, ckpt, episodes, mode, out);
    if (trace->parsed()) return run_trace(config, sets, ckpt, episodes, out);
    if (gen->parsed()) return run_gen(task, count, seed, out, canvas, block, clutter, patch);
    if (baseline->parsed()) return run_baseline(kind, config, sets, out);
    if (selftest->parsed()) return harness::selftest(std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
