#include "isk/harness/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "isk/num/error.hpp"

namespace isk::harness {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  ISK_CHECK(pos == v.size() && !v.empty(),
            "config: key '" << key << "' wants an integer, got '" << v << "'");
  return out;
}

real parse_real(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  ISK_CHECK(pos == v.size() && !v.empty(),
            "config: key '" << key << "' wants a number, got '" << v << "'");
  return static_cast<real>(out);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  ISK_CHECK(false, "config: key '" << key << "' wants 0/1, got '" << v << "'");
  return false;
}

std::string fmt_real(real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
  return buf;
}

}  // namespace

const char* policy_source_name(PolicySource s) {
  switch (s) {
    case PolicySource::kModel: return "none";
    case PolicySource::kRandom: return "random";
    case PolicySource::kFrequency: return "frequency";
  }
  return "?";
}

void ExperimentConfig::apply(const std::string& key, const std::string& value,
                             const std::string& origin) {
  using seekrl::ExtrinsicKind;
  using seekrl::IntrinsicKind;
  if (key == "task") task = value;
  else if (key == "arch") arch = value;
  else if (key == "seed") seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "updates") updates = static_cast<int>(parse_int(key, value));
  else if (key == "minibatch") minibatch = static_cast<int>(parse_int(key, value));
  else if (key == "horizon") hp.horizon = static_cast<int>(parse_int(key, value));
  else if (key == "gamma") hp.gamma = parse_real(key, value);
  else if (key == "lambda") hp.lambda = parse_real(key, value);
  else if (key == "intrinsic_weight") hp.intrinsic_weight = parse_real(key, value);
  else if (key == "entropy_coef") hp.entropy_coef = parse_real(key, value);
  else if (key == "gae_renormalize") hp.gae_renormalize = parse_bool(key, value);
  else if (key == "extrinsic") {
    if (value == "label") rewards.extrinsic = ExtrinsicKind::kLabelLogLik;
    else if (value == "native") rewards.extrinsic = ExtrinsicKind::kEnvNative;
    else if (value == "none") rewards.extrinsic = ExtrinsicKind::kNone;
    else ISK_CHECK(false, "config: extrinsic must be label|native|none, got '"
                              << value << "'");
  } else if (key == "intrinsic") {
    if (value == "bernoulli") rewards.intrinsic = IntrinsicKind::kBernoulliDiff;
    else if (value == "gaussian") rewards.intrinsic = IntrinsicKind::kGaussianDiff;
    else if (value == "none") rewards.intrinsic = IntrinsicKind::kNone;
    else ISK_CHECK(false, "config: intrinsic must be bernoulli|gaussian|none, got '"
                              << value << "'");
  } else if (key == "eps_prob") rewards.eps_prob = parse_real(key, value);
  else if (key == "value_coef") value_coef = parse_real(key, value);
  else if (key == "pred_coef") pred_coef = parse_real(key, value);
  else if (key == "alpha") adam.alpha = parse_real(key, value);
  else if (key == "beta1") adam.beta1 = parse_real(key, value);
  else if (key == "beta2") adam.beta2 = parse_real(key, value);
  else if (key == "adam_eps") adam.eps = parse_real(key, value);
  else if (key == "canvas") canvas = static_cast<int>(parse_int(key, value));
  else if (key == "block") block = static_cast<int>(parse_int(key, value));
  else if (key == "clutter") clutter = static_cast<int>(parse_int(key, value));
  else if (key == "patch") patch = static_cast<int>(parse_int(key, value));
  else if (key == "summary_factor")
    summary_factor = static_cast<int>(parse_int(key, value));
  else if (key == "window") window = static_cast<int>(parse_int(key, value));
  else if (key == "train_begin") train_begin = parse_int(key, value);
  else if (key == "train_end") train_end = parse_int(key, value);
  else if (key == "eval_begin") eval_begin = parse_int(key, value);
  else if (key == "eval_end") eval_end = parse_int(key, value);
  else if (key == "features_csv") features_csv = value;
  else if (key == "hidden") hidden = static_cast<int>(parse_int(key, value));
  else if (key == "lstm") lstm = static_cast<int>(parse_int(key, value));
  else if (key == "base_channels")
    base_channels = static_cast<int>(parse_int(key, value));
  else if (key == "max_channels") max_channels = static_cast<int>(parse_int(key, value));
  else if (key == "depth") depth = static_cast<int>(parse_int(key, value));
  else if (key == "policy_override") {
    if (value == "none") policy_override = PolicySource::kModel;
    else if (value == "random") policy_override = PolicySource::kRandom;
    else if (value == "frequency") policy_override = PolicySource::kFrequency;
    else ISK_CHECK(false, "config: policy_override must be none|random|frequency, "
                          "got '" << value << "'");
  } else if (key == "full_observation") full_observation = parse_bool(key, value);
  else if (key == "eval_episodes")
    eval_episodes = static_cast<int>(parse_int(key, value));
  else if (key == "eval_mode") {
    if (value == "greedy") eval_greedy = true;
    else if (value == "sample") eval_greedy = false;
    else ISK_CHECK(false, "config: eval_mode must be greedy|sample, got '" << value
                                                                           << "'");
  } else if (key == "data_dir") data_dir = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "metrics_every")
    metrics_every = static_cast<int>(parse_int(key, value));
  else if (key == "ckpt_every") ckpt_every = static_cast<int>(parse_int(key, value));
  else if (key == "threads") threads = static_cast<int>(parse_int(key, value));
  else
    ISK_CHECK(false, "config: unknown key '" << key << "' in " << origin);
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text,
                                             const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    ISK_CHECK(eq != std::string::npos, "config: line " << line_no << " of " << origin
                                                       << " is not key=value: '" << s
                                                       << "'");
    cfg.apply(trim(s.substr(0, eq)), trim(s.substr(eq + 1)), origin);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  ISK_CHECK(in.good(), "config: cannot open '" << path << "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path);
}

void ExperimentConfig::validate() const {
  ISK_CHECK(task == "blockworld" || task == "cluttered" || task == "mnist" ||
                task == "hangman" || task == "features",
            "config: unknown task '" << task << "'");
  ISK_CHECK(arch == "fc" || arch == "conv", "config: arch must be fc|conv, got '"
                                                << arch << "'");
  ISK_CHECK(minibatch >= 1, "config: minibatch must be >= 1, got " << minibatch);
  ISK_CHECK(updates >= 0, "config: updates must be >= 0, got " << updates);
  ISK_CHECK(eval_episodes >= 0, "config: eval_episodes must be >= 0");
  ISK_CHECK(metrics_every >= 1, "config: metrics_every must be >= 1");
  ISK_CHECK(ckpt_every >= 0, "config: ckpt_every must be >= 0");
  ISK_CHECK(threads >= 1, "config: threads must be >= 1");
  hp.validate();
  rewards.validate();
}

std::string ExperimentConfig::resolved_data_dir() const {
  if (!data_dir.empty()) return data_dir;
  const char* env = std::getenv("ISK_DATA_DIR");
  return env && *env ? env : "data";
}

std::string ExperimentConfig::canonical() const {
  // Sorted by key; only experiment-defining entries (horizon etc. shape the
  // math; out_dir/threads/cadence do not).
  std::vector<std::pair<std::string, std::string>> kv = {
      {"adam_eps", fmt_real(adam.eps)},
      {"alpha", fmt_real(adam.alpha)},
      {"arch", arch},
      {"base_channels", std::to_string(base_channels)},
      {"beta1", fmt_real(adam.beta1)},
      {"beta2", fmt_real(adam.beta2)},
      {"block", std::to_string(block)},
      {"canvas", std::to_string(canvas)},
      {"clutter", std::to_string(clutter)},
      {"depth", std::to_string(depth)},
      {"entropy_coef", fmt_real(hp.entropy_coef)},
      {"eps_prob", fmt_real(rewards.eps_prob)},
      {"eval_begin", std::to_string(eval_begin)},
      {"eval_end", std::to_string(eval_end)},
      {"extrinsic", rewards.extrinsic == seekrl::ExtrinsicKind::kLabelLogLik ? "label"
       : rewards.extrinsic == seekrl::ExtrinsicKind::kEnvNative              ? "native"
                                                                             : "none"},
      {"features_csv", features_csv},
      {"full_observation", full_observation ? "1" : "0"},
      {"gae_renormalize", hp.gae_renormalize ? "1" : "0"},
      {"gamma", fmt_real(hp.gamma)},
      {"hidden", std::to_string(hidden)},
      {"horizon", std::to_string(hp.horizon)},
      {"intrinsic",
       rewards.intrinsic == seekrl::IntrinsicKind::kBernoulliDiff  ? "bernoulli"
       : rewards.intrinsic == seekrl::IntrinsicKind::kGaussianDiff ? "gaussian"
                                                                   : "none"},
      {"intrinsic_weight", fmt_real(hp.intrinsic_weight)},
      {"lambda", fmt_real(hp.lambda)},
      {"lstm", std::to_string(lstm)},
      {"max_channels", std::to_string(max_channels)},
      {"minibatch", std::to_string(minibatch)},
      {"patch", std::to_string(patch)},
      {"policy_override", policy_source_name(policy_override)},
      {"pred_coef", fmt_real(pred_coef)},
      {"seed", std::to_string(seed)},
      {"summary_factor", std::to_string(summary_factor)},
      {"task", task},
      {"train_begin", std::to_string(train_begin)},
      {"train_end", std::to_string(train_end)},
      {"updates", std::to_string(updates)},
      {"value_coef", fmt_real(value_coef)},
      {"window", std::to_string(window)},
  };
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

uint64_t ExperimentConfig::digest() const {
  const std::string c = canonical();
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char ch : c) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace isk::harness
