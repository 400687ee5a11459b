#include "isk/beliefnet/conv_net.hpp"

#include <cmath>
#include <string>

#include "isk/num/error.hpp"
#include "isk/num/init.hpp"

namespace isk::beliefnet {

namespace {

constexpr real kLeakySlope = real(0.01);
constexpr real kLnEps = real(1e-5);
constexpr int kKernel = 3;

std::string level_name(const char* stage, int l, const char* part) {
  return std::string("conv.") + stage + std::to_string(l) + "." + part;
}

Tensor ortho(std::vector<int> shape, Rng& rng, real gain) {
  Tensor w(std::move(shape));
  num::orthogonal_init(w, rng, gain);
  return w;
}

}  // namespace

int ConvConfig::resolved_depth() const {
  if (depth > 0) return depth;
  int d = 0, h = height, w = width;
  while (h % 2 == 0 && w % 2 == 0 && h / 2 >= 4 && w / 2 >= 4) {
    h /= 2;
    w /= 2;
    ++d;
  }
  return d;
}

void ConvConfig::validate() const {
  ISK_CHECK(image_channels > 0, "conv config: image_channels must be positive");
  ISK_CHECK(height > 0 && width > 0, "conv config: height/width must be positive");
  ISK_CHECK(block > 0 && height % block == 0 && width % block == 0,
            "conv config: block " << block << " must tile " << height << "x" << width);
  const int d = resolved_depth();
  ISK_CHECK(d >= 1, "conv config: need at least one stride-2 level, got depth "
                        << d << " for " << height << "x" << width);
  ISK_CHECK(height % (1 << d) == 0 && width % (1 << d) == 0,
            "conv config: depth " << d << " does not divide " << height << "x" << width);
  ISK_CHECK(base_channels > 0 && max_channels >= base_channels,
            "conv config: channel schedule " << base_channels << ".." << max_channels
                                             << " invalid");
  ISK_CHECK(lstm_width > 0, "conv config: lstm_width must be positive");
  ISK_CHECK(label_count >= 0, "conv config: label_count must be >= 0");
  ISK_CHECK(statement_size >= 0, "conv config: statement_size must be >= 0");
  if (statement_size > 0) {
    ISK_CHECK(d >= 2 && height % 4 == 0 && width % 4 == 0 && height == width,
              "conv config: statement conditioning needs a square image with a "
              "4x-downsampled level");
  }
  if (!summary_shape.empty()) {
    ISK_CHECK(summary_shape.size() == 3 && summary_shape[0] >= 1,
              "conv config: summary_shape must be [c,h,w]");
    bool matched = false;
    for (int l = 0; l <= d; ++l)
      matched = matched || (summary_shape[1] == (height >> l) &&
                            summary_shape[2] == (width >> l));
    ISK_CHECK(matched, "conv config: summary extent "
                           << summary_shape[1] << "x" << summary_shape[2]
                           << " matches no level of " << height << "x" << width);
  }
}

Var block_policy(Tape& t, Var logit_map, const Tensor& unasked, int block) {
  Var q_logits = num::block_sum(t, logit_map, block);
  return num::softmax_masked(t, q_logits, unasked);
}

int ConvNet::level_channels(int level) const {
  ISK_CHECK(level >= 0 && level <= depth_, "conv: level " << level << " out of range");
  const int base = std::min(cfg_.base_channels << level, cfg_.max_channels);
  return base + cond_channels_[static_cast<size_t>(level)];
}

ConvNet::ConvNet(const ConvConfig& cfg, ParamStore& store, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  depth_ = cfg_.resolved_depth();

  cond_channels_.assign(static_cast<size_t>(depth_) + 1, 0);
  if (cfg_.statement_size > 0) cond_channels_[2] += cfg_.statement_size;
  if (!cfg_.summary_shape.empty()) {
    for (int l = 0; l <= depth_; ++l)
      if (cfg_.summary_shape[1] == (cfg_.height >> l) &&
          cfg_.summary_shape[2] == (cfg_.width >> l)) {
        cond_channels_[static_cast<size_t>(l)] += cfg_.summary_shape[0];
        break;
      }
  }

  const real g = std::sqrt(real(2));
  auto plain = [&](int level) {
    return std::min(cfg_.base_channels << level, cfg_.max_channels);
  };

  store.create("conv.stem.k",
               ortho({plain(0), cfg_.image_channels + 1, kKernel, kKernel}, rng, g));
  store.create("conv.stem.b", Tensor::zeros({plain(0)}));
  const long long full = static_cast<long long>(plain(0)) * cfg_.height * cfg_.width;
  store.create("conv.stem.ln_g", Tensor::full({static_cast<int>(full)}, real(1)));
  store.create("conv.stem.ln_b", Tensor::zeros({static_cast<int>(full)}));

  for (int l = 1; l <= depth_; ++l) {
    const int ci = level_channels(l - 1);
    const int co = plain(l);
    const int h = cfg_.height >> l, w = cfg_.width >> l;
    store.create(level_name("down", l, "k"), ortho({co, ci, kKernel, kKernel}, rng, g));
    store.create(level_name("down", l, "b"), Tensor::zeros({co}));
    store.create(level_name("down", l, "ln_g"), Tensor::full({co * h * w}, real(1)));
    store.create(level_name("down", l, "ln_b"), Tensor::zeros({co * h * w}));
  }

  const int bh = cfg_.height >> depth_, bw = cfg_.width >> depth_;
  const int flat = level_channels(depth_) * bh * bw;
  store.create("conv.lstm.wx", ortho({4 * cfg_.lstm_width, flat}, rng, real(1)));
  store.create("conv.lstm.wh",
               ortho({4 * cfg_.lstm_width, cfg_.lstm_width}, rng, real(1)));
  Tensor lb = Tensor::zeros({4 * cfg_.lstm_width});
  for (int i = cfg_.lstm_width; i < 2 * cfg_.lstm_width; ++i)
    lb[i] = real(1);  // open forget gates: remember earlier answers by default
  store.create("conv.lstm.b", std::move(lb));

  store.create("conv.v.w", ortho({1, cfg_.lstm_width}, rng, real(1)));
  store.create("conv.v.b", Tensor::zeros({1}));
  if (cfg_.label_count > 0) {
    store.create("conv.fy.w", ortho({cfg_.label_count, cfg_.lstm_width}, rng, real(1)));
    store.create("conv.fy.b", Tensor::zeros({cfg_.label_count}));
  }

  const int seed = plain(depth_) * bh * bw;
  store.create("conv.seed.w", ortho({seed, cfg_.lstm_width}, rng, g));
  store.create("conv.seed.b", Tensor::zeros({seed}));

  for (int l = depth_; l >= 1; --l) {
    const int ci = plain(l) + level_channels(l);  // top-down + bottom-up partner
    const int co = plain(l - 1);
    const int h = cfg_.height >> (l - 1), w = cfg_.width >> (l - 1);
    store.create(level_name("up", l, "k"), ortho({ci, co, kKernel, kKernel}, rng, g));
    store.create(level_name("up", l, "b"), Tensor::zeros({co}));
    store.create(level_name("up", l, "ln_g"), Tensor::full({co * h * w}, real(1)));
    store.create(level_name("up", l, "ln_b"), Tensor::zeros({co * h * w}));
  }

  const int out_ci = plain(0) + level_channels(0);
  Tensor ok({cfg_.image_channels + 1, out_ci, kKernel, kKernel});
  num::orthogonal_init(ok, rng, real(1));
  // Damp the policy-logit channel so the initial policy over unasked
  // questions starts near uniform.
  const int row = out_ci * kKernel * kKernel;
  for (int i = 0; i < row; ++i) ok[cfg_.image_channels * row + i] *= real(0.01);
  store.create("conv.out.k", std::move(ok));
  store.create("conv.out.b", Tensor::zeros({cfg_.image_channels + 1}));
}

num::LstmVars ConvNet::initial_state(Tape& t, int batch) const {
  ISK_CHECK(batch > 0, "conv: batch must be positive");
  num::LstmVars s;
  s.h = t.constant(Tensor::zeros({batch, cfg_.lstm_width}));
  s.c = t.constant(Tensor::zeros({batch, cfg_.lstm_width}));
  return s;
}

ConvNet::Step ConvNet::forward(Tape& t, const Binding& b, Var stack,
                               const Tensor& statement, const Tensor& summary,
                               num::LstmVars state, const Tensor& unasked) const {
  const Tensor& sv = t.val(stack);
  ISK_CHECK(sv.rank() == 4 && sv.shape()[1] == cfg_.image_channels + 1 &&
                sv.shape()[2] == cfg_.height && sv.shape()[3] == cfg_.width,
            "conv forward: stack " << sv.shape_str() << " does not match ["
                                   << cfg_.image_channels + 1 << "x" << cfg_.height
                                   << "x" << cfg_.width << "] + batch");
  const int B = sv.shape()[0];
  const int Q = cfg_.question_count();
  ISK_CHECK(unasked.rank() == 2 && unasked.shape()[0] == B && unasked.shape()[1] == Q,
            "conv forward: unasked mask " << unasked.shape_str() << " does not match ["
                                          << B << "x" << Q << "]");
  ISK_CHECK((cfg_.statement_size > 0) == (statement.size() > 0),
            "conv forward: statement presence does not match the configuration");
  ISK_CHECK(cfg_.summary_shape.empty() == (summary.size() == 0),
            "conv forward: summary presence does not match the configuration");

  // Conditioning maps as constants; they carry data, not gradients.
  std::vector<Var> cond(static_cast<size_t>(depth_) + 1, Var{});
  if (cfg_.statement_size > 0) {
    ISK_CHECK(statement.rank() == 2 && statement.shape()[0] == B &&
                  statement.shape()[1] == cfg_.statement_size,
              "conv forward: statement " << statement.shape_str() << " does not match ["
                                         << B << "x" << cfg_.statement_size << "]");
    const int e = cfg_.height >> 2;
    Tensor tiled({B, cfg_.statement_size, e, e});
    for (int r = 0; r < B; ++r)
      for (int s = 0; s < cfg_.statement_size; ++s) {
        const real v = statement.at(r, s);
        real* dst = tiled.data() +
                    (static_cast<size_t>(r) * cfg_.statement_size + s) * e * e;
        for (int i = 0; i < e * e; ++i) dst[i] = v;
      }
    cond[2] = t.constant(std::move(tiled));
  }
  if (!cfg_.summary_shape.empty()) {
    ISK_CHECK(summary.rank() == 4 && summary.shape()[0] == B &&
                  summary.shape()[1] == cfg_.summary_shape[0] &&
                  summary.shape()[2] == cfg_.summary_shape[1] &&
                  summary.shape()[3] == cfg_.summary_shape[2],
              "conv forward: summary " << summary.shape_str()
                                       << " does not match the configured shape");
    for (int l = 0; l <= depth_; ++l)
      if (cfg_.summary_shape[1] == (cfg_.height >> l) &&
          cfg_.summary_shape[2] == (cfg_.width >> l)) {
        Var sm = t.constant(summary);
        cond[static_cast<size_t>(l)] =
            cond[static_cast<size_t>(l)].valid()
                ? num::concat_channels(t, cond[static_cast<size_t>(l)], sm)
                : sm;
        break;
      }
  }

  // Bottom-up pass.
  std::vector<Var> bu(static_cast<size_t>(depth_) + 1);
  Var a = num::conv2d_same(t, stack, b.of("conv.stem.k"), b.of("conv.stem.b"));
  a = num::layer_norm(t, a, b.of("conv.stem.ln_g"), b.of("conv.stem.ln_b"), kLnEps);
  a = num::leaky_relu(t, a, kLeakySlope);
  bu[0] = cond[0].valid() ? num::concat_channels(t, a, cond[0]) : a;
  for (int l = 1; l <= depth_; ++l) {
    Var d = num::conv2d_down(t, bu[static_cast<size_t>(l - 1)],
                             b.of(level_name("down", l, "k")),
                             b.of(level_name("down", l, "b")));
    d = num::layer_norm(t, d, b.of(level_name("down", l, "ln_g")),
                        b.of(level_name("down", l, "ln_b")), kLnEps);
    d = num::leaky_relu(t, d, kLeakySlope);
    bu[static_cast<size_t>(l)] =
        cond[static_cast<size_t>(l)].valid()
            ? num::concat_channels(t, d, cond[static_cast<size_t>(l)])
            : d;
  }

  // Recurrent bottleneck.
  const int bh = cfg_.height >> depth_, bw = cfg_.width >> depth_;
  const int flat = level_channels(depth_) * bh * bw;
  Var x = num::reshape(t, bu[static_cast<size_t>(depth_)], {B, flat});
  num::LstmVars next = num::lstm_step(t, x, state.h, state.c, b.of("conv.lstm.wx"),
                                      b.of("conv.lstm.wh"), b.of("conv.lstm.b"));

  BeliefOut out;
  out.value =
      num::reshape(t, num::dense(t, next.h, b.of("conv.v.w"), b.of("conv.v.b")), {B});
  if (cfg_.label_count > 0)
    out.fy = num::softmax(t, num::dense(t, next.h, b.of("conv.fy.w"), b.of("conv.fy.b")));

  // Top-down pass.
  const int cd = std::min(cfg_.base_channels << depth_, cfg_.max_channels);
  Var td = num::dense(t, next.h, b.of("conv.seed.w"), b.of("conv.seed.b"));
  td = num::leaky_relu(t, td, kLeakySlope);
  td = num::reshape(t, td, {B, cd, bh, bw});
  for (int l = depth_; l >= 1; --l) {
    Var joined = num::concat_channels(t, td, bu[static_cast<size_t>(l)]);
    td = num::conv2d_up(t, joined, b.of(level_name("up", l, "k")),
                        b.of(level_name("up", l, "b")));
    td = num::layer_norm(t, td, b.of(level_name("up", l, "ln_g")),
                         b.of(level_name("up", l, "ln_b")), kLnEps);
    td = num::leaky_relu(t, td, kLeakySlope);
  }
  Var final_in = num::concat_channels(t, td, bu[0]);
  Var head = num::conv2d_same(t, final_in, b.of("conv.out.k"), b.of("conv.out.b"));

  Var fx_raw = num::slice_channels(t, head, 0, cfg_.image_channels);
  out.fx = cfg_.bernoulli_x ? num::sigmoid(t, fx_raw) : fx_raw;
  Var logit_map = num::reshape(
      t, num::slice_channels(t, head, cfg_.image_channels, 1),
      {B, cfg_.height, cfg_.width});
  out.policy = block_policy(t, logit_map, unasked, cfg_.block);

  return {out, next};
}

}  // namespace isk::beliefnet
