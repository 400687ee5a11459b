#include "isk/beliefnet/fc_net.hpp"

#include <cmath>
#include <string>

#include "isk/num/error.hpp"
#include "isk/num/init.hpp"

namespace isk::beliefnet {

namespace {

constexpr real kLeakySlope = real(0.01);
constexpr real kLnEps = real(1e-5);
constexpr int kHiddenLayers = 4;

std::string layer_name(int l, const char* part) {
  return "fc.l" + std::to_string(l) + "." + part;
}

Tensor ortho(std::vector<int> shape, Rng& rng, real gain) {
  Tensor w(std::move(shape));
  num::orthogonal_init(w, rng, gain);
  return w;
}

}  // namespace

void FcConfig::validate() const {
  ISK_CHECK(input_width > 0, "fc config: input_width must be positive");
  ISK_CHECK(hidden > 0, "fc config: hidden must be positive");
  ISK_CHECK(x_size > 0, "fc config: x_size must be positive");
  ISK_CHECK(label_count >= 0, "fc config: label_count must be >= 0");
  ISK_CHECK(question_count > 0, "fc config: question_count must be positive");
}

FcNet::FcNet(const FcConfig& cfg, ParamStore& store, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const real g = std::sqrt(real(2));  // matches the leaky ReLU nonlinearity
  store.create("fc.in_proj.w", ortho({cfg_.hidden, cfg_.input_width}, rng, real(1)));
  for (int l = 1; l <= kHiddenLayers; ++l) {
    const int in = l == 1 ? cfg_.input_width : cfg_.hidden;
    store.create(layer_name(l, "w"), ortho({cfg_.hidden, in}, rng, g));
    store.create(layer_name(l, "b"), Tensor::zeros({cfg_.hidden}));
    store.create(layer_name(l, "ln_g"), Tensor::full({cfg_.hidden}, real(1)));
    store.create(layer_name(l, "ln_b"), Tensor::zeros({cfg_.hidden}));
  }
  store.create("fc.fx.w", ortho({cfg_.x_size, cfg_.hidden}, rng, real(1)));
  store.create("fc.fx.b", Tensor::zeros({cfg_.x_size}));
  if (cfg_.label_count > 0) {
    store.create("fc.fy.w", ortho({cfg_.label_count, cfg_.hidden}, rng, real(1)));
    store.create("fc.fy.b", Tensor::zeros({cfg_.label_count}));
  }
  store.create("fc.v.w", ortho({1, cfg_.hidden}, rng, real(1)));
  store.create("fc.v.b", Tensor::zeros({1}));
  // Near-zero policy head: the initial policy over unasked questions stays
  // close to uniform, which keeps early exploration broad.
  store.create("fc.pi.w", ortho({cfg_.question_count, cfg_.hidden}, rng, real(0.01)));
  store.create("fc.pi.b", Tensor::zeros({cfg_.question_count}));
}

BeliefOut FcNet::forward(Tape& t, const Binding& b, Var encoded,
                         const Tensor& unasked) const {
  const Tensor& ev = t.val(encoded);
  ISK_CHECK(ev.rank() == 2 && ev.shape()[1] == cfg_.input_width,
            "fc forward: encoded " << ev.shape_str() << " does not match input width "
                                   << cfg_.input_width);
  const int B = ev.shape()[0];
  ISK_CHECK(unasked.rank() == 2 && unasked.shape()[0] == B &&
                unasked.shape()[1] == cfg_.question_count,
            "fc forward: unasked mask " << unasked.shape_str() << " does not match ["
                                        << B << "x" << cfg_.question_count << "]");

  Var h = encoded;
  for (int l = 1; l <= kHiddenLayers; ++l) {
    Var pre = num::dense(t, h, b.of(layer_name(l, "w")), b.of(layer_name(l, "b")));
    Var normed = num::layer_norm(t, pre, b.of(layer_name(l, "ln_g")),
                                 b.of(layer_name(l, "ln_b")), kLnEps);
    Var act = num::leaky_relu(t, normed, kLeakySlope);
    Var shortcut = l == 1 ? num::linear(t, encoded, b.of("fc.in_proj.w")) : h;
    h = num::add(t, act, shortcut);
  }

  BeliefOut out;
  Var fx_raw = num::dense(t, h, b.of("fc.fx.w"), b.of("fc.fx.b"));
  out.fx = cfg_.bernoulli_x ? num::sigmoid(t, fx_raw) : fx_raw;
  if (cfg_.label_count > 0)
    out.fy = num::softmax(t, num::dense(t, h, b.of("fc.fy.w"), b.of("fc.fy.b")));
  out.value = num::reshape(t, num::dense(t, h, b.of("fc.v.w"), b.of("fc.v.b")), {B});
  Var pi_logits = num::dense(t, h, b.of("fc.pi.w"), b.of("fc.pi.b"));
  out.policy = num::softmax_masked(t, pi_logits, unasked);
  return out;
}

}  // namespace isk::beliefnet
