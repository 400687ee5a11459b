#include <cmath>
#include <vector>

#include "doctest.h"
#include "isk/beliefnet/conv_net.hpp"
#include "isk/beliefnet/encode.hpp"
#include "isk/beliefnet/fc_net.hpp"
#include "isk/beliefnet/history.hpp"
#include "isk/num/error.hpp"
#include "isk/num/grad_check.hpp"
#include "isk/num/ops.hpp"

using namespace isk;
using beliefnet::BeliefOut;
using beliefnet::Binding;
using beliefnet::ConvConfig;
using beliefnet::ConvNet;
using beliefnet::FcConfig;
using beliefnet::FcNet;
using beliefnet::TrialHistory;
using num::ParamStore;
using num::Rng;
using num::Tape;
using num::Tensor;
using num::Var;
using num::real;
using worlds::QuestionSpace;

namespace {

Tensor ones_rows(int b, int q) { return Tensor::full({b, q}, real(1)); }

Tensor rand_tensor(std::vector<int> shape, Rng& rng, real lo, real hi) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i)
    t[i] = lo + (hi - lo) * static_cast<real>(rng.next_double());
  return t;
}

void zero_param(ParamStore& store, const std::string& name) {
  Tensor* p = store.find(name);
  REQUIRE(p != nullptr);
  p->fill(0);
}

}  // namespace

TEST_CASE("binding exposes one leaf per parameter and collects gradients") {
  ParamStore store;
  store.create("a", Tensor::from({2}, {1.0, 2.0}));
  store.create("b", Tensor::from({1}, {3.0}));
  Tape t;
  Binding bind(t, store);
  CHECK_THROWS_AS(bind.of("missing"), num::Error);

  // objective = sum(a) * b; da = b, db = sum(a)
  Var s = num::sum_all(t, bind.of("a"));
  Var obj = num::mul(t, s, bind.of("b"));
  t.backward(obj);
  auto grads = bind.grads(t);
  REQUIRE(grads.size() == 2);
  CHECK(grads[0][0] == doctest::Approx(3.0));
  CHECK(grads[0][1] == doctest::Approx(3.0));
  CHECK(grads[1][0] == doctest::Approx(3.0));

  // An untouched parameter still yields a zero gradient of its shape.
  ParamStore store2;
  store2.create("u", Tensor::from({3}, {1.0, 1.0, 1.0}));
  store2.create("v", Tensor::from({1}, {2.0}));
  Tape t2;
  Binding bind2(t2, store2);
  t2.backward(num::sum_all(t2, bind2.of("u")));
  auto g2 = bind2.grads(t2);
  CHECK(g2[1].shape() == std::vector<int>{1});
  CHECK(g2[1][0] == 0);
}

TEST_CASE("fc net with zeroed heads is uniform over labels and unasked questions") {
  FcConfig cfg;
  cfg.input_width = 10;
  cfg.hidden = 16;
  cfg.x_size = 5;
  cfg.label_count = 4;
  cfg.question_count = 5;
  ParamStore store;
  Rng rng = Rng::derive(7, {num::kStreamInit});
  FcNet net(cfg, store, rng);
  for (const char* n : {"fc.fy.w", "fc.fy.b", "fc.pi.w", "fc.pi.b"}) zero_param(store, n);

  Tape t;
  Binding b(t, store);
  Tensor unasked = ones_rows(1, 5);
  unasked.at(0, 2) = 0;
  Rng data = Rng::derive(7, {num::kStreamData});
  Var encoded = t.constant(rand_tensor({1, 10}, data, -1, 1));
  BeliefOut out = net.forward(t, b, encoded, unasked);

  for (int l = 0; l < 4; ++l) CHECK(t.val(out.fy).at(0, l) == doctest::Approx(0.25));
  const Tensor& pi = t.val(out.policy);
  CHECK(pi.at(0, 2) == 0);
  for (int q : {0, 1, 3, 4}) CHECK(pi.at(0, q) == doctest::Approx(0.25));
}

TEST_CASE("fc policy masks asked questions exactly, across all subsets") {
  const int Q = 10;
  QuestionSpace qs = QuestionSpace::uniform(Q, 1);
  FcConfig cfg;
  cfg.input_width = beliefnet::encode_fc_width(qs);
  cfg.hidden = 24;
  cfg.x_size = Q;
  cfg.label_count = 3;
  cfg.question_count = Q;
  ParamStore store;
  Rng rng = Rng::derive(11, {num::kStreamInit});
  FcNet net(cfg, store, rng);
  Rng ans = Rng::derive(11, {num::kStreamData});

  for (unsigned mask = 0; mask + 1 < (1u << Q); ++mask) {
    TrialHistory h(&qs);
    for (int q = 0; q < Q; ++q)
      if (mask & (1u << q))
        h.add(q, Tensor::from({1}, {static_cast<real>(ans.next_double())}));
    Tape t;
    Binding b(t, store);
    Var encoded = t.constant(beliefnet::encode_fc_batch({&h}));
    BeliefOut out = net.forward(t, b, encoded, beliefnet::unasked_rows({&h}));
    const Tensor& pi = t.val(out.policy);
    real sum = 0;
    for (int q = 0; q < Q; ++q) {
      if (mask & (1u << q)) CHECK(pi.at(0, q) == 0);  // exact zero
      sum += pi.at(0, q);
    }
    CHECK(std::abs(sum - 1) < 1e-9);
    const Tensor& fy = t.val(out.fy);
    real fsum = 0;
    for (int l = 0; l < 3; ++l) fsum += fy.at(0, l);
    CHECK(std::abs(fsum - 1) < 1e-9);
  }
}

TEST_CASE("fc forward matches a scalar hand evaluation at hidden width one") {
  FcConfig cfg;
  cfg.input_width = 1;
  cfg.hidden = 1;
  cfg.x_size = 1;
  cfg.label_count = 2;
  cfg.question_count = 2;
  ParamStore store;
  Rng rng = Rng::derive(3, {num::kStreamInit});
  FcNet net(cfg, store, rng);

  auto set = [&](const char* name, std::vector<real> v) {
    Tensor* p = store.find(name);
    REQUIRE(p != nullptr);
    REQUIRE(p->size() == static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) (*p)[static_cast<int>(i)] = v[i];
  };
  set("fc.in_proj.w", {0.5});
  for (int l = 1; l <= 4; ++l) {
    const std::string base = "fc.l" + std::to_string(l) + ".";
    set((base + "w").c_str(), {1.0});
    set((base + "b").c_str(), {0.25});
    set((base + "ln_g").c_str(), {2.0});
    set((base + "ln_b").c_str(), {l % 2 ? 0.3 : -0.2});
  }
  set("fc.fx.w", {1.5});
  set("fc.fx.b", {-0.1});
  set("fc.fy.w", {1.0, -1.0});
  set("fc.fy.b", {0.0, 0.5});
  set("fc.v.w", {2.0});
  set("fc.v.b", {0.75});
  set("fc.pi.w", {1.0, 0.25});
  set("fc.pi.b", {0.0, 0.0});

  const real u = 0.8;
  // With one feature, layer norm maps everything to its bias, so each
  // layer contributes leaky(ln_b) on top of the shortcut path.
  auto leaky = [](real x) { return x >= 0 ? x : real(0.01) * x; };
  real h = 0;
  for (int l = 1; l <= 4; ++l) {
    const real ln_b = l % 2 ? real(0.3) : real(-0.2);
    const real shortcut = l == 1 ? real(0.5) * u : h;
    h = leaky(ln_b) + shortcut;
  }
  const real fx = 1 / (1 + std::exp(-(real(1.5) * h - real(0.1))));
  const real e0 = std::exp(h), e1 = std::exp(-h + real(0.5));
  const real v = 2 * h + real(0.75);
  const real p0 = std::exp(h), p1 = std::exp(real(0.25) * h);

  Tape t;
  Binding b(t, store);
  BeliefOut out = net.forward(t, b, t.constant(Tensor::from({1, 1}, {u})),
                              ones_rows(1, 2));
  CHECK(t.val(out.fx).at(0, 0) == doctest::Approx(fx).epsilon(1e-12));
  CHECK(t.val(out.fy).at(0, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
  CHECK(t.val(out.fy).at(0, 1) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));
  CHECK(t.val(out.value)[0] == doctest::Approx(v).epsilon(1e-12));
  CHECK(t.val(out.policy).at(0, 0) == doctest::Approx(p0 / (p0 + p1)).epsilon(1e-12));
  CHECK(t.val(out.policy).at(0, 1) == doctest::Approx(p1 / (p0 + p1)).epsilon(1e-12));
}

TEST_CASE("block policy sums blocks then softmaxes over unasked") {
  Tape t;

  SUBCASE("constant channel splits evenly over four unasked blocks") {
    Var map = t.constant(Tensor::full({1, 4, 4}, real(0.35)));
    Var pi = beliefnet::block_policy(t, map, ones_rows(1, 4), 2);
    for (int q = 0; q < 4; ++q) CHECK(t.val(pi).at(0, q) == doctest::Approx(0.25));
  }

  SUBCASE("a single surviving block takes all the mass") {
    Rng r = Rng::derive(5, {9});
    Var map = t.constant(rand_tensor({1, 2, 4}, r, -1, 1));
    Tensor unasked({1, 2});
    unasked.at(0, 1) = 1;
    Var pi = beliefnet::block_policy(t, map, unasked, 2);
    CHECK(t.val(pi).at(0, 0) == 0);
    CHECK(t.val(pi).at(0, 1) == 1);
  }

  SUBCASE("block sums [ln 2, 0] give probabilities [2/3, 1/3]") {
    Tensor map({1, 2, 4});
    const real ln2 = std::log(real(2));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) map[i * 4 + j] = ln2 / 4;
    Var pi = beliefnet::block_policy(t, t.constant(map), ones_rows(1, 2), 2);
    CHECK(t.val(pi).at(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(t.val(pi).at(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  SUBCASE("every block asked is an error") {
    Var map = t.constant(Tensor::full({1, 4, 4}, real(0.1)));
    CHECK_THROWS_AS(beliefnet::block_policy(t, map, Tensor({1, 4}), 2), num::Error);
  }
}

namespace {

ConvConfig small_conv() {
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
  return cfg;
}

}  // namespace

TEST_CASE("conv config resolves depth and rejects bad geometry") {
  ConvConfig cfg = small_conv();
  cfg.depth = 0;
  CHECK(cfg.resolved_depth() == 1);  // 8 -> 4, then extent 4 stops
  cfg.height = cfg.width = 32;
  CHECK(cfg.resolved_depth() == 3);  // 32 -> 16 -> 8 -> 4
  cfg.height = cfg.width = 28;
  CHECK(cfg.resolved_depth() == 2);  // 28 -> 14 -> 7 (odd stops)
  cfg.height = cfg.width = 52;
  CHECK(cfg.resolved_depth() == 2);  // 52 -> 26 -> 13

  ConvConfig bad = small_conv();
  bad.block = 3;
  ParamStore store;
  Rng rng(1);
  CHECK_THROWS_AS(ConvNet(bad, store, rng), num::Error);

  ConvConfig odd = small_conv();
  odd.height = 6;
  odd.width = 6;
  odd.block = 2;
  odd.depth = 2;  // 6 is not divisible by 4
  ParamStore store2;
  CHECK_THROWS_AS(ConvNet(odd, store2, rng), num::Error);
}

TEST_CASE("conv net shapes: reconstruction at input shape, bottleneck 2x2") {
  ConvConfig cfg = small_conv();
  ParamStore store;
  Rng rng = Rng::derive(21, {num::kStreamInit});
  ConvNet net(cfg, store, rng);

  // Depth 2 on 8x8 leaves a 2x2 bottleneck; the LSTM input width records it.
  const Tensor* wx = store.find("conv.lstm.wx");
  REQUIRE(wx != nullptr);
  CHECK(wx->shape() == std::vector<int>{4 * 6, net.level_channels(2) * 2 * 2});

  Tape t;
  Binding b(t, store);
  Rng data = Rng::derive(21, {num::kStreamData});
  Var stack = t.constant(rand_tensor({3, 2, 8, 8}, data, 0, 1));
  auto step = net.forward(t, b, stack, Tensor(), Tensor(), net.initial_state(t, 3),
                          ones_rows(3, 4));
  CHECK(t.val(step.out.fx).shape() == std::vector<int>{3, 1, 8, 8});
  CHECK(t.val(step.out.fy).shape() == std::vector<int>{3, 2});
  CHECK(t.val(step.out.value).shape() == std::vector<int>{3});
  CHECK(t.val(step.out.policy).shape() == std::vector<int>{3, 4});
  CHECK(t.val(step.state.h).shape() == std::vector<int>{3, 6});
  for (int i = 0; i < t.val(step.out.fx).size(); ++i) {
    CHECK(t.val(step.out.fx)[i] > 0);
    CHECK(t.val(step.out.fx)[i] < 1);
  }
  real psum = 0;
  for (int q = 0; q < 4; ++q) psum += t.val(step.out.policy).at(0, q);
  CHECK(std::abs(psum - 1) < 1e-9);
}

TEST_CASE("conv policy masks asked blocks exactly, across all subsets") {
  ConvConfig cfg;
  cfg.image_channels = 1;
  cfg.height = 12;
  cfg.width = 12;
  cfg.block = 4;  // 9 questions
  cfg.base_channels = 2;
  cfg.max_channels = 4;
  cfg.lstm_width = 4;
  cfg.label_count = 2;
  ParamStore store;
  Rng rng = Rng::derive(31, {num::kStreamInit});
  ConvNet net(cfg, store, rng);
  const int Q = cfg.question_count();
  REQUIRE(Q == 9);
  Rng data = Rng::derive(31, {num::kStreamData});
  Tensor stack = rand_tensor({1, 2, 12, 12}, data, 0, 1);

  for (unsigned mask = 0; mask + 1 < (1u << Q); ++mask) {
    Tensor unasked({1, Q});
    for (int q = 0; q < Q; ++q) unasked.at(0, q) = (mask & (1u << q)) ? 0 : 1;
    Tape t;
    Binding b(t, store);
    auto step = net.forward(t, b, t.constant(stack), Tensor(), Tensor(),
                            net.initial_state(t, 1), unasked);
    const Tensor& pi = t.val(step.out.policy);
    real sum = 0;
    for (int q = 0; q < Q; ++q) {
      if (mask & (1u << q)) CHECK(pi.at(0, q) == 0);
      sum += pi.at(0, q);
    }
    CHECK(std::abs(sum - 1) < 1e-9);
  }
}

TEST_CASE("conv forward is pure and the lstm state carries memory") {
  ConvConfig cfg = small_conv();
  ParamStore store;
  Rng rng = Rng::derive(41, {num::kStreamInit});
  ConvNet net(cfg, store, rng);
  Rng data = Rng::derive(41, {num::kStreamData});
  Tensor stack = rand_tensor({2, 2, 8, 8}, data, 0, 1);
  Tensor unasked = ones_rows(2, 4);

  auto run = [&](const Tensor& h0, const Tensor& c0) {
    Tape t;
    Binding b(t, store);
    num::LstmVars s{t.constant(h0), t.constant(c0)};
    auto step = net.forward(t, b, t.constant(stack), Tensor(), Tensor(), s, unasked);
    return std::tuple<Tensor, Tensor, Tensor>(t.val(step.out.value),
                                              t.val(step.state.h),
                                              t.val(step.state.c));
  };

  Tensor z({2, 6});
  auto [v1, h1, c1] = run(z, z);
  auto [v2, h2, c2] = run(z, z);
  for (int i = 0; i < v1.size(); ++i) CHECK(v1[i] == v2[i]);  // pure function
  for (int i = 0; i < h1.size(); ++i) CHECK(h1[i] == h2[i]);

  // Same stack, evolved state: outputs differ in general.
  auto [v3, h3, c3] = run(h1, c1);
  bool any_diff = false;
  for (int i = 0; i < v3.size(); ++i) any_diff = any_diff || v3[i] != v1[i];
  CHECK(any_diff);

  // Replaying from a saved state is bitwise identical.
  auto [v4, h4, c4] = run(h1, c1);
  for (int i = 0; i < v3.size(); ++i) CHECK(v4[i] == v3[i]);
  for (int i = 0; i < h3.size(); ++i) {
    CHECK(h4[i] == h3[i]);
    CHECK(c4[i] == c3[i]);
  }
}

TEST_CASE("conv outputs ignore the hidden image when nothing was revealed") {
  // An empty history encodes to an all-zero stack whatever the example is,
  // so belief outputs cannot depend on the hidden x.
  worlds::PixelGeometry g{1, 8, 8, 4};
  QuestionSpace qs = QuestionSpace::uniform(4, 16);
  TrialHistory h(&qs);
  Tensor stack = beliefnet::encode_image_batch({&h}, g);
  for (int i = 0; i < stack.size(); ++i) REQUIRE(stack[i] == 0);

  ConvConfig cfg = small_conv();
  ParamStore store;
  Rng rng = Rng::derive(51, {num::kStreamInit});
  ConvNet net(cfg, store, rng);
  Tape t;
  Binding b(t, store);
  auto step = net.forward(t, b, t.constant(stack), Tensor(), Tensor(),
                          net.initial_state(t, 1), ones_rows(1, 4));
  // The forward pass never receives x at all; assert the stack really is
  // the only observation-bearing input by checking output finiteness and
  // the masking contract still holding on the zero stack.
  CHECK(t.val(step.out.value).all_finite());
  CHECK(t.val(step.out.fx).all_finite());
}

TEST_CASE("conv conditioning maps join the matching levels") {
  ConvConfig cfg = small_conv();
  cfg.statement_size = 3;             // tiles at 8>>2 = 2
  cfg.summary_shape = {1, 4, 4};      // joins level 1
  ParamStore store;
  Rng rng = Rng::derive(61, {num::kStreamInit});
  ConvNet net(cfg, store, rng);
  CHECK(net.level_channels(1) == 5);  // 4 conv channels + summary
  CHECK(net.level_channels(2) == 7);  // 4 conv channels + 3 statement

  Rng data = Rng::derive(61, {num::kStreamData});
  Tensor stack = rand_tensor({2, 2, 8, 8}, data, 0, 1);
  Tensor statement = rand_tensor({2, 3}, data, 0, 1);
  Tensor summary = rand_tensor({2, 1, 4, 4}, data, 0, 1);

  Tape t;
  Binding b(t, store);
  auto step = net.forward(t, b, t.constant(stack), statement, summary,
                          net.initial_state(t, 2), ones_rows(2, 4));
  CHECK(t.val(step.out.value).all_finite());

  // Changing the statement changes the outputs: the conditioning is live.
  Tensor statement2 = statement;
  statement2.at(0, 0) += real(1);
  Tape t2;
  Binding b2(t2, store);
  auto step2 = net.forward(t2, b2, t2.constant(stack), statement2, summary,
                           net.initial_state(t2, 2), ones_rows(2, 4));
  bool diff = false;
  for (int i = 0; i < t.val(step.out.value).size(); ++i)
    diff = diff || t.val(step.out.value)[i] != t2.val(step2.out.value)[i];
  CHECK(diff);

  // Presence must match the configuration.
  Tape t3;
  Binding b3(t3, store);
  CHECK_THROWS_AS(net.forward(t3, b3, t3.constant(stack), Tensor(), summary,
                              net.initial_state(t3, 2), ones_rows(2, 4)),
                  num::Error);
}

TEST_CASE("fc gradients agree with finite differences") {
  FcConfig cfg;
  cfg.input_width = 6;
  cfg.hidden = 8;
  cfg.x_size = 5;
  cfg.label_count = 3;
  cfg.question_count = 4;
  ParamStore store;
  Rng rng = Rng::derive(71, {num::kStreamInit});
  FcNet net(cfg, store, rng);

  Rng data = Rng::derive(71, {num::kStreamData});
  Tensor encoded = rand_tensor({2, 6}, data, -1, 1);
  Tensor unasked = ones_rows(2, 4);
  unasked.at(0, 1) = 0;
  unasked.at(1, 3) = 0;
  Tensor wx = rand_tensor({2, 5}, data, -1, 1);
  Tensor wy = rand_tensor({2, 3}, data, -1, 1);
  Tensor wv = rand_tensor({2}, data, -1, 1);
  Tensor wp = rand_tensor({2, 4}, data, -1, 1);
  for (int r = 0; r < 2; ++r)
    for (int q = 0; q < 4; ++q)
      if (unasked.at(r, q) == 0) wp.at(r, q) = 0;  // zero cotangent on masked

  std::vector<Tensor*> leaves;
  for (const auto& e : store.entries()) leaves.push_back(e.value.get());

  auto build = [&](Tape& t, const std::vector<Var>& vars) {
    Binding b(store, vars);
    BeliefOut out = net.forward(t, b, t.constant(encoded), unasked);
    Var obj = num::dot_const(t, out.fx, wx);
    obj = num::add(t, obj, num::dot_const(t, out.fy, wy));
    obj = num::add(t, obj, num::dot_const(t, out.value, wv));
    obj = num::add(t, obj, num::dot_const(t, out.policy, wp));
    return obj;
  };

  Rng check = Rng::derive(71, {num::kStreamEval});
  real err = num::max_rel_grad_err(leaves, build, check, 3, real(1e-5));
  CHECK(err < 1e-6);
}

TEST_CASE("conv gradients agree with finite differences through two steps") {
  ConvConfig cfg = small_conv();
  cfg.statement_size = 2;
  cfg.summary_shape = {1, 4, 4};
  ParamStore store;
  Rng rng = Rng::derive(81, {num::kStreamInit});
  ConvNet net(cfg, store, rng);

  Rng data = Rng::derive(81, {num::kStreamData});
  Tensor stack1 = rand_tensor({1, 2, 8, 8}, data, 0, 1);
  Tensor stack2 = rand_tensor({1, 2, 8, 8}, data, 0, 1);
  Tensor statement = rand_tensor({1, 2}, data, 0, 1);
  Tensor summary = rand_tensor({1, 1, 4, 4}, data, 0, 1);
  Tensor unasked1 = ones_rows(1, 4);
  Tensor unasked2 = ones_rows(1, 4);
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
    auto s1 = net.forward(t, b, t.constant(stack1), statement, summary,
                          net.initial_state(t, 1), unasked1);
    auto s2 = net.forward(t, b, t.constant(stack2), statement, summary, s1.state,
                          unasked2);
    Var obj = num::dot_const(t, s1.out.value, wv);
    obj = num::add(t, obj, num::dot_const(t, s1.out.policy, wp));
    obj = num::add(t, obj, num::dot_const(t, s2.out.fx, wx));
    obj = num::add(t, obj, num::dot_const(t, s2.out.fy, wy));
    obj = num::add(t, obj, num::dot_const(t, s2.out.value, wv));
    return obj;
  };

  Rng check = Rng::derive(81, {num::kStreamEval});
  real err = num::max_rel_grad_err(leaves, build, check, 2, real(1e-5));
  CHECK(err < 1e-6);
}
