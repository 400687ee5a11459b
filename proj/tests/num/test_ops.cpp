#include <cmath>

#include "doctest.h"

#include "isk/num/error.hpp"
#include "isk/num/ops.hpp"
#include "isk/num/tape.hpp"

using namespace isk::num;

namespace {

Var leaf(Tape& t, Tensor v) { return t.constant(std::move(v)); }

}  // namespace

TEST_CASE("dense matches hand-evaluated affine maps") {
  Tape t;
  SUBCASE("identity weights pass the input through") {
    Var x = leaf(t, Tensor::from({1, 2}, {3.0, -1.0}));
    Var W = leaf(t, Tensor::from({2, 2}, {1.0, 0.0, 0.0, 1.0}));
    Var b = leaf(t, Tensor::from({2}, {0.0, 0.0}));
    Var y = dense(t, x, W, b);
    CHECK(t.val(y)[0] == 3.0);
    CHECK(t.val(y)[1] == -1.0);
  }
  SUBCASE("zero weights broadcast the bias") {
    Var x = leaf(t, Tensor::from({1, 2}, {42.0, -17.0}));
    Var W = leaf(t, Tensor::from({2, 2}, {0.0, 0.0, 0.0, 0.0}));
    Var b = leaf(t, Tensor::from({2}, {5.0, 5.0}));
    Var y = dense(t, x, W, b);
    CHECK(t.val(y)[0] == 5.0);
    CHECK(t.val(y)[1] == 5.0);
  }
  SUBCASE("general case") {
    Var x = leaf(t, Tensor::from({1, 2}, {1.0, 1.0}));
    Var W = leaf(t, Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0}));
    Var b = leaf(t, Tensor::from({2}, {0.0, 1.0}));
    Var y = dense(t, x, W, b);
    CHECK(t.val(y)[0] == doctest::Approx(3.0));
    CHECK(t.val(y)[1] == doctest::Approx(8.0));
  }
  SUBCASE("shape mismatch is rejected with extents in the message") {
    Var x = leaf(t, Tensor::from({1, 3}, {1.0, 1.0, 1.0}));
    Var W = leaf(t, Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0}));
    Var b = leaf(t, Tensor::from({2}, {0.0, 0.0}));
    CHECK_THROWS_WITH_AS(dense(t, x, W, b),
                         doctest::Contains("does not accept"), Error);
  }
}

TEST_CASE("leaky_relu definition") {
  Tape t;
  Var x = leaf(t, Tensor::from({1, 3}, {3.0, -2.0, 0.0}));
  Var y = leaky_relu(t, x, real(0.01));
  CHECK(t.val(y)[0] == 3.0);
  CHECK(t.val(y)[1] == doctest::Approx(-0.02));
  CHECK(t.val(y)[2] == 0.0);
}

TEST_CASE("layer_norm normalizes with population variance") {
  Tape t;
  SUBCASE("constant rows collapse to the bias") {
    Var x = leaf(t, Tensor::from({1, 4}, {1.0, 1.0, 1.0, 1.0}));
    Var g = leaf(t, Tensor::from({4}, {1.0, 1.0, 1.0, 1.0}));
    Var b = leaf(t, Tensor::from({4}, {0.0, 0.0, 0.0, 0.0}));
    Var y = layer_norm(t, x, g, b, real(1e-5));
    for (int i = 0; i < 4; ++i) CHECK(t.val(y)[i] == doctest::Approx(0.0));
  }
  SUBCASE("two-point rows: mean 0, variance 1") {
    Var x = leaf(t, Tensor::from({1, 2}, {1.0, -1.0}));
    Var g = leaf(t, Tensor::from({2}, {1.0, 1.0}));
    Var b = leaf(t, Tensor::from({2}, {0.0, 0.0}));
    Var y = layer_norm(t, x, g, b, real(1e-12));
    CHECK(t.val(y)[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(t.val(y)[1] == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("mean 3 variance 1 row shifted by bias") {
    Var x = leaf(t, Tensor::from({1, 2}, {2.0, 4.0}));
    Var g = leaf(t, Tensor::from({2}, {1.0, 1.0}));
    Var b = leaf(t, Tensor::from({2}, {1.0, 1.0}));
    Var y = layer_norm(t, x, g, b, real(1e-12));
    CHECK(t.val(y)[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(t.val(y)[1] == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("normalized output has mean 0 and unit variance") {
    Tensor xv({3, 7});
    for (int i = 0; i < xv.size(); ++i) xv[i] = real(0.37) * i * i - real(2.0) * i;
    Var x = leaf(t, xv);
    Var g = leaf(t, Tensor::full({7}, 1.0));
    Var b = leaf(t, Tensor::zeros({7}));
    Var y = layer_norm(t, x, g, b, real(1e-10));
    for (int r = 0; r < 3; ++r) {
      real mean = 0, var = 0;
      for (int j = 0; j < 7; ++j) mean += t.val(y).at(r, j);
      mean /= 7;
      for (int j = 0; j < 7; ++j) {
        real d = t.val(y).at(r, j) - mean;
        var += d * d;
      }
      var /= 7;
      CHECK(std::abs(mean) < 1e-12);
      CHECK(std::abs(var - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("softmax_masked contract") {
  Tape t;
  SUBCASE("symmetric logits, all allowed") {
    Var l = leaf(t, Tensor::from({1, 2}, {0.0, 0.0}));
    Var p = softmax_masked(t, l, Tensor::full({1, 2}, 1.0));
    CHECK(t.val(p)[0] == doctest::Approx(0.5));
    CHECK(t.val(p)[1] == doctest::Approx(0.5));
  }
  SUBCASE("single survivor") {
    Var l = leaf(t, Tensor::from({1, 2}, {5.0, 0.0}));
    Var p = softmax_masked(t, l, Tensor::from({1, 2}, {1.0, 0.0}));
    CHECK(t.val(p)[0] == 1.0);
    CHECK(t.val(p)[1] == 0.0);  // exact zero
  }
  SUBCASE("exponentiate and normalize") {
    Var l = leaf(t, Tensor::from({1, 3}, {std::log(real(2)), 0.0, 0.0}));
    Var p = softmax_masked(t, l, Tensor::full({1, 3}, 1.0));
    CHECK(t.val(p)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t.val(p)[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t.val(p)[2] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("all-masked row signals an exhausted question set") {
    Var l = leaf(t, Tensor::from({1, 2}, {1.0, 2.0}));
    CHECK_THROWS_WITH_AS(softmax_masked(t, l, Tensor::zeros({1, 2})),
                         doctest::Contains("no allowed"), Error);
  }
  SUBCASE("survivors sum to one and shift invariance holds") {
    Tensor lv({2, 5});
    Tensor mask({2, 5});
    for (int i = 0; i < lv.size(); ++i) lv[i] = real(0.3) * i - 1;
    mask.fill(0);
    mask.at(0, 1) = mask.at(0, 3) = mask.at(1, 0) = mask.at(1, 4) = mask.at(1, 2) = 1;
    Var p1 = softmax_masked(t, leaf(t, lv), mask);
    Tensor shifted = lv;
    for (int r = 0; r < 2; ++r)
      for (int j = 0; j < 5; ++j) shifted.at(r, j) += real(11.25);
    Var p2 = softmax_masked(t, leaf(t, shifted), mask);
    for (int r = 0; r < 2; ++r) {
      real s = 0;
      for (int j = 0; j < 5; ++j) {
        if (mask.at(r, j) == 0) {
          CHECK(t.val(p1).at(r, j) == 0.0);
        }
        s += t.val(p1).at(r, j);
        CHECK(std::abs(t.val(p1).at(r, j) - t.val(p2).at(r, j)) < 1e-12);
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("lstm_step gate equations") {
  SUBCASE("all-zero parameters and inputs give zero state") {
    Tape t;
    Var x = leaf(t, Tensor::zeros({1, 2}));
    Var h = leaf(t, Tensor::zeros({1, 3}));
    Var c = leaf(t, Tensor::zeros({1, 3}));
    Var Wx = leaf(t, Tensor::zeros({12, 2}));
    Var Wh = leaf(t, Tensor::zeros({12, 3}));
    Var b = leaf(t, Tensor::zeros({12}));
    LstmVars out = lstm_step(t, x, h, c, Wx, Wh, b);
    for (int i = 0; i < 3; ++i) {
      CHECK(t.val(out.h)[i] == 0.0);
      CHECK(t.val(out.c)[i] == 0.0);
    }
  }
  SUBCASE("saturated forget gate with closed input gate preserves the cell") {
    Tape t;
    Var x = leaf(t, Tensor::zeros({1, 1}));
    Var h = leaf(t, Tensor::zeros({1, 1}));
    Var c = leaf(t, Tensor::from({1, 1}, {0.625}));
    Var Wx = leaf(t, Tensor::zeros({4, 1}));
    Var Wh = leaf(t, Tensor::zeros({4, 1}));
    // Gate order [i, f, g, o]: input gate forced shut, forget gate saturated.
    Var b = leaf(t, Tensor::from({4}, {-40.0, 40.0, 0.0, 0.0}));
    LstmVars out = lstm_step(t, x, h, c, Wx, Wh, b);
    CHECK(t.val(out.c)[0] == doctest::Approx(0.625).epsilon(1e-12));
  }
  SUBCASE("scalar case with unit weights matches hand evaluation") {
    Tape t;
    const real xv = 1.0, hv = 0.5, cv = -0.3;
    Var x = leaf(t, Tensor::from({1, 1}, {xv}));
    Var h = leaf(t, Tensor::from({1, 1}, {hv}));
    Var c = leaf(t, Tensor::from({1, 1}, {cv}));
    Var Wx = leaf(t, Tensor::full({4, 1}, 1.0));
    Var Wh = leaf(t, Tensor::full({4, 1}, 1.0));
    Var b = leaf(t, Tensor::zeros({4}));
    LstmVars out = lstm_step(t, x, h, c, Wx, Wh, b);
    const real z = xv + hv;
    const real sig = real(1) / (real(1) + std::exp(-z));
    const real cn = sig * cv + sig * std::tanh(z);
    const real hn = sig * std::tanh(cn);
    CHECK(t.val(out.c)[0] == doctest::Approx(cn).epsilon(1e-12));
    CHECK(t.val(out.h)[0] == doctest::Approx(hn).epsilon(1e-12));
  }
}

TEST_CASE("reduction and shaping ops") {
  Tape t;
  SUBCASE("gather_rows picks one column per row") {
    Var x = leaf(t, Tensor::from({2, 3}, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
    Var y = gather_rows(t, x, {2, 0});
    CHECK(t.val(y)[0] == 3.0);
    CHECK(t.val(y)[1] == 4.0);
  }
  SUBCASE("block_sum tiles in row-major block order") {
    // 1x4x4 ramp; 2x2 blocks.
    Tensor xv({1, 4, 4});
    for (int i = 0; i < 16; ++i) xv[i] = real(i);
    Var y = block_sum(t, leaf(t, xv), 2);
    // top-left block = 0+1+4+5 = 10; top-right = 2+3+6+7 = 18
    CHECK(t.val(y)[0] == 10.0);
    CHECK(t.val(y)[1] == 18.0);
    CHECK(t.val(y)[2] == 42.0);
    CHECK(t.val(y)[3] == 50.0);
  }
  SUBCASE("concat/slice round-trip") {
    Var a = leaf(t, Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0}));
    Var b = leaf(t, Tensor::from({2, 1}, {9.0, 8.0}));
    Var cat = concat_cols(t, a, b);
    CHECK(t.val(cat).at(0, 2) == 9.0);
    CHECK(t.val(cat).at(1, 0) == 3.0);
    Var back = slice_cols(t, cat, 0, 2);
    for (int i = 0; i < 4; ++i) CHECK(t.val(back)[i] == t.val(a)[i]);
  }
  SUBCASE("log_floor clamps") {
    Var x = leaf(t, Tensor::from({1, 2}, {0.5, 0.0}));
    Var y = log_floor(t, x, real(1e-6));
    CHECK(t.val(y)[0] == doctest::Approx(std::log(0.5)));
    CHECK(t.val(y)[1] == doctest::Approx(std::log(1e-6)));
  }
}

TEST_CASE("likelihood ops") {
  Tape t;
  SUBCASE("perfect Bernoulli prediction scores zero") {
    Tensor target = Tensor::from({1, 3}, {1.0, 0.0, 1.0});
    Var f = leaf(t, Tensor::from({1, 3}, {1.0, 0.0, 1.0}));
    Var ll = bernoulli_ll_rows(t, f, target, real(1e-6));
    CHECK(t.val(ll)[0] == doctest::Approx(0.0));
  }
  SUBCASE("uniform 0.5 prediction scores -N ln 2") {
    Tensor target = Tensor::from({1, 4}, {1.0, 0.0, 0.0, 1.0});
    Var f = leaf(t, Tensor::full({1, 4}, 0.5));
    Var ll = bernoulli_ll_rows(t, f, target, real(1e-6));
    CHECK(t.val(ll)[0] == doctest::Approx(-4.0 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("mixed three-pixel case matches a reference loop") {
    Tensor target = Tensor::from({1, 3}, {1.0, 0.0, 0.3});
    Tensor fv = Tensor::from({1, 3}, {0.9, 0.2, 0.6});
    Var ll = bernoulli_ll_rows(t, leaf(t, fv), target, real(1e-6));
    real want = 0;
    for (int i = 0; i < 3; ++i)
      want += target[i] * std::log(fv[i]) + (1 - target[i]) * std::log(1 - fv[i]);
    CHECK(t.val(ll)[0] == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("gaussian log-likelihood is a negative half squared error") {
    Tensor target = Tensor::from({1, 2}, {1.0, -1.0});
    Var f = leaf(t, Tensor::from({1, 2}, {0.0, 0.0}));
    Var ll = gaussian_ll_rows(t, f, target);
    CHECK(t.val(ll)[0] == doctest::Approx(-1.0));
  }
  SUBCASE("entropy of a uniform row is ln n") {
    Var p = leaf(t, Tensor::full({1, 8}, 0.125));
    Var h = entropy_rows(t, p);
    CHECK(t.val(h)[0] == doctest::Approx(std::log(8.0)).epsilon(1e-12));
    // exact zeros contribute nothing
    Var p2 = leaf(t, Tensor::from({1, 3}, {1.0, 0.0, 0.0}));
    CHECK(t.val(entropy_rows(t, p2))[0] == 0.0);
  }
}
