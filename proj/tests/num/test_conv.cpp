#include <vector>

#include "doctest.h"

#include "isk/num/error.hpp"
#include "isk/num/ops.hpp"
#include "isk/num/rng.hpp"
#include "isk/num/tape.hpp"

using namespace isk::num;

namespace {

// Independent reference: stride-2 cross-correlation with zero padding
// (k-1)/2, written as plain nested loops with no shared code.
Tensor ref_conv_down(const Tensor& x, const Tensor& K, const Tensor& b) {
  const int B = x.shape()[0], Ci = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const int Co = K.shape()[0], k = K.shape()[2], p = (k - 1) / 2;
  Tensor y({B, Co, H / 2, W / 2});
  for (int bo = 0; bo < B; ++bo)
    for (int co = 0; co < Co; ++co)
      for (int i = 0; i < H / 2; ++i)
        for (int j = 0; j < W / 2; ++j) {
          double acc = b[co];
          for (int ci = 0; ci < Ci; ++ci)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                int q = 2 * i + u - p, r = 2 * j + v - p;
                if (q < 0 || q >= H || r < 0 || r >= W) continue;
                acc += K[((co * Ci + ci) * k + u) * k + v] *
                       x[((bo * Ci + ci) * H + q) * W + r];
              }
          y[((bo * Co + co) * (H / 2) + i) * (W / 2) + j] = static_cast<real>(acc);
        }
  return y;
}

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t[i] = static_cast<real>(rng.normal());
  return t;
}

}  // namespace

TEST_CASE("conv2d_down against the reference loop") {
  SUBCASE("1x1 kernel with identity channel map picks strided corners") {
    Tape t;
    Tensor xv({1, 1, 2, 2});
    xv[0] = 1;
    xv[1] = 2;
    xv[2] = 3;
    xv[3] = 4;
    Tensor K = Tensor::full({1, 1, 1, 1}, 1.0);
    Tensor b = Tensor::zeros({1});
    Var y = conv2d_down(t, t.constant(xv), t.constant(K), t.constant(b));
    CHECK(t.val(y).size() == 1);
    CHECK(t.val(y)[0] == 1.0);  // stride 2 from the top-left corner
  }
  SUBCASE("zero kernel broadcasts the bias") {
    Tape t;
    Rng rng = Rng::derive(5, {kStreamInit});
    Tensor xv = random_tensor({2, 3, 4, 4}, rng);
    Tensor K = Tensor::zeros({2, 3, 3, 3});
    Tensor b = Tensor::from({2}, {0.5, -1.5});
    Var y = conv2d_down(t, t.constant(xv), t.constant(K), t.constant(b));
    for (int bo = 0; bo < 2; ++bo)
      for (int co = 0; co < 2; ++co)
        for (int i = 0; i < 4; ++i)
          CHECK(t.val(y)[(bo * 2 + co) * 4 + i] == b[co]);
  }
  SUBCASE("1x4x4 input, one 3x3 kernel") {
    Tape t;
    Rng rng = Rng::derive(17, {kStreamInit});
    Tensor xv = random_tensor({1, 1, 4, 4}, rng);
    Tensor K = random_tensor({1, 1, 3, 3}, rng);
    Tensor b = Tensor::from({1}, {0.25});
    Tensor want = ref_conv_down(xv, K, b);
    Var y = conv2d_down(t, t.constant(xv), t.constant(K), t.constant(b));
    REQUIRE(t.val(y).shape() == std::vector<int>{1, 1, 2, 2});
    for (int i = 0; i < 4; ++i)
      CHECK(t.val(y)[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  SUBCASE("multi-channel batch agrees with the reference") {
    Tape t;
    Rng rng = Rng::derive(23, {kStreamInit});
    Tensor xv = random_tensor({2, 3, 6, 8}, rng);
    Tensor K = random_tensor({4, 3, 5, 5}, rng);
    Tensor b = random_tensor({4}, rng);
    Tensor want = ref_conv_down(xv, K, b);
    Var y = conv2d_down(t, t.constant(xv), t.constant(K), t.constant(b));
    REQUIRE(t.val(y).same_shape(want));
    for (int i = 0; i < want.size(); ++i)
      CHECK(t.val(y)[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  SUBCASE("odd extents rejected") {
    Tape t;
    Tensor xv({1, 1, 5, 4});
    Tensor K = Tensor::zeros({1, 1, 3, 3});
    Tensor b = Tensor::zeros({1});
    CHECK_THROWS_AS(conv2d_down(t, t.constant(xv), t.constant(K), t.constant(b)),
                    Error);
  }
}

namespace {

// Stride-1 counterpart of ref_conv_down, again as independent loops.
Tensor ref_conv_same(const Tensor& x, const Tensor& K, const Tensor& b) {
  const int B = x.shape()[0], Ci = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const int Co = K.shape()[0], k = K.shape()[2], p = (k - 1) / 2;
  Tensor y({B, Co, H, W});
  for (int bo = 0; bo < B; ++bo)
    for (int co = 0; co < Co; ++co)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          double acc = b[co];
          for (int ci = 0; ci < Ci; ++ci)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                int q = i + u - p, r = j + v - p;
                if (q < 0 || q >= H || r < 0 || r >= W) continue;
                acc += K[((co * Ci + ci) * k + u) * k + v] *
                       x[((bo * Ci + ci) * H + q) * W + r];
              }
          y[((bo * Co + co) * H + i) * W + j] = static_cast<real>(acc);
        }
  return y;
}

}  // namespace

TEST_CASE("conv2d_same against the reference loop") {
  SUBCASE("1x1 identity kernel reproduces the input") {
    Tape t;
    Rng rng = Rng::derive(3, {kStreamInit});
    Tensor xv = random_tensor({2, 1, 3, 4}, rng);
    Tensor K = Tensor::full({1, 1, 1, 1}, 1.0);
    Tensor b = Tensor::zeros({1});
    Var y = conv2d_same(t, t.constant(xv), t.constant(K), t.constant(b));
    REQUIRE(t.val(y).same_shape(xv));
    for (int i = 0; i < xv.size(); ++i) CHECK(t.val(y)[i] == xv[i]);
  }
  SUBCASE("spatial extents are preserved, including odd ones") {
    Tape t;
    Tensor xv({1, 2, 5, 7});
    Tensor K = Tensor::zeros({3, 2, 3, 3});
    Tensor b = Tensor::from({3}, {1.0, 2.0, 3.0});
    Var y = conv2d_same(t, t.constant(xv), t.constant(K), t.constant(b));
    REQUIRE(t.val(y).shape() == std::vector<int>{1, 3, 5, 7});
    for (int co = 0; co < 3; ++co)
      for (int i = 0; i < 35; ++i) CHECK(t.val(y)[co * 35 + i] == b[co]);
  }
  SUBCASE("multi-channel batch agrees with the reference") {
    Tape t;
    Rng rng = Rng::derive(29, {kStreamInit});
    Tensor xv = random_tensor({2, 3, 5, 6}, rng);
    Tensor K = random_tensor({4, 3, 3, 3}, rng);
    Tensor b = random_tensor({4}, rng);
    Tensor want = ref_conv_same(xv, K, b);
    Var y = conv2d_same(t, t.constant(xv), t.constant(K), t.constant(b));
    REQUIRE(t.val(y).same_shape(want));
    for (int i = 0; i < want.size(); ++i)
      CHECK(t.val(y)[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  SUBCASE("kernel-channel mismatch rejected") {
    Tape t;
    Tensor xv({1, 2, 4, 4});
    Tensor K = Tensor::zeros({1, 3, 3, 3});
    Tensor b = Tensor::zeros({1});
    CHECK_THROWS_AS(conv2d_same(t, t.constant(xv), t.constant(K), t.constant(b)),
                    Error);
  }
}

TEST_CASE("conv2d_up shape and bias contracts") {
  Tape t;
  SUBCASE("doubles the spatial extents") {
    Tensor xv({1, 1, 2, 2});
    Tensor K = Tensor::zeros({1, 1, 3, 3});
    Tensor b = Tensor::zeros({1});
    Var y = conv2d_up(t, t.constant(xv), t.constant(K), t.constant(b));
    CHECK(t.val(y).shape() == std::vector<int>{1, 1, 4, 4});
  }
  SUBCASE("zero kernel gives bias-only output") {
    Rng rng = Rng::derive(31, {kStreamInit});
    Tensor xv = random_tensor({1, 2, 3, 3}, rng);
    Tensor K = Tensor::zeros({2, 3, 3, 3});
    Tensor b = Tensor::from({3}, {1.0, 2.0, 3.0});
    Var y = conv2d_up(t, t.constant(xv), t.constant(K), t.constant(b));
    for (int co = 0; co < 3; ++co)
      for (int i = 0; i < 36; ++i) CHECK(t.val(y)[co * 36 + i] == b[co]);
  }
  SUBCASE("down then up restores the spatial shape") {
    Rng rng = Rng::derive(37, {kStreamInit});
    Tensor xv = random_tensor({1, 2, 8, 8}, rng);
    Tensor Kd = random_tensor({4, 2, 3, 3}, rng);
    Tensor bd = Tensor::zeros({4});
    Tensor Ku = random_tensor({4, 2, 3, 3}, rng);
    Tensor bu = Tensor::zeros({2});
    Var down = conv2d_down(t, t.constant(xv), t.constant(Kd), t.constant(bd));
    Var up = conv2d_up(t, down, t.constant(Ku), t.constant(bu));
    CHECK(t.val(up).shape() == std::vector<int>{1, 2, 8, 8});
  }
}

TEST_CASE("conv2d_up is the adjoint of conv2d_down for shared kernels") {
  // <conv_down(x; K), y> must equal <x, conv_up(y; K)>: the down kernel
  // [Co,Ci,k,k] is read by conv2d_up as [its-in=Co, its-out=Ci, k, k], so
  // one tensor serves both directions.
  Rng rng = Rng::derive(101, {kStreamInit});
  for (int trial = 0; trial < 20; ++trial) {
    const int B = 1 + rng.uniform_int(2);
    const int Ci = 1 + rng.uniform_int(3);
    const int Co = 1 + rng.uniform_int(3);
    const int k = 1 + 2 * rng.uniform_int(2);  // 1 or 3
    const int H = 2 * (1 + rng.uniform_int(3));
    const int W = 2 * (1 + rng.uniform_int(3));
    Tensor x = random_tensor({B, Ci, H, W}, rng);
    Tensor K = random_tensor({Co, Ci, k, k}, rng);
    Tensor y = random_tensor({B, Co, H / 2, W / 2}, rng);
    Tensor zero_d = Tensor::zeros({Co});
    Tensor zero_u = Tensor::zeros({Ci});

    Tape t;
    Var down = conv2d_down(t, t.constant(x), t.constant(K), t.constant(zero_d));
    Var up = conv2d_up(t, t.constant(y), t.constant(K), t.constant(zero_u));
    real lhs = 0, rhs = 0;
    for (int i = 0; i < y.size(); ++i) lhs += t.val(down)[i] * y[i];
    for (int i = 0; i < x.size(); ++i) rhs += t.val(up)[i] * x[i];
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}
