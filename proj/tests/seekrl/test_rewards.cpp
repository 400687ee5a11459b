#include <cmath>

#include "doctest.h"

#include "isk/num/error.hpp"
#include "isk/seekrl/rewards.hpp"

using namespace isk::seekrl;
using isk::num::Error;

TEST_CASE("extrinsic label reward") {
  Tensor fy = Tensor::from({1, 3}, {0.5, 0.5, 0.0});
  SUBCASE("certain correct belief scores zero") {
    Tensor sure = Tensor::from({1, 2}, {0.0, 1.0});
    CHECK(extrinsic_label_reward(sure, 0, 1, real(1e-6)) == 0.0);
  }
  SUBCASE("half belief scores ln 0.5") {
    CHECK(extrinsic_label_reward(fy, 0, 0, real(1e-6)) ==
          doctest::Approx(std::log(0.5)));
  }
  SUBCASE("zero belief is floored") {
    CHECK(extrinsic_label_reward(fy, 0, 2, real(1e-6)) ==
          doctest::Approx(std::log(1e-6)));
  }
  SUBCASE("invalid label index rejected") {
    CHECK_THROWS_AS(extrinsic_label_reward(fy, 0, 3, real(1e-6)), Error);
    CHECK_THROWS_AS(extrinsic_label_reward(fy, 0, -1, real(1e-6)), Error);
  }
}

TEST_CASE("intrinsic level") {
  SUBCASE("perfect Bernoulli prediction scores zero") {
    Tensor x = Tensor::from({4}, {1.0, 0.0, 0.0, 1.0});
    CHECK(intrinsic_level(x, x, IntrinsicKind::kBernoulliDiff, real(1e-6)) == 0.0);
  }
  SUBCASE("maximal-entropy prediction scores -N ln 2") {
    Tensor x = Tensor::from({5}, {1.0, 0.0, 1.0, 0.0, 1.0});
    Tensor f = Tensor::full({5}, 0.5);
    CHECK(intrinsic_level(f, x, IntrinsicKind::kBernoulliDiff, real(1e-6)) ==
          doctest::Approx(-5.0 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("mixed three-pixel case matches an elementwise reference") {
    Tensor x = Tensor::from({3}, {1.0, 0.0, 0.25});
    Tensor f = Tensor::from({3}, {0.8, 0.1, 0.5});
    real want = 0;
    for (int i = 0; i < 3; ++i)
      want += x[i] * std::log(f[i]) + (1 - x[i]) * std::log(1 - f[i]);
    CHECK(intrinsic_level(f, x, IntrinsicKind::kBernoulliDiff, real(1e-6)) ==
          doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("gaussian level is the negative half squared distance") {
    Tensor x = Tensor::from({2}, {2.0, -1.0});
    Tensor f = Tensor::from({2}, {1.0, 1.0});
    CHECK(intrinsic_level(f, x, IntrinsicKind::kGaussianDiff, real(1e-6)) ==
          doctest::Approx(-0.5 * (1.0 + 4.0)));
  }
  SUBCASE("image-shaped tensors are accepted") {
    Tensor x = Tensor::zeros({1, 4, 4});
    Tensor f = Tensor::full({1, 4, 4}, 0.5);
    CHECK(intrinsic_level(f, x, IntrinsicKind::kBernoulliDiff, real(1e-6)) ==
          doctest::Approx(-16.0 * std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("reward spec validation") {
  RewardSpec spec;
  spec.extrinsic = ExtrinsicKind::kNone;
  spec.intrinsic = IntrinsicKind::kNone;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.intrinsic = IntrinsicKind::kBernoulliDiff;
  CHECK_NOTHROW(spec.validate());
  spec.eps_prob = real(0.5);
  CHECK_THROWS_AS(spec.validate(), Error);
}
