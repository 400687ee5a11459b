#include <algorithm>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "isk/beliefnet/encode.hpp"
#include "isk/beliefnet/history.hpp"
#include "isk/num/error.hpp"
#include "isk/num/rng.hpp"

using namespace isk;
using beliefnet::TrialHistory;
using num::Rng;
using num::Tensor;
using num::real;
using worlds::QuestionSpace;

namespace {

Tensor scalar_answer(real v) { return Tensor::from({1}, {v}); }

}  // namespace

TEST_CASE("trial history records pairs and rejects misuse") {
  QuestionSpace qs = QuestionSpace::uniform(5, 1);
  TrialHistory h(&qs);
  CHECK(h.count() == 0);
  CHECK(h.unasked_count() == 5);
  CHECK_FALSE(h.asked(3));

  h.add(3, scalar_answer(0.5));
  h.add(0, scalar_answer(-1.0));
  CHECK(h.count() == 2);
  CHECK(h.asked(3));
  CHECK(h.asked(0));
  CHECK_FALSE(h.asked(1));
  CHECK(h.unasked_count() == 3);
  REQUIRE(h.pairs().size() == 2);
  CHECK(h.pairs()[0].first == 3);
  CHECK(h.pairs()[1].first == 0);
  CHECK(h.pairs()[0].second[0] == doctest::Approx(0.5));

  SUBCASE("repeating a question is rejected") {
    CHECK_THROWS_AS(h.add(3, scalar_answer(0.1)), num::Error);
  }
  SUBCASE("answer arity must match the question") {
    CHECK_THROWS_AS(h.add(1, Tensor::from({2}, {0.0, 1.0})), num::Error);
  }
  SUBCASE("question ids must be in range") {
    CHECK_THROWS_AS(h.add(5, scalar_answer(0.0)), num::Error);
    CHECK_THROWS_AS(h.add(-1, scalar_answer(0.0)), num::Error);
  }
}

TEST_CASE("unasked rows carry ones exactly on unasked questions") {
  QuestionSpace qs = QuestionSpace::uniform(4, 2);
  TrialHistory a(&qs), b(&qs);
  a.add(1, Tensor::from({2}, {1.0, 0.0}));
  a.add(2, Tensor::from({2}, {0.0, 0.0}));
  Tensor rows = beliefnet::unasked_rows({&a, &b});
  REQUIRE(rows.shape() == std::vector<int>{2, 4});
  CHECK(rows.at(0, 0) == 1);
  CHECK(rows.at(0, 1) == 0);
  CHECK(rows.at(0, 2) == 0);
  CHECK(rows.at(0, 3) == 1);
  for (int q = 0; q < 4; ++q) CHECK(rows.at(1, q) == 1);
}

TEST_CASE("flat encoding lays out the answer table then the asked-mask") {
  QuestionSpace qs = QuestionSpace::uniform(4, 1);

  SUBCASE("empty history encodes to zeros") {
    TrialHistory h(&qs);
    Tensor e = beliefnet::encode_fc(h);
    REQUIRE(e.shape() == std::vector<int>{8});
    for (int i = 0; i < 8; ++i) CHECK(e[i] == 0);
  }

  SUBCASE("a single scalar answer fills its slot and mask bit") {
    TrialHistory h(&qs);
    h.add(2, scalar_answer(0.7));
    Tensor e = beliefnet::encode_fc(h);
    std::vector<real> want = {0, 0, 0.7, 0, 0, 0, 1, 0};
    REQUIRE(e.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(e[i] == doctest::Approx(want[i]));
  }

  SUBCASE("hangman-shaped space encodes to 459 inputs") {
    QuestionSpace hang = QuestionSpace::uniform(27, 16);
    CHECK(beliefnet::encode_fc_width(hang) == 27 * 16 + 27);
    TrialHistory h(&hang);
    CHECK(beliefnet::encode_fc(h).size() == 459);
  }

  SUBCASE("mixed arities use cumulative offsets") {
    QuestionSpace mixed;
    mixed.arity = {2, 3, 1};
    TrialHistory h(&mixed);
    h.add(1, Tensor::from({3}, {0.25, 0.5, 0.75}));
    Tensor e = beliefnet::encode_fc(h);
    REQUIRE(e.size() == 6 + 3);
    std::vector<real> want = {0, 0, 0.25, 0.5, 0.75, 0, 0, 1, 0};
    for (int i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(want[i]));
  }

  SUBCASE("batched rows match per-history encodings") {
    TrialHistory a(&qs), b(&qs);
    a.add(0, scalar_answer(0.1));
    b.add(3, scalar_answer(0.9));
    b.add(1, scalar_answer(0.2));
    Tensor batch = beliefnet::encode_fc_batch({&a, &b});
    REQUIRE(batch.shape() == std::vector<int>{2, 8});
    Tensor ea = beliefnet::encode_fc(a), eb = beliefnet::encode_fc(b);
    for (int i = 0; i < 8; ++i) {
      CHECK(batch.at(0, i) == ea[i]);
      CHECK(batch.at(1, i) == eb[i]);
    }
  }
}

TEST_CASE("permuting question ids permutes encoded slots identically") {
  const int n = 7;
  QuestionSpace qs = QuestionSpace::uniform(n, 1);
  Rng rng = Rng::derive(99, {1});
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<size_t>(i)],
              perm[static_cast<size_t>(rng.uniform_int(i + 1))]);

  for (int trial = 0; trial < 50; ++trial) {
    TrialHistory h(&qs), hp(&qs);
    const int asked = 1 + static_cast<int>(rng.uniform_int(n - 1));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(order[static_cast<size_t>(i)],
                order[static_cast<size_t>(rng.uniform_int(i + 1))]);
    for (int k = 0; k < asked; ++k) {
      const real v = static_cast<real>(rng.next_double());
      h.add(order[static_cast<size_t>(k)], scalar_answer(v));
      hp.add(perm[static_cast<size_t>(order[static_cast<size_t>(k)])],
             scalar_answer(v));
    }
    Tensor e = beliefnet::encode_fc(h), ep = beliefnet::encode_fc(hp);
    for (int q = 0; q < n; ++q) {
      CHECK(ep[perm[static_cast<size_t>(q)]] == e[q]);          // answer table
      CHECK(ep[n + perm[static_cast<size_t>(q)]] == e[n + q]);  // asked mask
    }
  }
}

TEST_CASE("image encoding paints answered blocks and a visibility mask") {
  worlds::PixelGeometry g{1, 8, 8, 4};
  QuestionSpace qs = QuestionSpace::uniform(g.grid_h() * g.grid_w(), 16);

  SUBCASE("no questions asked leaves every channel zero") {
    TrialHistory h(&qs);
    Tensor stack = beliefnet::encode_image(h, g);
    REQUIRE(stack.shape() == std::vector<int>{2, 8, 8});
    for (int i = 0; i < stack.size(); ++i) CHECK(stack[i] == 0);
  }

  SUBCASE("one block asked sets exactly 16 mask bits and its pixels") {
    TrialHistory h(&qs);
    Tensor answer({16});
    for (int i = 0; i < 16; ++i) answer[i] = real(i + 1) / 16;
    h.add(1, answer);  // top-right block: rows 0..3, cols 4..7
    Tensor stack = beliefnet::encode_image(h, g);
    int mask_on = 0;
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        const real m = stack[64 + r * 8 + c];
        const bool inside = r < 4 && c >= 4;
        CHECK(m == (inside ? 1 : 0));
        mask_on += m == 1 ? 1 : 0;
        const real px = stack[r * 8 + c];
        if (inside)
          CHECK(px == doctest::Approx(real(r * 4 + (c - 4) + 1) / 16));
        else
          CHECK(px == 0);
      }
    CHECK(mask_on == 16);
  }

  SUBCASE("multi-channel answers are painted channel-major") {
    worlds::PixelGeometry g3{3, 4, 4, 2};
    QuestionSpace qs3 = QuestionSpace::uniform(4, 12);
    TrialHistory h(&qs3);
    Tensor answer({12});
    for (int i = 0; i < 12; ++i) answer[i] = real(i);
    h.add(3, answer);  // bottom-right block
    Tensor stack = beliefnet::encode_image(h, g3);
    REQUIRE(stack.shape() == std::vector<int>{4, 4, 4});
    for (int ch = 0; ch < 3; ++ch)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(stack[ch * 16 + (2 + i) * 4 + (2 + j)] ==
                doctest::Approx(ch * 4 + i * 2 + j));
    CHECK(stack[3 * 16 + 2 * 4 + 2] == 1);
    CHECK(stack[3 * 16 + 0] == 0);
  }

  SUBCASE("batched stacks match per-history stacks") {
    TrialHistory a(&qs), b(&qs);
    Tensor ans({16});
    ans.fill(real(0.5));
    a.add(0, ans);
    Tensor batch = beliefnet::encode_image_batch({&a, &b}, g);
    REQUIRE(batch.shape() == std::vector<int>{2, 2, 8, 8});
    Tensor ea = beliefnet::encode_image(a, g);
    for (int i = 0; i < ea.size(); ++i) {
      CHECK(batch[i] == ea[i]);
      CHECK(batch[ea.size() + i] == 0);
    }
  }

  SUBCASE("the stack never reads the underlying example") {
    // The encoding is a function of the history alone, so two trials with
    // different hidden images but the same (empty) history are identical.
    TrialHistory empty_a(&qs), empty_b(&qs);
    Tensor sa = beliefnet::encode_image(empty_a, g);
    Tensor sb = beliefnet::encode_image(empty_b, g);
    REQUIRE(sa.size() == sb.size());
    for (int i = 0; i < sa.size(); ++i) CHECK(sa[i] == sb[i]);
  }
}

TEST_CASE("statement tiling repeats each slot over the full map") {
  Tensor s = Tensor::from({3}, {0.0, 1.0, 0.5});
  Tensor map = beliefnet::tile_statement(s, 16);
  REQUIRE(map.shape() == std::vector<int>{3, 16, 16});
  for (int ch = 0; ch < 3; ++ch)
    for (int i = 0; i < 256; ++i) CHECK(map[ch * 256 + i] == s[ch]);
  CHECK_THROWS_AS(beliefnet::tile_statement(Tensor({2, 2}), 4), num::Error);
}
