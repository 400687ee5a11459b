#pragma once

#include <vector>

#include "isk/num/rng.hpp"
#include "isk/num/tensor.hpp"

namespace isk::worlds {

using num::real;
using num::Rng;
using num::Tensor;

// Fixed catalogue of questions an environment accepts. Ids are dense in
// [0, count()); the answer arity is constant per id.
struct QuestionSpace {
  std::vector<int> arity;

  int count() const { return static_cast<int>(arity.size()); }
  int arity_of(int q) const;
  int total_arity() const;
  void validate() const;  // 0 < count < 1000, all arities positive
  static QuestionSpace uniform(int count, int arity);
};

// One drawn trial: the hidden observable, its target, and any conditioning
// the model sees from the first step on.
struct Example {
  Tensor x;          // [C,H,W] image or [n] feature/one-hot vector
  int y = -1;        // class index; -1 when the task has no label
  Tensor statement;  // multi-hot conditioning vector (empty when unused)
  Tensor summary;    // low-res global view [1,h,w] (empty when unused)
};

struct StepResult {
  Tensor answer;    // [arity(q)]
  real reward = 0;  // native extrinsic reward; 0 for label-based tasks
};

struct PixelGeometry {
  int channels = 0, height = 0, width = 0, block = 0;
  int grid_h() const { return height / block; }
  int grid_w() const { return width / block; }
};

// An environment is immutable after construction; sample() and observe()
// are pure (given the rng state), so episodes may run concurrently.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const char* name() const = 0;
  virtual const QuestionSpace& questions() const = 0;
  virtual int label_count() const = 0;  // 0 = no label head
  virtual std::vector<int> x_shape() const = 0;
  virtual Example sample(Rng& rng) const = 0;
  // Deterministic oracle: the same (example, q) always yields the same
  // answer and reward.
  virtual StepResult observe(const Example& ex, int q) const = 0;
  // True once further questions cannot reveal anything new (e.g. a Hangman
  // secret fully uncovered); `asked` holds the distinct ids asked so far.
  virtual bool finished(const Example& ex, const std::vector<int>& asked) const {
    (void)ex;
    (void)asked;
    return false;
  }
  virtual bool native_reward() const { return false; }
  virtual const PixelGeometry* pixel_geometry() const { return nullptr; }
  virtual int statement_size() const { return 0; }
  virtual std::vector<int> summary_shape() const { return {}; }
};

// Values of block q of the block grid (row-major over blocks), returned in
// row-major pixel order, channel-major for [C,H,W] images.
Tensor observe_pixels(const Tensor& img, int q, int block);

}  // namespace isk::worlds
