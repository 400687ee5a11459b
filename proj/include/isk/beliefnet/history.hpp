#pragma once

#include <utility>
#include <vector>

#include "isk/num/tensor.hpp"
#include "isk/worlds/env.hpp"

namespace isk::beliefnet {

using num::real;
using num::Tensor;

// Ordered question/answer record of one episode. Repeated ids are
// rejected; the asked-mask stays in sync with the recorded pairs.
class TrialHistory {
 public:
  explicit TrialHistory(const worlds::QuestionSpace* questions);

  void add(int question, Tensor answer);
  bool asked(int question) const;
  int count() const { return static_cast<int>(pairs_.size()); }
  const std::vector<std::pair<int, Tensor>>& pairs() const { return pairs_; }
  const std::vector<char>& mask() const { return mask_; }
  const worlds::QuestionSpace& questions() const { return *questions_; }
  int unasked_count() const;

 private:
  const worlds::QuestionSpace* questions_;
  std::vector<std::pair<int, Tensor>> pairs_;
  std::vector<char> mask_;
};

// Rows of ones over unasked questions, one row per history; feeds the
// policy's masked softmax.
Tensor unasked_rows(const std::vector<const TrialHistory*>& hs);

}  // namespace isk::beliefnet
