#include "isk/beliefnet/history.hpp"

#include "isk/num/error.hpp"

namespace isk::beliefnet {

TrialHistory::TrialHistory(const worlds::QuestionSpace* questions)
    : questions_(questions) {
  ISK_CHECK(questions_ != nullptr, "history needs a question space");
  questions_->validate();
  mask_.assign(static_cast<size_t>(questions_->count()), 0);
}

void TrialHistory::add(int question, Tensor answer) {
  const int arity = questions_->arity_of(question);  // also validates the id
  ISK_CHECK(!asked(question), "question " << question << " was already asked");
  ISK_CHECK(answer.size() == arity, "answer for question "
                                        << question << " has size " << answer.size()
                                        << ", arity is " << arity);
  mask_[static_cast<size_t>(question)] = 1;
  pairs_.emplace_back(question, std::move(answer));
}

bool TrialHistory::asked(int question) const {
  ISK_CHECK(question >= 0 && question < questions_->count(),
            "question id " << question << " outside [0, " << questions_->count() << ")");
  return mask_[static_cast<size_t>(question)] != 0;
}

int TrialHistory::unasked_count() const {
  int n = 0;
  for (char m : mask_) n += m == 0;
  return n;
}

Tensor unasked_rows(const std::vector<const TrialHistory*>& hs) {
  ISK_CHECK(!hs.empty(), "no histories given");
  const int B = static_cast<int>(hs.size());
  const int Q = hs[0]->questions().count();
  Tensor rows({B, Q});
  for (int b = 0; b < B; ++b) {
    ISK_CHECK(hs[static_cast<size_t>(b)]->questions().count() == Q,
              "histories disagree on the question count");
    for (int q = 0; q < Q; ++q)
      rows.at(b, q) = hs[static_cast<size_t>(b)]->mask()[static_cast<size_t>(q)] ? 0 : 1;
  }
  return rows;
}

}  // namespace isk::beliefnet
