#pragma once

#include <string>
#include <vector>

#include "isk/worlds/env.hpp"

namespace isk::worlds {

// 27-symbol alphabet: 'a'..'z' map to 0..25, space (and every byte outside
// the alphabet) to 26.
constexpr int kAlphabet = 27;
constexpr int kSpaceSymbol = 26;

int symbol_from_byte(unsigned char b);
char symbol_char(int s);

struct Corpus {
  std::vector<unsigned char> symbols;  // values in [0, kAlphabet)
  long long coerced = 0;               // bytes outside a-z/space mapped to space

  long long size() const { return static_cast<long long>(symbols.size()); }
};

Corpus load_corpus(const std::string& path);
Corpus corpus_from_text(const std::string& text);

// Contiguous window with a uniform start inside [begin, end); end = -1
// means the corpus end. Disjoint [begin, end) ranges give disjoint
// train/eval secrets.
std::vector<int> sample_window(const Corpus& corpus, int window, Rng& rng,
                               long long begin = 0, long long end = -1);

// Symbol frequencies over [begin, end); drives the frequency baseline.
std::vector<long long> unigram_counts(const Corpus& corpus, long long begin = 0,
                                      long long end = -1);

// Occurrence mask of the guessed symbol plus the +1/-1 reward for a
// present/absent guess.
struct GuessOutcome {
  Tensor mask;  // [window], 1 where secret[i] == guess
  real reward = 0;
};
GuessOutcome hangman_answer(const std::vector<int>& secret, int guess);

// Guess-the-text: questions are the 27 symbols, answers are position
// masks, rewards are native +-1, and the episode ends early once every
// position is revealed. x is the window's one-hot encoding.
class HangmanEnv : public Environment {
 public:
  HangmanEnv(Corpus corpus, int window, long long begin = 0, long long end = -1);

  const char* name() const override { return "hangman"; }
  const QuestionSpace& questions() const override { return questions_; }
  int label_count() const override { return 0; }
  std::vector<int> x_shape() const override { return {window_ * kAlphabet}; }
  Example sample(Rng& rng) const override;
  StepResult observe(const Example& ex, int q) const override;
  bool finished(const Example& ex, const std::vector<int>& asked) const override;
  bool native_reward() const override { return true; }

  int window() const { return window_; }
  const Corpus& corpus() const { return corpus_; }
  long long begin() const { return begin_; }
  long long end() const { return end_; }

  // Secret symbols recovered from an example's one-hot encoding.
  std::vector<int> secret_of(const Example& ex) const;

 private:
  Corpus corpus_;
  int window_;
  long long begin_, end_;
  QuestionSpace questions_;
};

}  // namespace isk::worlds
