#include "isk/worlds/hangman.hpp"

#include <fstream>

#include "isk/num/error.hpp"

namespace isk::worlds {

int symbol_from_byte(unsigned char b) {
  if (b >= 'a' && b <= 'z') return b - 'a';
  return kSpaceSymbol;
}

char symbol_char(int s) {
  ISK_CHECK(s >= 0 && s < kAlphabet, "symbol " << s << " outside the alphabet");
  return s == kSpaceSymbol ? ' ' : static_cast<char>('a' + s);
}

Corpus corpus_from_text(const std::string& text) {
  Corpus c;
  c.symbols.reserve(text.size());
  for (unsigned char b : text) {
    c.symbols.push_back(static_cast<unsigned char>(symbol_from_byte(b)));
    if (!((b >= 'a' && b <= 'z') || b == ' ')) ++c.coerced;
  }
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ISK_CHECK(f.good(), "cannot open corpus file " << path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Corpus c = corpus_from_text(text);
  ISK_CHECK(!c.symbols.empty(), "corpus file " << path << " is empty");
  return c;
}

namespace {

void check_range(const Corpus& corpus, long long& begin, long long& end, int window) {
  if (end < 0) end = corpus.size();
  ISK_CHECK(begin >= 0 && begin < end && end <= corpus.size(),
            "corpus range [" << begin << ", " << end << ") invalid for "
                             << corpus.size() << " symbols");
  ISK_CHECK(end - begin >= window, "corpus range holds " << end - begin
                                                         << " symbols, window needs "
                                                         << window);
}

}  // namespace

std::vector<int> sample_window(const Corpus& corpus, int window, Rng& rng,
                               long long begin, long long end) {
  ISK_CHECK(window > 0, "window must be positive, got " << window);
  check_range(corpus, begin, end, window);
  const long long starts = end - begin - window + 1;
  const long long start =
      begin + static_cast<long long>(rng.next_u64() % static_cast<uint64_t>(starts));
  std::vector<int> out(static_cast<size_t>(window));
  for (int i = 0; i < window; ++i)
    out[static_cast<size_t>(i)] = corpus.symbols[static_cast<size_t>(start + i)];
  return out;
}

std::vector<long long> unigram_counts(const Corpus& corpus, long long begin, long long end) {
  check_range(corpus, begin, end, 1);
  std::vector<long long> counts(kAlphabet, 0);
  for (long long i = begin; i < end; ++i)
    ++counts[corpus.symbols[static_cast<size_t>(i)]];
  return counts;
}

GuessOutcome hangman_answer(const std::vector<int>& secret, int guess) {
  ISK_CHECK(guess >= 0 && guess < kAlphabet,
            "guess " << guess << " outside the " << kAlphabet << "-symbol alphabet");
  GuessOutcome out;
  out.mask = Tensor({static_cast<int>(secret.size())});
  bool any = false;
  for (size_t i = 0; i < secret.size(); ++i)
    if (secret[i] == guess) {
      out.mask[static_cast<int>(i)] = 1;
      any = true;
    }
  out.reward = any ? real(1) : real(-1);
  return out;
}

HangmanEnv::HangmanEnv(Corpus corpus, int window, long long begin, long long end)
    : corpus_(std::move(corpus)), window_(window), begin_(begin), end_(end) {
  check_range(corpus_, begin_, end_, window_);
  if (end_ < 0) end_ = corpus_.size();
  questions_ = QuestionSpace::uniform(kAlphabet, window_);
}

Example HangmanEnv::sample(Rng& rng) const {
  const std::vector<int> secret = sample_window(corpus_, window_, rng, begin_, end_);
  Example ex;
  ex.x = Tensor({window_ * kAlphabet});
  for (int i = 0; i < window_; ++i)
    ex.x[i * kAlphabet + secret[static_cast<size_t>(i)]] = 1;
  return ex;
}

std::vector<int> HangmanEnv::secret_of(const Example& ex) const {
  ISK_CHECK(ex.x.size() == window_ * kAlphabet,
            "example encoding " << ex.x.shape_str() << " does not match window "
                                << window_);
  std::vector<int> secret(static_cast<size_t>(window_), -1);
  for (int i = 0; i < window_; ++i)
    for (int s = 0; s < kAlphabet; ++s)
      if (ex.x[i * kAlphabet + s] == 1) {
        secret[static_cast<size_t>(i)] = s;
        break;
      }
  for (int i = 0; i < window_; ++i)
    ISK_CHECK(secret[static_cast<size_t>(i)] >= 0,
              "position " << i << " of the example encodes no symbol");
  return secret;
}

StepResult HangmanEnv::observe(const Example& ex, int q) const {
  const GuessOutcome out = hangman_answer(secret_of(ex), q);
  StepResult r;
  r.answer = out.mask;
  r.reward = out.reward;
  return r;
}

bool HangmanEnv::finished(const Example& ex, const std::vector<int>& asked) const {
  bool guessed[kAlphabet] = {};
  for (int q : asked) {
    ISK_CHECK(q >= 0 && q < kAlphabet, "asked id " << q << " outside the alphabet");
    guessed[q] = true;
  }
  for (int s : secret_of(ex))
    if (!guessed[s]) return false;
  return true;
}

}  // namespace isk::worlds
