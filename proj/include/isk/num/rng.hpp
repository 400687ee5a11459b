#pragma once

#include <cstdint>
#include <initializer_list>

namespace isk::num {

// Counter-based pseudo-random generator. The stream is
//   out_i = mix64(key + i * GAMMA)
// where mix64 is the SplitMix64 finalizer and GAMMA the golden-ratio
// increment. Streams are split by hashing labels into the key, so
// (seed, update, episode) paths give independent, reproducible streams
// regardless of draw order elsewhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(seed), counter_(0) {}

  // Derives an independent stream from a label path, e.g.
  // Rng::derive(seed, {kStreamActions, update, episode}).
  static Rng derive(uint64_t seed, std::initializer_list<uint64_t> path) {
    uint64_t key = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
    for (uint64_t label : path) key = mix64(key ^ mix64(label + 0xbf58476d1ce4e5b9ULL));
    Rng r(0);
    r.key_ = key;
    return r;
  }

  uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal();

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }
  void restore(uint64_t key, uint64_t counter) {
    key_ = key;
    counter_ = counter;
    have_spare_ = false;
  }

  static uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  uint64_t key_;
  uint64_t counter_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream labels used by the harness; documented so that runs are replayable.
enum StreamLabel : uint64_t {
  kStreamInit = 1,      // parameter initialization
  kStreamData = 2,      // example generation / dataset indexing
  kStreamActions = 3,   // action sampling during rollouts
  kStreamEval = 4,      // evaluation episodes
  kStreamEnv = 5,       // in-environment randomness (clutter, scenes)
};

}  // namespace isk::num
