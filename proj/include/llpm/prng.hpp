#pragma once

#include <cstdint>

namespace llpm {

// splitmix64: tiny, portable, identical output on every platform.
// All randomness in the toolchain (stimulus, trials, partition restarts)
// flows through this so results are reproducible from a single seed.
class Prng {
public:
  explicit Prng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, n); n == 0 yields 0
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  // Bernoulli(p). p <= 0 and p >= 1 are exact and consume no state.
  bool chance(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
  }

  // derive an independent stream, e.g. one per trial
  static uint64_t mix(uint64_t seed, uint64_t salt) {
    Prng p(seed ^ (0x632be59bd9b4e019ull * (salt + 1)));
    return p.next();
  }

private:
  uint64_t state_;
};

} // namespace llpm
