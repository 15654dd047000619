#pragma once

// Small hand-rolled generators for the property suites.

#include <cstdint>
#include <random>

namespace saoi::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>{lo, hi}(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>{lo, hi}(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution{p}(rng_); }
  std::uint64_t u64() { return rng_(); }

  // Mixes in boundary values now and then so edges get exercised.
  double real_edgy(double lo, double hi) {
    switch (integer(0, 9)) {
      case 0: return lo;
      case 1: return hi;
      default: return real(lo, hi);
    }
  }

 private:
  std::mt19937_64 rng_;
};

inline constexpr int kCases = 1000;

}  // namespace saoi::testing
