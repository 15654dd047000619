#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace saoi {

using Rng = std::mt19937_64;

/// Subsystems that draw random numbers. Each gets its own stream so that
/// changing the draws of one never shifts the sequence seen by another.
enum class RngStream : std::uint32_t {
  placement = 1,
  mobility = 2,
  backoff = 3,
  beacon_phase = 4,
  controller_phase = 5,
  loss = 6,
};

inline Rng make_stream(std::uint64_t master_seed, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x5a0142u};
  return Rng{seq};
}

/// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>{lo, hi}(rng);
}

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>{lo, hi}(rng);
}

}  // namespace saoi
