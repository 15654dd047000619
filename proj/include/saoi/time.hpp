#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace saoi {

/// Simulation clock. Integer nanoseconds keep event ordering exact.
using SimTime = std::chrono::duration<std::int64_t, std::nano>;

inline SimTime from_seconds(double seconds) {
  return SimTime{static_cast<std::int64_t>(std::llround(seconds * 1e9))};
}

inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-9; }

}  // namespace saoi
