#pragma once

#include <cstdint>
#include <vector>

#include "saoi/geometry.hpp"
#include "saoi/time.hpp"

namespace saoi {

/// Two-hop report: `reporter` tells `subject` how fresh the subject's
/// beacons look from where the reporter stands.
struct FeedbackRecord {
  int subject = -1;
  int reporter = -1;
  double weighted_paoi = 0.0;    // seconds
  double weighted_target = 0.0;  // seconds
  SimTime reported_at{};
};

struct BeaconFrame {
  int sender = -1;
  std::uint64_t sequence = 0;
  SimTime generated_at{};
  Vec2 sender_position;
  double sender_heading = 0.0;
  std::vector<FeedbackRecord> feedback;
  int size = 512;  // bytes on air, feedback included
};

}  // namespace saoi
