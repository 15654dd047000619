#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "saoi/geometry.hpp"
#include "saoi/time.hpp"

namespace saoi {

inline constexpr double kSpeedOfLight = 299792458.0;

struct ChannelConfig {
  double carrier_frequency = 5.89e9;  // Hz
  double tx_power = 13.01;            // dBm (20 mW)
  double path_loss_exponent = 2.0;
  double noise_floor = -104.0;        // dBm
  double sensitivity = -92.0;         // dBm
  // Busy detection level; unset means "same as sensitivity".
  std::optional<double> carrier_sense_threshold;
  double sinr_threshold = 8.0;        // dB
  double wall_attenuation = 9.0;      // dB per wall crossing
  double interior_attenuation = 0.4;  // dB per meter inside a building
  bool obstacle_shadowing_enabled = true;
  double propagation_delay = 1e-6;    // s, distance independent
  // Independent per-reception erasure probability applied on top of the
  // SINR decision. Zero in every reproduced experiment; used to probe the
  // geometric-retrial behaviour of a single link.
  double extra_loss_probability = 0.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  double busy_threshold() const { return carrier_sense_threshold.value_or(sensitivity); }
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Log-distance (Friis for exponent 2) path loss; distances below 1 m are clamped.
double path_loss_db(double distance, const ChannelConfig& cfg);

/// Wall-count plus interior-length shadowing of segment a-b.
double obstacle_loss_db(Vec2 a, Vec2 b, const RoadNetwork& network, const ChannelConfig& cfg);

/// One frame on air.
struct TransmissionEvent {
  int sender = -1;
  std::uint64_t id = 0;
  SimTime air_start{};
  SimTime air_end{};
  Vec2 tx_position;
};

double received_power_dbm(Vec2 tx_position, Vec2 rx_position, const RoadNetwork& network,
                          const ChannelConfig& cfg);
double received_power_dbm(const TransmissionEvent& tx, Vec2 rx_position,
                          const RoadNetwork& network, const ChannelConfig& cfg);

enum class ReceptionOutcome { success, below_sensitivity, collision };
std::string_view to_string(ReceptionOutcome outcome);

/// Whole-frame SINR decision for `target` at `rx`. `overlapping` holds every
/// other transmission whose airtime intersects the target, including those
/// of the receiver itself (which preempt reception).
ReceptionOutcome decide_reception(const TransmissionEvent& target, const VehicleState& rx,
                                  std::span<const TransmissionEvent> overlapping,
                                  const RoadNetwork& network, const ChannelConfig& cfg);

/// Empirical delivery probability rx_count / tx_count.
double measure_success_prob(std::int64_t tx_count, std::int64_t rx_count);

}  // namespace saoi
