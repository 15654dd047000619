#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saoi/adaptive.hpp"
#include "saoi/aoi.hpp"
#include "saoi/channel.hpp"
#include "saoi/geometry.hpp"
#include "saoi/mac.hpp"
#include "saoi/metrics.hpp"
#include "saoi/time.hpp"

namespace saoi {

enum class BeaconMode { fixed, adaptive };

BeaconMode parse_beacon_mode(std::string_view name);
std::string_view to_string(BeaconMode mode);

struct MobilityConfig {
  Vec2 bounds{550.0, 550.0};  // meters
  double block_pitch = 50.0;  // meters between road centre lines
  double building_inset = 7.0;
  double speed = 13.9;        // m/s
  double step = 0.1;          // s between position updates

  void validate() const;
};

struct AdaptiveConfig {
  PidConfig pid;
  double initial_rate = 10.0;         // Hz
  double staleness_periods = 2.0;     // feedback lifetime in controller periods
  std::size_t max_feedback_records = 60;

  void validate() const;
};

/// Fixed vehicle pose, used instead of random placement when given.
struct Placement {
  Vec2 position;
  double heading = 0.0;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::freespace_static;
  int vehicle_count = 200;
  double sim_time = 10.0;  // s
  double warmup = 0.0;     // s; samples before it are discarded
  BeaconMode beacon_mode = BeaconMode::fixed;
  double beacon_rate = 10.0;  // Hz, fixed mode
  // Every entry is evaluated on the same run; the adaptive controller
  // steers on the first one.
  std::vector<WeightParams> weight_params{WeightParams{}};
  TargetConfig target;
  std::uint64_t seed = 1;
  ChannelConfig channel;
  MacConfig mac;
  MobilityConfig mobility;
  AdaptiveConfig adaptive;
  std::vector<Placement> placements;

  bool keep_samples = true;      // store every post-warm-up observation
  bool log_receptions = false;   // raw (generated, received) pairs
  bool trace_receptions = false; // every transmission and per-receiver outcome

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Runs one scenario to completion. Same config, same result, bit for bit.
MetricsStore run_scenario(const ScenarioConfig& cfg);

struct SweepCell {
  double beacon_rate = 0.0;  // fixed mode rate or adaptive initial rate
  WeightParams params;
  std::uint64_t seed = 0;
  std::shared_ptr<const MetricsStore> store;  // shared by cells of one pass
  std::string error;  // non-empty when the run failed
};

struct SweepOptions {
  int max_parallel = 0;  // 0: hardware concurrency
  // Called once per finished run, in job order. Returning false drops the
  // store from the result to bound memory.
  std::function<bool(const ScenarioConfig&, const MetricsStore&)> on_run;
};

/// Fixed mode: one run per (rate, seed) evaluates every weighting at once.
/// Adaptive mode: the controller depends on the weighting, so each
/// (rate, params, seed) is its own run. A failing run marks its cells and
/// the sweep carries on.
std::vector<SweepCell> sweep(const ScenarioConfig& base, const std::vector<double>& rates,
                             const std::vector<WeightParams>& params,
                             const std::vector<std::uint64_t>& seeds,
                             const SweepOptions& options = {});

}  // namespace saoi
