#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "saoi/aoi.hpp"
#include "saoi/beacon.hpp"
#include "saoi/time.hpp"

namespace saoi {

enum class DerivativeSign {
  previous_minus_current,  // (e(t - dt) - e(t)) / dt, the default
  current_minus_previous,  // conventional backward difference
};

struct PidConfig {
  double gain_p = 1.0;
  double gain_i = 0.0;
  double gain_d = 0.1;
  double interval_min = 0.010;  // s (100 Hz)
  double interval_max = 100.0;  // s (0.01 Hz)
  DerivativeSign derivative_sign = DerivativeSign::previous_minus_current;
};

/// Controller state of one vehicle; `interval` is its current beacon interval.
struct PidState {
  PidConfig cfg;
  double prev_error = 0.0;
  double integral = 0.0;
  SimTime last_exec{};
  double interval = 0.1;
};

/// Discrete PID output for error `error` at `now`; updates the error memory.
/// Throws std::invalid_argument unless now > state.last_exec.
double pid_step(PidState& state, double error, SimTime now);

/// Adds `u` to the interval and clamps it to [interval_min, interval_max].
void apply_interval(PidState& state, double u);

/// The controller runs every 2*T seconds.
SimTime controller_period(TargetConfig t);

/// Next execution strictly after `last_exec`.
SimTime controller_schedule(const PidState& state, TargetConfig t);

/// Reporter side: accumulates weighted PAoI per subject between two of the
/// reporter's own beacons and stages one record per subject for piggybacking.
class FeedbackStager {
 public:
  explicit FeedbackStager(int reporter = -1) : reporter_(reporter) {}

  /// Folds `sample` (measured by this reporter about sample.sender) into the
  /// subject's running mean and returns the record now staged for it.
  FeedbackRecord make_feedback(const PAoISample& sample, SimTime now);

  /// Staged records for the next beacon, newest first, at most `max_records`.
  /// Shipping resets the running means.
  std::vector<FeedbackRecord> take_staged(std::size_t max_records);

  std::size_t staged_count() const { return acc_.size(); }

 private:
  struct Acc {
    double sum_paoi = 0.0;
    double sum_target = 0.0;
    std::int64_t n = 0;
    SimTime last{};
  };
  int reporter_;
  std::map<int, Acc> acc_;
};

/// Subject side: newest record per reporter, evicted once older than the
/// staleness window.
class FeedbackInbox {
 public:
  explicit FeedbackInbox(int subject = -1) : subject_(subject) {}

  /// Keeps records addressed to this subject; others are ignored.
  void ingest(std::span<const FeedbackRecord> records);

  struct Means {
    double weighted_paoi = 0.0;
    double weighted_target = 0.0;
    std::size_t reporters = 0;
  };

  /// Means over reporters whose record is no older than `staleness`.
  /// std::nullopt when no reporter is live.
  std::optional<Means> live_means(SimTime now, SimTime staleness);

  std::size_t size() const { return latest_.size(); }

 private:
  int subject_;
  std::map<int, FeedbackRecord> latest_;
};

}  // namespace saoi
