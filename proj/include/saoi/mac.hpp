#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "saoi/beacon.hpp"
#include "saoi/time.hpp"

namespace saoi {

struct MacConfig {
  double bitrate = 6e6;      // bit/s
  int cw_slots = 4;          // backoff drawn from {0, ..., cw_slots - 1}
  double slot_time = 13e-6;  // s
  double aifs = 58e-6;       // s
  double preamble = 32e-6;   // s
  double plcp = 8e-6;        // s
  int beacon_size = 512;     // bytes
  int queue_capacity = 1;

  void validate() const;
};

/// Preamble + PLCP header + payload time, in seconds.
double frame_airtime(int size_bytes, const MacConfig& cfg);

enum class EnqueueResult {
  started_access,  // queue was empty and idle; channel access begins
  replaced,        // a waiting frame was discarded in favour of this one
  queued,          // queued behind the frame currently on air, or waiting for a busy channel
};

/// Broadcast CSMA/CA entity of one vehicle: one-slot queue, AIFS sensing,
/// uniform backoff that freezes while the channel is busy, no retransmission.
///
/// The owner drives it with channel-state edges and wake-ups; every call that
/// may need a timer returns the absolute time at which the owner must call
/// back, tagged with `epoch()`. A timer whose epoch no longer matches is stale.
class CsmaMac {
 public:
  enum class Phase { empty, waiting_aifs, counting, transmitting };

  explicit CsmaMac(const MacConfig& cfg);

  /// Offers a freshly generated frame. `channel_busy` is the carrier-sense
  /// state at `now`. Returns the AIFS wake-up time if access starts now.
  std::optional<SimTime> enqueue(BeaconFrame frame, SimTime now, bool channel_busy,
                                 EnqueueResult* result = nullptr);

  /// Channel sensed busy at `now`: pending timers are cancelled and the
  /// backoff counter keeps only the fully elapsed idle slots.
  void on_channel_busy(SimTime now);

  /// Channel sensed idle at `now`. Returns the AIFS wake-up time if a frame waits.
  std::optional<SimTime> on_channel_idle(SimTime now);

  /// A full AIFS of idle channel elapsed. Draws the backoff if none is
  /// pending (via `draw(cw_slots)`) and returns the transmission start time.
  std::optional<SimTime> on_aifs_elapsed(SimTime now, const std::function<int(int)>& draw);

  /// Backoff reached zero: the queued frame leaves the queue and goes on air.
  BeaconFrame begin_transmission(SimTime now);

  /// Airtime over. The caller reports the resulting channel state through
  /// on_channel_idle when the medium is clear.
  void end_transmission(SimTime now);

  Phase phase() const { return phase_; }
  bool has_queued() const { return queued_.has_value(); }
  const std::optional<BeaconFrame>& queued() const { return queued_; }
  int backoff_remaining() const { return backoff_remaining_; }
  std::uint64_t epoch() const { return epoch_; }

  std::int64_t enqueued_count() const { return enqueued_; }
  std::int64_t replaced_count() const { return replaced_; }
  std::int64_t transmitted_count() const { return transmitted_; }

 private:
  SimTime slot() const { return slot_; }

  MacConfig cfg_;
  SimTime slot_;
  SimTime aifs_;
  std::optional<BeaconFrame> queued_;
  Phase phase_ = Phase::empty;
  bool backoff_drawn_ = false;
  int backoff_remaining_ = 0;
  SimTime count_start_{};
  std::uint64_t epoch_ = 0;
  std::int64_t enqueued_ = 0;
  std::int64_t replaced_ = 0;
  std::int64_t transmitted_ = 0;
};

/// Half-open busy interval [start, end).
struct Interval {
  SimTime start{};
  SimTime end{};
};

/// Per-vehicle union of busy intervals.
class BusyAccumulator {
 public:
  explicit BusyAccumulator(int vehicle_count = 0) : per_node_(vehicle_count) {}

  void resize(int vehicle_count) { per_node_.resize(vehicle_count); }
  int size() const { return static_cast<int>(per_node_.size()); }

  /// Inserts [iv.start, iv.end) into the node's set, merging overlaps.
  void record_busy(int node, Interval iv);

  const std::vector<Interval>& intervals(int node) const { return per_node_.at(node); }

  /// Busy time of `node` clipped to `window`.
  SimTime busy_time(int node, Interval window) const;

 private:
  std::vector<std::vector<Interval>> per_node_;
};

}  // namespace saoi
