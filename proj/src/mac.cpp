#include "saoi/mac.hpp"

#include <algorithm>
#include <stdexcept>

namespace saoi {

void MacConfig::validate() const {
  if (!(bitrate > 0.0)) throw std::invalid_argument("bitrate must be > 0");
  if (cw_slots < 1) throw std::invalid_argument("cw_slots must be >= 1");
  if (!(slot_time > 0.0) || !(aifs > 0.0) || !(preamble > 0.0) || !(plcp > 0.0)) {
    throw std::invalid_argument("MAC durations must be > 0");
  }
  if (beacon_size <= 0) throw std::invalid_argument("beacon_size must be > 0");
  if (queue_capacity != 1) throw std::invalid_argument("queue_capacity is fixed at 1");
}

double frame_airtime(int size_bytes, const MacConfig& cfg) {
  if (size_bytes <= 0) throw std::invalid_argument("frame size must be > 0 bytes");
  return cfg.preamble + cfg.plcp + 8.0 * size_bytes / cfg.bitrate;
}

CsmaMac::CsmaMac(const MacConfig& cfg)
    : cfg_(cfg), slot_(from_seconds(cfg.slot_time)), aifs_(from_seconds(cfg.aifs)) {
  cfg_.validate();
}

std::optional<SimTime> CsmaMac::enqueue(BeaconFrame frame, SimTime now, bool channel_busy,
                                        EnqueueResult* result) {
  ++enqueued_;
  EnqueueResult r = EnqueueResult::queued;
  std::optional<SimTime> wake;
  if (queued_) {
    ++replaced_;
    queued_ = std::move(frame);
    r = EnqueueResult::replaced;
  } else if (phase_ == Phase::transmitting) {
    queued_ = std::move(frame);
  } else {
    queued_ = std::move(frame);
    phase_ = Phase::waiting_aifs;
    backoff_drawn_ = false;
    ++epoch_;
    if (!channel_busy) {
      wake = now + aifs_;
      r = EnqueueResult::started_access;
    }
  }
  if (result) *result = r;
  return wake;
}

void CsmaMac::on_channel_busy(SimTime now) {
  if (phase_ == Phase::waiting_aifs) {
    ++epoch_;
  } else if (phase_ == Phase::counting) {
    const auto elapsed = static_cast<int>(
        std::min<std::int64_t>((now - count_start_) / slot_, backoff_remaining_));
    backoff_remaining_ -= elapsed;
    phase_ = Phase::waiting_aifs;
    ++epoch_;
  }
}

std::optional<SimTime> CsmaMac::on_channel_idle(SimTime now) {
  if (phase_ != Phase::waiting_aifs) return std::nullopt;
  ++epoch_;
  return now + aifs_;
}

std::optional<SimTime> CsmaMac::on_aifs_elapsed(SimTime now,
                                                const std::function<int(int)>& draw) {
  if (phase_ != Phase::waiting_aifs || !queued_) return std::nullopt;
  if (!backoff_drawn_) {
    backoff_remaining_ = draw(cfg_.cw_slots);
    if (backoff_remaining_ < 0 || backoff_remaining_ >= cfg_.cw_slots) {
      throw std::logic_error("backoff draw outside the contention window");
    }
    backoff_drawn_ = true;
  }
  phase_ = Phase::counting;
  count_start_ = now;
  ++epoch_;
  return now + slot_ * backoff_remaining_;
}

BeaconFrame CsmaMac::begin_transmission(SimTime /*now*/) {
  if (phase_ != Phase::counting || !queued_) {
    throw std::logic_error("begin_transmission without a counted-down frame");
  }
  BeaconFrame frame = std::move(*queued_);
  queued_.reset();
  phase_ = Phase::transmitting;
  backoff_drawn_ = false;
  backoff_remaining_ = 0;
  ++transmitted_;
  ++epoch_;
  return frame;
}

void CsmaMac::end_transmission(SimTime /*now*/) {
  if (phase_ != Phase::transmitting) throw std::logic_error("end_transmission while not on air");
  phase_ = queued_ ? Phase::waiting_aifs : Phase::empty;
  backoff_drawn_ = false;
  ++epoch_;
}

void BusyAccumulator::record_busy(int node, Interval iv) {
  if (iv.end <= iv.start) return;
  auto& set = per_node_.at(node);
  if (set.empty() || iv.start > set.back().end) {
    set.push_back(iv);
    return;
  }
  auto it = std::lower_bound(set.begin(), set.end(), iv.start,
                             [](const Interval& a, SimTime s) { return a.end < s; });
  // `it` is the first interval that ends at or after iv.start.
  if (it == set.end() || it->start > iv.end) {
    set.insert(it, iv);
    return;
  }
  it->start = std::min(it->start, iv.start);
  it->end = std::max(it->end, iv.end);
  auto next = std::next(it);
  while (next != set.end() && next->start <= it->end) {
    it->end = std::max(it->end, next->end);
    ++next;
  }
  set.erase(std::next(it), next);
}

SimTime BusyAccumulator::busy_time(int node, Interval window) const {
  SimTime total{};
  for (const auto& iv : per_node_.at(node)) {
    const SimTime a = std::max(iv.start, window.start);
    const SimTime b = std::min(iv.end, window.end);
    if (b > a) total += b - a;
  }
  return total;
}

}  // namespace saoi
