#include "saoi/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace saoi {

void ChannelConfig::validate() const {
  if (!(carrier_frequency > 0.0)) throw std::invalid_argument("carrier_frequency must be > 0");
  if (path_loss_exponent < 2.0) throw std::invalid_argument("path_loss_exponent must be >= 2");
  if (sensitivity < noise_floor) throw std::invalid_argument("sensitivity must be >= noise_floor");
  if (!(tx_power > sensitivity)) throw std::invalid_argument("tx_power must exceed sensitivity");
  if (carrier_sense_threshold && !std::isfinite(*carrier_sense_threshold)) {
    throw std::invalid_argument("carrier_sense_threshold must be finite");
  }
  if (wall_attenuation < 0.0 || interior_attenuation < 0.0) {
    throw std::invalid_argument("obstacle attenuation must be >= 0");
  }
  if (propagation_delay < 0.0) throw std::invalid_argument("propagation_delay must be >= 0");
  if (extra_loss_probability < 0.0 || extra_loss_probability >= 1.0) {
    throw std::invalid_argument("extra_loss_probability must be in [0, 1)");
  }
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

std::string_view to_string(ReceptionOutcome outcome) {
  switch (outcome) {
    case ReceptionOutcome::success: return "success";
    case ReceptionOutcome::below_sensitivity: return "below_sensitivity";
    case ReceptionOutcome::collision: return "collision";
  }
  return "?";
}

double path_loss_db(double distance, const ChannelConfig& cfg) {
  const double d = std::max(distance, 1.0);
  return 10.0 * cfg.path_loss_exponent * std::log10(4.0 * kPi * d / cfg.wavelength());
}

namespace {

// Parametric clip of a + t(b - a), t in [0, 1], against an axis-aligned box.
bool clip_segment(Vec2 a, Vec2 b, const Rect& r, double& t0, double& t1) {
  t0 = 0.0;
  t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p[2] = {a.x, a.y};
  const double lo[2] = {r.min.x, r.min.y};
  const double hi[2] = {r.max.x, r.max.y};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p[k] <= lo[k] || p[k] >= hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - p[k]) / d[k];
    double tb = (hi[k] - p[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return false;
  }
  return true;
}

}  // namespace

double obstacle_loss_db(Vec2 a, Vec2 b, const RoadNetwork& network, const ChannelConfig& cfg) {
  if (!cfg.obstacle_shadowing_enabled || network.obstacles.empty()) return 0.0;
  const double len = distance(a, b);
  if (len == 0.0) return 0.0;
  const Rect span{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  int walls = 0;
  double inside = 0.0;
  for (const Rect& r : network.obstacles) {
    if (r.max.x <= span.min.x || r.min.x >= span.max.x || r.max.y <= span.min.y ||
        r.min.y >= span.max.y) {
      continue;
    }
    double t0 = 0.0;
    double t1 = 0.0;
    if (!clip_segment(a, b, r, t0, t1)) continue;
    inside += (t1 - t0) * len;
    walls += (t0 > 0.0 ? 1 : 0) + (t1 < 1.0 ? 1 : 0);
  }
  return walls * cfg.wall_attenuation + inside * cfg.interior_attenuation;
}

double received_power_dbm(Vec2 tx_position, Vec2 rx_position, const RoadNetwork& network,
                          const ChannelConfig& cfg) {
  return cfg.tx_power - path_loss_db(distance(tx_position, rx_position), cfg) -
         obstacle_loss_db(tx_position, rx_position, network, cfg);
}

double received_power_dbm(const TransmissionEvent& tx, Vec2 rx_position,
                          const RoadNetwork& network, const ChannelConfig& cfg) {
  return received_power_dbm(tx.tx_position, rx_position, network, cfg);
}

ReceptionOutcome decide_reception(const TransmissionEvent& target, const VehicleState& rx,
                                  std::span<const TransmissionEvent> overlapping,
                                  const RoadNetwork& network, const ChannelConfig& cfg) {
  const double signal_dbm = received_power_dbm(target, rx.position, network, cfg);
  if (signal_dbm < cfg.sensitivity) return ReceptionOutcome::below_sensitivity;

  std::vector<const TransmissionEvent*> others;
  // The target reaches the receiver one propagation delay late; the
  // receiver's own frames occupy its radio without that shift.
  const SimTime delay = from_seconds(cfg.propagation_delay);
  for (const auto& tx : overlapping) {
    if (tx.id == target.id && tx.sender == target.sender) continue;
    if (tx.sender == rx.id) {
      if (tx.air_start < target.air_end + delay && tx.air_end > target.air_start + delay) {
        return ReceptionOutcome::collision;  // half duplex
      }
      continue;
    }
    if (tx.air_end <= target.air_start || tx.air_start >= target.air_end) continue;
    others.push_back(&tx);
  }

  // Interference is piecewise constant and only rises at some start instant,
  // so the worst case over the frame is attained at one of those instants.
  std::vector<SimTime> instants{target.air_start};
  for (const auto* tx : others) {
    if (tx->air_start > target.air_start) instants.push_back(tx->air_start);
  }
  double worst_mw = 0.0;
  for (SimTime t : instants) {
    double sum = 0.0;
    for (const auto* tx : others) {
      if (tx->air_start <= t && t < tx->air_end) {
        sum += dbm_to_mw(received_power_dbm(*tx, rx.position, network, cfg));
      }
    }
    worst_mw = std::max(worst_mw, sum);
  }
  const double sinr_db = signal_dbm - mw_to_dbm(dbm_to_mw(cfg.noise_floor) + worst_mw);
  return sinr_db >= cfg.sinr_threshold ? ReceptionOutcome::success : ReceptionOutcome::collision;
}

double measure_success_prob(std::int64_t tx_count, std::int64_t rx_count) {
  if (tx_count < 1) throw std::invalid_argument("success probability needs tx_count >= 1");
  if (rx_count < 0 || rx_count > tx_count) {
    throw std::invalid_argument("rx_count must lie in [0, tx_count]");
  }
  return static_cast<double>(rx_count) / static_cast<double>(tx_count);
}

}  // namespace saoi
