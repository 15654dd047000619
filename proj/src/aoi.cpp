#include "saoi/aoi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace saoi {

void WeightParams::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw std::invalid_argument("weight parameters alpha and beta must be >= 0");
  }
}

void TargetConfig::validate() const {
  if (!(target > 0.0)) throw std::invalid_argument("target AoI must be > 0");
}

double weight_coefficient(double theta, double distance, WeightParams p) {
  if (!(theta >= 0.0 && theta <= kPi)) throw std::domain_error("bearing outside [0, pi]");
  if (!(distance >= 0.0)) throw std::domain_error("negative link distance");
  p.validate();
  if (p.alpha == 0.0 && p.beta == 0.0) return 1.0;
  const double w = 0.5 * (1.0 + std::cos(p.alpha * theta)) * std::exp(-p.beta * distance);
  return std::clamp(w, 0.0, 1.0);
}

PAoISample weigh(const LinkObservation& obs, WeightParams p, TargetConfig t) {
  PAoISample s;
  s.receiver = obs.receiver;
  s.sender = obs.sender;
  s.paoi = to_seconds(obs.paoi);
  s.omega = weight_coefficient(obs.bearing, obs.link_distance, p);
  s.weighted_paoi = s.omega * s.paoi;
  s.weighted_target = s.omega * t.target;
  s.link_distance = obs.link_distance;
  s.recorded_at = to_seconds(obs.recorded_at);
  return s;
}

std::vector<PAoISample> weigh_all(std::span<const LinkObservation> obs, WeightParams p,
                                  TargetConfig t) {
  std::vector<PAoISample> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(weigh(o, p, t));
  return out;
}

std::optional<LinkObservation> observe_reception(NeighborTable& table, const BeaconFrame& frame,
                                                 SimTime rx_time, const VehicleState& rx) {
  if (rx_time < frame.generated_at) {
    throw std::invalid_argument("reception at " + std::to_string(to_seconds(rx_time)) +
                                " s precedes generation at " +
                                std::to_string(to_seconds(frame.generated_at)) + " s");
  }
  auto [it, inserted] = table.try_emplace(frame.sender);
  NeighborEntry& e = it->second;
  std::optional<LinkObservation> obs;
  if (!inserted) {
    if (frame.generated_at < e.last_generated_at) return std::nullopt;  // out of order
    const RelativeGeometry g = relative_geometry(rx.position, rx.heading, frame.sender_position);
    obs = LinkObservation{rx.id, frame.sender, rx_time, rx_time - e.last_generated_at,
                          g.distance, g.bearing};
    ++e.sample_count;
  }
  e.neighbor = frame.sender;
  e.last_generated_at = frame.generated_at;
  e.last_received_at = rx_time;
  e.last_position = frame.sender_position;
  e.last_heading = frame.sender_heading;
  return obs;
}

std::optional<PAoISample> record_reception(NeighborTable& table, const BeaconFrame& frame,
                                           SimTime rx_time, const VehicleState& rx,
                                           WeightParams p, TargetConfig t) {
  auto obs = observe_reception(table, frame, rx_time, rx);
  if (!obs) return std::nullopt;
  return weigh(*obs, p, t);
}

std::vector<LinkSummary> summarize_links(std::span<const PAoISample> samples) {
  struct Acc {
    double sum = 0.0;
    std::int64_t n = 0;
    double latest_at = -1.0;
    double latest_omega = 1.0;
  };
  std::map<std::pair<int, int>, Acc> acc;
  for (const auto& s : samples) {
    Acc& a = acc[{s.receiver, s.sender}];
    a.sum += s.paoi;
    ++a.n;
    if (s.recorded_at >= a.latest_at) {
      a.latest_at = s.recorded_at;
      a.latest_omega = s.omega;
    }
  }
  std::vector<LinkSummary> out;
  out.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    out.push_back({key.first, key.second, a.sum / static_cast<double>(a.n), a.latest_omega, a.n});
  }
  return out;
}

double weighted_neighbor_avg(std::span<const LinkSummary> links, int receiver) {
  double sum = 0.0;
  std::int64_t k = 0;
  for (const auto& l : links) {
    if (l.receiver != receiver) continue;
    sum += l.weighted_paoi();
    ++k;
  }
  if (k == 0) throw std::domain_error("no neighbour with PAoI samples");
  return sum / static_cast<double>(k);
}

double weighted_network_avg(std::span<const LinkSummary> links) {
  if (links.empty()) throw std::domain_error("no link with PAoI samples");
  double sum = 0.0;
  for (const auto& l : links) sum += l.weighted_paoi();
  return sum / static_cast<double>(links.size());
}

double weighted_target_avg(std::span<const LinkSummary> links, TargetConfig t,
                           std::optional<int> receiver) {
  double sum = 0.0;
  std::int64_t k = 0;
  for (const auto& l : links) {
    if (receiver && l.receiver != *receiver) continue;
    sum += l.latest_omega * t.target;
    ++k;
  }
  if (k == 0) throw std::domain_error("no link with PAoI samples");
  return sum / static_cast<double>(k);
}

double below_target_ratio(std::span<const PAoISample> samples, bool weighted, TargetConfig t) {
  if (samples.empty()) throw std::domain_error("below-target ratio of an empty sample set");
  std::int64_t below = 0;
  for (const auto& s : samples) {
    const bool ok = weighted ? meets_target(s.weighted_paoi, s.weighted_target)
                             : meets_target(s.paoi, t.target);
    below += ok ? 1 : 0;
  }
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

double analytic_paoi(double mean_interarrival, double mean_system_time, double p_sd) {
  if (!(p_sd > 0.0)) throw std::domain_error("p_sd = 0: the link is never updated");
  if (p_sd > 1.0) throw std::domain_error("p_sd must not exceed 1");
  if (mean_interarrival < 0.0 || mean_system_time < 0.0) {
    throw std::domain_error("mean times must be >= 0");
  }
  return mean_interarrival / p_sd + mean_system_time;
}

}  // namespace saoi
