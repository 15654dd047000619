#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "saoi/beacon.hpp"
#include "saoi/geometry.hpp"
#include "saoi/time.hpp"

namespace saoi {

/// Spatial selectivity of the weighting coefficient. `alpha` scales the
/// bearing inside the raised cosine, `beta` is the distance decay in 1/m.
/// (0, 0) weighs every link with 1.
struct WeightParams {
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const;
  friend bool operator==(const WeightParams&, const WeightParams&) = default;
};

struct TargetConfig {
  double target = 0.1;  // seconds
  void validate() const;
};

/// omega = 1/2 (1 + cos(alpha * theta)) * exp(-beta * distance), in [0, 1].
/// Throws std::domain_error for theta outside [0, pi] or negative distance.
double weight_coefficient(double theta, double distance, WeightParams p);

/// Last successfully received beacon of one neighbour.
struct NeighborEntry {
  int neighbor = -1;
  SimTime last_generated_at{};
  SimTime last_received_at{};
  Vec2 last_position;
  double last_heading = 0.0;
  std::int64_t sample_count = 0;
};

/// 1-hop neighbour table of one receiver. Entries never expire.
using NeighborTable = std::map<int, NeighborEntry>;

/// Unweighted PAoI observation with the link geometry needed to weigh it
/// later under any WeightParams.
struct LinkObservation {
  int receiver = -1;
  int sender = -1;
  SimTime recorded_at{};
  SimTime paoi{};
  double link_distance = 0.0;
  double bearing = 0.0;
};

struct PAoISample {
  int receiver = -1;
  int sender = -1;
  double paoi = 0.0;  // seconds
  double omega = 1.0;
  double weighted_paoi = 0.0;
  double weighted_target = 0.0;
  double link_distance = 0.0;
  double recorded_at = 0.0;  // seconds
};

PAoISample weigh(const LinkObservation& obs, WeightParams p, TargetConfig t);
std::vector<PAoISample> weigh_all(std::span<const LinkObservation> obs, WeightParams p,
                                  TargetConfig t);

/// Updates the table with a decoded frame. Returns the peak-AoI observation
/// when the sender was already known (the first beacon only creates the
/// entry). Throws std::invalid_argument if rx_time precedes generation.
std::optional<LinkObservation> observe_reception(NeighborTable& table, const BeaconFrame& frame,
                                                 SimTime rx_time, const VehicleState& rx);

std::optional<PAoISample> record_reception(NeighborTable& table, const BeaconFrame& frame,
                                           SimTime rx_time, const VehicleState& rx,
                                           WeightParams p, TargetConfig t);

/// Per ordered link: mean PAoI over its samples and the most recent omega.
struct LinkSummary {
  int receiver = -1;
  int sender = -1;
  double mean_paoi = 0.0;
  double latest_omega = 1.0;
  std::int64_t count = 0;

  double weighted_paoi() const { return latest_omega * mean_paoi; }
};

/// Groups samples by (receiver, sender) in ascending id order.
std::vector<LinkSummary> summarize_links(std::span<const PAoISample> samples);

/// Mean of omega * PAoI over the neighbours of `receiver` that have samples.
/// Throws std::domain_error when none contributes.
double weighted_neighbor_avg(std::span<const LinkSummary> links, int receiver);

/// Mean of omega * PAoI over all ordered pairs with samples.
double weighted_network_avg(std::span<const LinkSummary> links);

/// Same averaging applied to omega * T. `receiver` selects the neighbour
/// scope; std::nullopt averages over the network.
double weighted_target_avg(std::span<const LinkSummary> links, TargetConfig t,
                           std::optional<int> receiver = std::nullopt);

inline bool meets_target(double weighted_paoi, double weighted_target) {
  return weighted_paoi <= weighted_target;
}

/// Fraction of samples with PAoI <= T (unweighted) or omega*PAoI <= omega*T.
double below_target_ratio(std::span<const PAoISample> samples, bool weighted, TargetConfig t);

/// Mean peak AoI of a link with delivery probability p_sd: E{Y}/p_sd + E{T}.
double analytic_paoi(double mean_interarrival, double mean_system_time, double p_sd);

}  // namespace saoi
