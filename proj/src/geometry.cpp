#include "saoi/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace saoi {

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "freespace") return ScenarioKind::freespace;
  if (name == "freespace_static") return ScenarioKind::freespace_static;
  if (name == "manhattan") return ScenarioKind::manhattan;
  if (name == "manhattan_static") return ScenarioKind::manhattan_static;
  throw std::invalid_argument("unknown scenario kind '" + std::string(name) + "'");
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::freespace: return "freespace";
    case ScenarioKind::freespace_static: return "freespace_static";
    case ScenarioKind::manhattan: return "manhattan";
    case ScenarioKind::manhattan_static: return "manhattan_static";
  }
  return "?";
}

namespace {

std::vector<double> grid_lines(double extent, double pitch) {
  const auto n = static_cast<int>(std::floor(extent / pitch));
  const double offset = (extent - (n - 1) * pitch) / 2.0;
  std::vector<double> lines;
  lines.reserve(n);
  for (int k = 0; k < n; ++k) lines.push_back(offset + k * pitch);
  return lines;
}

constexpr double kOnRoadTol = 1e-6;

bool on_line(double v, const std::vector<double>& lines) {
  return std::any_of(lines.begin(), lines.end(),
                     [v](double l) { return std::abs(v - l) < kOnRoadTol; });
}

}  // namespace

RoadNetwork build_network(ScenarioKind kind, Vec2 size, double block_pitch,
                          double building_inset) {
  if (!(size.x > 0.0) || !(size.y > 0.0)) {
    throw std::invalid_argument("scenario bounds must be positive");
  }
  RoadNetwork net;
  net.bounds = Rect{{0.0, 0.0}, size};
  if (!is_manhattan(kind)) return net;

  if (!(block_pitch > 0.0) || block_pitch >= std::min(size.x, size.y)) {
    throw std::invalid_argument("block pitch " + std::to_string(block_pitch) +
                                " m is degenerate for the scenario bounds");
  }
  if (building_inset < 0.0) throw std::invalid_argument("building inset must be >= 0");
  net.block_pitch = block_pitch;
  net.road_x = grid_lines(size.x, block_pitch);
  net.road_y = grid_lines(size.y, block_pitch);
  for (double y : net.road_y) net.roads.push_back({{0.0, y}, {size.x, y}});
  for (double x : net.road_x) net.roads.push_back({{x, 0.0}, {x, size.y}});

  if (block_pitch > 2.0 * building_inset) {
    for (std::size_t i = 0; i + 1 < net.road_x.size(); ++i) {
      for (std::size_t j = 0; j + 1 < net.road_y.size(); ++j) {
        net.obstacles.push_back({{net.road_x[i] + building_inset, net.road_y[j] + building_inset},
                                 {net.road_x[i + 1] - building_inset,
                                  net.road_y[j + 1] - building_inset}});
      }
    }
  }
  return net;
}

double wrap_angle(double radians) {
  double a = std::fmod(radians + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

RelativeGeometry relative_geometry(Vec2 rx_position, double rx_heading, Vec2 tx_position) {
  const Vec2 d = tx_position - rx_position;
  const double dist = d.norm();
  if (dist == 0.0) return {0.0, 0.0};
  const Vec2 u{std::cos(rx_heading), std::sin(rx_heading)};
  const double c = std::clamp(u.dot(d) / dist, -1.0, 1.0);
  return {dist, std::acos(c)};
}

RelativeGeometry relative_geometry(const VehicleState& i, const VehicleState& j) {
  return relative_geometry(i.position, i.heading, j.position);
}

void draw_trip(VehicleState& v, const RoadNetwork& network, Rng& rng) {
  const Vec2 from = v.route.empty() ? v.position : v.route.back();
  if (!network.manhattan()) {
    v.route.push_back({uniform(rng, network.bounds.min.x, network.bounds.max.x),
                       uniform(rng, network.bounds.min.y, network.bounds.max.y)});
    return;
  }
  const int nx = static_cast<int>(network.road_x.size());
  const int ny = static_cast<int>(network.road_y.size());
  Vec2 target = from;
  // Redraw until the target differs from the start (the grid has >= 1 road per axis).
  for (int attempt = 0; attempt < 64 && target == from; ++attempt) {
    target = {network.road_x[uniform_int(rng, 0, nx - 1)],
              network.road_y[uniform_int(rng, 0, ny - 1)]};
  }
  const bool on_h = on_line(from.y, network.road_y);
  const bool on_v = on_line(from.x, network.road_x);
  bool x_first = on_h;
  if (on_h && on_v) x_first = uniform_int(rng, 0, 1) == 0;
  const Vec2 corner = x_first ? Vec2{target.x, from.y} : Vec2{from.x, target.y};
  if (!(corner == from)) v.route.push_back(corner);
  if (!(target == corner)) v.route.push_back(target);
}

std::vector<VehicleState> spawn_vehicles(const RoadNetwork& network, int count, double speed,
                                         Rng& rng) {
  if (count < 0) throw std::invalid_argument("vehicle count must be >= 0");
  std::vector<VehicleState> out;
  out.reserve(count);
  for (int id = 0; id < count; ++id) {
    VehicleState v;
    v.id = id;
    v.speed = speed;
    if (!network.manhattan()) {
      v.position = {uniform(rng, network.bounds.min.x, network.bounds.max.x),
                    uniform(rng, network.bounds.min.y, network.bounds.max.y)};
      v.heading = wrap_angle(uniform(rng, -kPi, kPi));
      if (speed > 0.0) {
        draw_trip(v, network, rng);
        const Vec2 d = v.route.front() - v.position;
        if (d.norm() > 0.0) v.heading = wrap_angle(std::atan2(d.y, d.x));
      }
    } else {
      const auto& road =
          network.roads[uniform_int(rng, 0, static_cast<int>(network.roads.size()) - 1)];
      const double t = uniform(rng, 0.0, 1.0);
      v.position = road.a + (road.b - road.a) * t;
      const bool forward = uniform_int(rng, 0, 1) == 0;
      const Vec2 dir = forward ? road.b - road.a : road.a - road.b;
      v.heading = wrap_angle(std::atan2(dir.y, dir.x));
      if (speed > 0.0) {
        // First leg: to the next intersection ahead, or behind when none is ahead.
        const auto& cross = road.horizontal() ? network.road_x : network.road_y;
        const double pos = road.horizontal() ? v.position.x : v.position.y;
        const double sign = road.horizontal() ? (dir.x > 0 ? 1.0 : -1.0) : (dir.y > 0 ? 1.0 : -1.0);
        double best = std::numeric_limits<double>::infinity();
        double pick = pos;
        for (double c : cross) {
          const double ahead = (c - pos) * sign;
          if (ahead > 0.0 && ahead < best) {
            best = ahead;
            pick = c;
          }
        }
        if (!std::isfinite(best)) {
          for (double c : cross) {
            const double behind = std::abs(c - pos);
            if (behind < best) {
              best = behind;
              pick = c;
            }
          }
        }
        const Vec2 wp = road.horizontal() ? Vec2{pick, v.position.y} : Vec2{v.position.x, pick};
        if (!(wp == v.position)) {
          v.route.push_back(wp);
          const Vec2 d = wp - v.position;
          v.heading = wrap_angle(std::atan2(d.y, d.x));
        }
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

void step_mobility(std::span<VehicleState> vehicles, const RoadNetwork& network, double dt,
                   Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("mobility step must be positive");
  for (auto& v : vehicles) {
    if (v.speed <= 0.0) continue;
    if (v.route.empty()) {
      draw_trip(v, network, rng);
      if (!v.route.empty()) {
        const Vec2 d = v.route.front() - v.position;
        if (d.norm() > 0.0) v.heading = wrap_angle(std::atan2(d.y, d.x));
      }
      continue;
    }
    double remaining = v.speed * dt;
    while (remaining > 0.0 && !v.route.empty()) {
      const Vec2 wp = v.route.front();
      const Vec2 d = wp - v.position;
      const double len = d.norm();
      if (len > 0.0) v.heading = wrap_angle(std::atan2(d.y, d.x));
      if (len <= remaining) {
        v.position = wp;
        remaining -= len;
        v.route.pop_front();
      } else {
        v.position = v.position + d * (remaining / len);
        remaining = 0.0;
      }
    }
    if (!v.route.empty()) {
      const Vec2 d = v.route.front() - v.position;
      if (d.norm() > 0.0) v.heading = wrap_angle(std::atan2(d.y, d.x));
    }
  }
}

}  // namespace saoi
