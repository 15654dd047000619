#pragma once

#include <cmath>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "saoi/rng.hpp"

namespace saoi {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double norm() const { return std::hypot(x, y); }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

inline double distance(Vec2 a, Vec2 b) { return (b - a).norm(); }

/// Axis-aligned rectangle, min corner inclusive.
struct Rect {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

enum class ScenarioKind { freespace, freespace_static, manhattan, manhattan_static };

ScenarioKind parse_scenario_kind(std::string_view name);
std::string_view to_string(ScenarioKind kind);

inline bool is_static(ScenarioKind k) {
  return k == ScenarioKind::freespace_static || k == ScenarioKind::manhattan_static;
}
inline bool is_manhattan(ScenarioKind k) {
  return k == ScenarioKind::manhattan || k == ScenarioKind::manhattan_static;
}

/// Axis-aligned road centre line.
struct RoadSegment {
  Vec2 a;
  Vec2 b;
  bool horizontal() const { return a.y == b.y; }
  double length() const { return distance(a, b); }
};

struct RoadNetwork {
  Rect bounds;
  double block_pitch = 0.0;
  std::vector<RoadSegment> roads;
  std::vector<Rect> obstacles;
  // Coordinates of the vertical (x) and horizontal (y) road lines.
  std::vector<double> road_x;
  std::vector<double> road_y;

  bool manhattan() const { return !roads.empty(); }
  std::size_t horizontal_road_count() const { return road_y.size(); }
  std::size_t vertical_road_count() const { return road_x.size(); }
};

/// Builds the environment. Manhattan kinds place one road line every
/// `block_pitch` meters, centred in the bounds, and fill each enclosed block
/// with a building inset `building_inset` meters from the road centre lines.
/// Throws std::invalid_argument on non-positive bounds or a degenerate pitch.
RoadNetwork build_network(ScenarioKind kind, Vec2 size, double block_pitch,
                          double building_inset = 7.0);

struct VehicleState {
  int id = 0;
  Vec2 position;
  double heading = 0.0;  // radians in [-pi, pi)
  double speed = 0.0;    // m/s
  std::deque<Vec2> route;
};

/// Geometry of transmitter j as seen from receiver i.
struct RelativeGeometry {
  double distance = 0.0;
  double bearing = 0.0;  // [0, pi], 0 = straight ahead of the receiver
};

RelativeGeometry relative_geometry(Vec2 rx_position, double rx_heading, Vec2 tx_position);
RelativeGeometry relative_geometry(const VehicleState& i, const VehicleState& j);

double wrap_angle(double radians);

/// Spawns `count` vehicles at random positions (on roads for Manhattan
/// networks), each with a first trip when `speed` > 0.
std::vector<VehicleState> spawn_vehicles(const RoadNetwork& network, int count, double speed,
                                         Rng& rng);

/// Advances every vehicle by speed*dt along its route. A vehicle whose route
/// is exhausted draws a new trip and does not move in that step.
void step_mobility(std::span<VehicleState> vehicles, const RoadNetwork& network, double dt,
                   Rng& rng);

/// Appends a random trip to `v.route` starting at its current position.
void draw_trip(VehicleState& v, const RoadNetwork& network, Rng& rng);

}  // namespace saoi
