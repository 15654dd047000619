#include "saoi/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "gen.hpp"

namespace saoi {
namespace {

const Vec2 kSquare{550.0, 550.0};

TEST(Network, FreespaceHasNothingInTheWay) {
  const auto net = build_network(ScenarioKind::freespace, kSquare, 50.0);
  EXPECT_TRUE(net.obstacles.empty());
  EXPECT_TRUE(net.roads.empty());
  EXPECT_FALSE(net.manhattan());
}

TEST(Network, ManhattanGridCounts) {
  const auto net = build_network(ScenarioKind::manhattan, kSquare, 50.0);
  EXPECT_EQ(net.horizontal_road_count(), 11u);
  EXPECT_EQ(net.vertical_road_count(), 11u);
  EXPECT_EQ(net.obstacles.size(), 100u);
  // Lines are centred: 25, 75, ..., 525.
  EXPECT_DOUBLE_EQ(net.road_x.front(), 25.0);
  EXPECT_DOUBLE_EQ(net.road_x.back(), 525.0);
  for (const auto& b : net.obstacles) {
    EXPECT_DOUBLE_EQ(b.width(), 36.0);
    EXPECT_DOUBLE_EQ(b.height(), 36.0);
  }
}

TEST(Network, PitchLargerThanAreaIsRejected) {
  EXPECT_THROW(build_network(ScenarioKind::manhattan, kSquare, 600.0), std::invalid_argument);
  EXPECT_THROW(build_network(ScenarioKind::manhattan, kSquare, 0.0), std::invalid_argument);
  EXPECT_THROW(build_network(ScenarioKind::freespace, {0.0, 10.0}, 50.0), std::invalid_argument);
}

TEST(RelativeGeometry, AheadSideBehind) {
  auto g = relative_geometry({0, 0}, 0.0, {100, 0});
  EXPECT_DOUBLE_EQ(g.distance, 100.0);
  EXPECT_DOUBLE_EQ(g.bearing, 0.0);

  g = relative_geometry({0, 0}, 0.0, {0, 50});
  EXPECT_DOUBLE_EQ(g.distance, 50.0);
  EXPECT_NEAR(g.bearing, kPi / 2, 1e-12);

  g = relative_geometry({0, 0}, 0.0, {-30, 0});
  EXPECT_DOUBLE_EQ(g.distance, 30.0);
  EXPECT_NEAR(g.bearing, kPi, 1e-12);
}

TEST(RelativeGeometry, BearingIsUnsigned) {
  const auto left = relative_geometry({0, 0}, 0.0, {10, 10});
  const auto right = relative_geometry({0, 0}, 0.0, {10, -10});
  EXPECT_NEAR(left.bearing, right.bearing, 1e-15);
  EXPECT_NEAR(left.bearing, kPi / 4, 1e-12);
}

TEST(RelativeGeometry, PropertyRanges) {
  testing::Gen gen(11);
  for (int i = 0; i < testing::kCases; ++i) {
    const Vec2 a{gen.real(-1000, 1000), gen.real(-1000, 1000)};
    const Vec2 b{gen.real(-1000, 1000), gen.real(-1000, 1000)};
    const double h = gen.real(-4 * kPi, 4 * kPi);
    const auto g = relative_geometry(a, h, b);
    ASSERT_GE(g.distance, 0.0);
    ASSERT_GE(g.bearing, 0.0);
    ASSERT_LE(g.bearing, kPi);
    ASSERT_NEAR(g.distance, distance(a, b), 1e-9);
  }
}

TEST(Mobility, StaticVehiclesStayPut) {
  const auto net = build_network(ScenarioKind::freespace_static, kSquare, 50.0);
  Rng rng = make_stream(3, RngStream::placement);
  auto vs = spawn_vehicles(net, 20, 0.0, rng);
  const auto before = vs;
  Rng mob = make_stream(3, RngStream::mobility);
  for (int k = 0; k < 50; ++k) step_mobility(vs, net, 0.7, mob);
  for (std::size_t i = 0; i < vs.size(); ++i) EXPECT_EQ(vs[i].position, before[i].position);
}

TEST(Mobility, StraightLegDisplacement) {
  const auto net = build_network(ScenarioKind::freespace, kSquare, 50.0);
  VehicleState v;
  v.position = {100, 100};
  v.speed = 13.9;
  v.route.push_back({300, 100});
  Rng rng(1);
  std::vector<VehicleState> vs{v};
  step_mobility(vs, net, 1.0, rng);
  EXPECT_NEAR(distance(vs[0].position, {100, 100}), 13.9, 1e-12);
  EXPECT_NEAR(vs[0].position.x, 113.9, 1e-12);
  EXPECT_DOUBLE_EQ(vs[0].heading, 0.0);
}

TEST(Mobility, ExhaustedRouteDrawsWithoutMoving) {
  const auto net = build_network(ScenarioKind::manhattan, kSquare, 50.0);
  VehicleState v;
  v.position = {25, 25};  // an intersection
  v.speed = 13.9;
  std::vector<VehicleState> vs{v};
  Rng rng(5);
  ASSERT_TRUE(vs[0].route.empty());
  step_mobility(vs, net, 0.1, rng);
  EXPECT_EQ(vs[0].position, (Vec2{25, 25}));
  EXPECT_FALSE(vs[0].route.empty());
}

TEST(Mobility, ManhattanVehiclesStayOnRoads) {
  const auto net = build_network(ScenarioKind::manhattan, kSquare, 50.0);
  Rng rng = make_stream(9, RngStream::placement);
  auto vs = spawn_vehicles(net, 50, 13.9, rng);
  Rng mob = make_stream(9, RngStream::mobility);
  const auto on = [](double c, const std::vector<double>& lines) {
    for (double l : lines) {
      if (std::abs(c - l) < 1e-6) return true;
    }
    return false;
  };
  for (int k = 0; k < 400; ++k) {
    step_mobility(vs, net, 0.1, mob);
    for (const auto& v : vs) {
      ASSERT_TRUE(on(v.position.x, net.road_x) || on(v.position.y, net.road_y))
          << "vehicle " << v.id << " left the grid at step " << k;
    }
  }
}

TEST(Mobility, DistancesStayWithinTheSquareDiagonal) {
  const double bound = 550.0 * std::sqrt(2.0);
  for (auto kind : {ScenarioKind::freespace, ScenarioKind::manhattan}) {
    const auto net = build_network(kind, kSquare, 50.0);
    Rng rng = make_stream(21, RngStream::placement);
    auto vs = spawn_vehicles(net, 60, 13.9, rng);
    Rng mob = make_stream(21, RngStream::mobility);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      step_mobility(vs, net, 0.1, mob);
      for (const auto& a : vs) {
        for (const auto& b : vs) worst = std::max(worst, relative_geometry(a, b).distance);
      }
    }
    EXPECT_LE(worst, bound);
    EXPECT_LT(bound, 778.0);
  }
}

TEST(Mobility, SameSeedSameTrajectories) {
  const auto net = build_network(ScenarioKind::manhattan, kSquare, 50.0);
  const auto trajectory = [&](std::uint64_t seed) {
    Rng rng = make_stream(seed, RngStream::placement);
    auto vs = spawn_vehicles(net, 30, 13.9, rng);
    Rng mob = make_stream(seed, RngStream::mobility);
    std::vector<Vec2> out;
    for (int k = 0; k < 200; ++k) {
      step_mobility(vs, net, 0.1, mob);
      for (const auto& v : vs) out.push_back(v.position);
    }
    return out;
  };
  EXPECT_EQ(trajectory(4), trajectory(4));
  EXPECT_NE(trajectory(4), trajectory(5));
}

TEST(Scenario, NamesRoundTrip) {
  for (auto k : {ScenarioKind::freespace, ScenarioKind::freespace_static, ScenarioKind::manhattan,
                 ScenarioKind::manhattan_static}) {
    EXPECT_EQ(parse_scenario_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_scenario_kind("highway"), std::invalid_argument);
}

}  // namespace
}  // namespace saoi
