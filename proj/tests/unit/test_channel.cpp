#include "saoi/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gen.hpp"

namespace saoi {
namespace {

// Textbook free-space loss with d in meters and f in Hz.
double fspl_oracle(double d, double f) { return 20 * std::log10(d) + 20 * std::log10(f) - 147.55; }

ChannelConfig defaults() { return ChannelConfig{}; }

RoadNetwork open_field() { return build_network(ScenarioKind::freespace, {2000, 2000}, 50.0); }

// One 20 m deep building straddling the x axis between x = 40 and x = 60.
RoadNetwork one_building() {
  RoadNetwork net = open_field();
  net.obstacles.push_back({{40, -10}, {60, 10}});
  return net;
}

VehicleState receiver_at(Vec2 p, int id = 99) {
  VehicleState v;
  v.id = id;
  v.position = p;
  return v;
}

TransmissionEvent frame(int sender, std::uint64_t id, Vec2 at, double start_s = 0.0,
                        double airtime_s = 722.67e-6) {
  return {sender, id, from_seconds(start_s), from_seconds(start_s + airtime_s), at};
}

TEST(PathLoss, FriisAtTenAndHundredMeters) {
  const auto c = defaults();
  EXPECT_NEAR(path_loss_db(10, c), 67.85, 0.01);
  EXPECT_NEAR(path_loss_db(100, c), 87.85, 0.01);
  EXPECT_NEAR(c.wavelength(), 0.05090, 1e-5);
  for (double d : {1.0, 7.0, 55.0, 320.0, 777.0}) {
    EXPECT_NEAR(path_loss_db(d, c), fspl_oracle(d, 5.89e9), 0.01) << d;
  }
}

TEST(PathLoss, ClampsBelowOneMeter) {
  const auto c = defaults();
  EXPECT_DOUBLE_EQ(path_loss_db(0.0, c), path_loss_db(1.0, c));
  EXPECT_DOUBLE_EQ(path_loss_db(0.3, c), path_loss_db(1.0, c));
}

TEST(Shadowing, OpenFieldIsFree) {
  EXPECT_EQ(obstacle_loss_db({0, 0}, {300, 200}, open_field(), defaults()), 0.0);
}

TEST(Shadowing, TwoWallsAndTwentyMetersInside) {
  EXPECT_NEAR(obstacle_loss_db({0, 0}, {100, 0}, one_building(), defaults()), 26.0, 1e-9);
  auto c = defaults();
  c.obstacle_shadowing_enabled = false;
  EXPECT_EQ(obstacle_loss_db({0, 0}, {100, 0}, one_building(), c), 0.0);
}

TEST(Shadowing, EndpointInsideCountsOneWall) {
  EXPECT_NEAR(obstacle_loss_db({50, 0}, {100, 0}, one_building(), defaults()),
              9.0 + 10 * 0.4, 1e-9);
}

TEST(Shadowing, ManhattanBlocksAttenuate) {
  const auto net = build_network(ScenarioKind::manhattan, {550, 550}, 50.0);
  // Along a road centre line nothing is in the way; across a block there is.
  EXPECT_EQ(obstacle_loss_db({25, 25}, {525, 25}, net, defaults()), 0.0);
  EXPECT_NEAR(obstacle_loss_db({25, 50}, {75, 50}, net, defaults()), 2 * 9.0 + 36 * 0.4, 1e-9);
}

TEST(ReceivedPower, Compositions) {
  const auto c = defaults();
  EXPECT_NEAR(received_power_dbm(Vec2{0, 0}, Vec2{100, 0}, open_field(), c), -74.84, 0.05);
  const double at600 = received_power_dbm(Vec2{0, 0}, Vec2{600, 0}, open_field(), c);
  EXPECT_NEAR(at600, -90.4, 0.1);
  EXPECT_GT(at600, c.sensitivity);
  EXPECT_NEAR(received_power_dbm(Vec2{0, 0}, Vec2{100, 0}, one_building(), c), -100.84, 0.05);
}

TEST(Decide, CleanLinkSucceeds) {
  const auto c = defaults();
  const auto t = frame(1, 1, {0, 0});
  EXPECT_EQ(decide_reception(t, receiver_at({100, 0}), {}, open_field(), c),
            ReceptionOutcome::success);
}

TEST(Decide, EqualInterfererCollides) {
  const auto c = defaults();
  const auto t = frame(1, 1, {0, 0});
  const std::vector<TransmissionEvent> other{frame(2, 2, {200, 0})};
  EXPECT_EQ(decide_reception(t, receiver_at({100, 0}), other, open_field(), c),
            ReceptionOutcome::collision);
}

TEST(Decide, WeakSignalIsBelowSensitivity) {
  const auto c = defaults();
  // Distance at which the received power is exactly -95 dBm.
  const double loss = c.tx_power + 95.0;
  const double d = c.wavelength() / (4 * kPi) * std::pow(10.0, loss / 20.0);
  EXPECT_NEAR(received_power_dbm(Vec2{0, 0}, Vec2{d, 0}, open_field(), c), -95.0, 1e-9);
  EXPECT_EQ(decide_reception(frame(1, 1, {0, 0}), receiver_at({d, 0}), {}, open_field(), c),
            ReceptionOutcome::below_sensitivity);
}

TEST(Decide, CalibrationRange) {
  const auto c = defaults();
  EXPECT_EQ(decide_reception(frame(1, 1, {0, 0}), receiver_at({600, 0}), {}, open_field(), c),
            ReceptionOutcome::success);
  EXPECT_EQ(decide_reception(frame(1, 1, {0, 0}), receiver_at({900, 0}), {}, open_field(), c),
            ReceptionOutcome::below_sensitivity);
}

TEST(Decide, ReceiverOwnFrameBlocksReception) {
  const auto c = defaults();
  const auto t = frame(1, 1, {0, 0});
  const std::vector<TransmissionEvent> own{frame(99, 7, {10, 0}, 300e-6)};
  EXPECT_EQ(decide_reception(t, receiver_at({10, 0}), own, open_field(), c),
            ReceptionOutcome::collision);
}

TEST(Decide, NonOverlappingFrameIsIgnored) {
  const auto c = defaults();
  const auto t = frame(1, 1, {0, 0});
  const std::vector<TransmissionEvent> later{frame(2, 2, {110, 0}, 1e-3)};
  EXPECT_EQ(decide_reception(t, receiver_at({100, 0}), later, open_field(), c),
            ReceptionOutcome::success);
}

TEST(Decide, DistantInterfererIsTolerated) {
  const auto c = defaults();
  const auto t = frame(1, 1, {0, 0});
  // 10 m link against an interferer 500 m away: SINR well above 8 dB.
  const std::vector<TransmissionEvent> other{frame(2, 2, {510, 0})};
  EXPECT_EQ(decide_reception(t, receiver_at({10, 0}), other, open_field(), c),
            ReceptionOutcome::success);
}

// Worst-case SINR oracle: sum every overlapping interferer at once. Only
// valid when all interferers overlap pairwise, which the generator ensures.
double sinr_all_overlapping(const TransmissionEvent& t, Vec2 rx,
                            const std::vector<TransmissionEvent>& others, const RoadNetwork& net,
                            const ChannelConfig& c) {
  double i_mw = dbm_to_mw(c.noise_floor);
  for (const auto& o : others) i_mw += dbm_to_mw(received_power_dbm(o, rx, net, c));
  return received_power_dbm(t, rx, net, c) - mw_to_dbm(i_mw);
}

TEST(Decide, PropertyMonotoneAndSound) {
  testing::Gen gen(42);
  const auto c = defaults();
  const auto net = build_network(ScenarioKind::manhattan, {550, 550}, 50.0);
  for (int i = 0; i < testing::kCases; ++i) {
    const auto rx = receiver_at({gen.real(0, 550), gen.real(0, 550)});
    const auto t = frame(0, 0, {gen.real(0, 550), gen.real(0, 550)}, 0.0);
    std::vector<TransmissionEvent> others;
    const int k = gen.integer(0, 4);
    for (int j = 0; j < k; ++j) {
      // Start inside [-airtime/2, airtime/2]: every pair overlaps mid-frame.
      others.push_back(frame(j + 1, j + 1, {gen.real(0, 550), gen.real(0, 550)},
                             gen.real(-361e-6, 361e-6)));
    }
    const auto before = decide_reception(t, rx, others, net, c);
    const double p = received_power_dbm(t, rx.position, net, c);
    if (before == ReceptionOutcome::success) {
      ASSERT_GE(p, c.sensitivity);
      ASSERT_GE(sinr_all_overlapping(t, rx.position, others, net, c), c.sinr_threshold);
    } else if (before == ReceptionOutcome::below_sensitivity) {
      ASSERT_LT(p, c.sensitivity);
    }
    others.push_back(frame(9, 9, {gen.real(0, 550), gen.real(0, 550)}, gen.real(-361e-6, 361e-6)));
    const auto after = decide_reception(t, rx, others, net, c);
    if (before != ReceptionOutcome::success) {
      ASSERT_NE(after, ReceptionOutcome::success) << "case " << i;
    }
  }
}

TEST(SuccessProb, Ratios) {
  EXPECT_DOUBLE_EQ(measure_success_prob(100, 100), 1.0);
  EXPECT_DOUBLE_EQ(measure_success_prob(200, 50), 0.25);
  EXPECT_THROW(measure_success_prob(0, 0), std::invalid_argument);
  EXPECT_THROW(measure_success_prob(10, 11), std::invalid_argument);
}

TEST(ChannelConfig, Validation) {
  auto c = defaults();
  EXPECT_NO_THROW(c.validate());
  c.extra_loss_probability = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = defaults();
  c.path_loss_exponent = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = defaults();
  EXPECT_DOUBLE_EQ(c.busy_threshold(), c.sensitivity);
  c.carrier_sense_threshold = -85.0;
  EXPECT_DOUBLE_EQ(c.busy_threshold(), -85.0);
}

}  // namespace
}  // namespace saoi
