#include "saoi/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include <sys/wait.h>

#include "tempdir.hpp"

namespace saoi {
namespace {

using nlohmann::json;

TEST(Config, DefaultsSurviveARoundTrip) {
  ScenarioConfig c;
  c.weight_params = {{0, 0}, {1, 0.01}};
  c.placements = {{{1, 2}, 0.5}, {{3, 4}, -1}};
  c.channel.carrier_sense_threshold = -85.0;
  const json j = to_json(c);
  ScenarioConfig back;
  apply_json(back, j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.weight_params, c.weight_params);
  EXPECT_EQ(*back.channel.carrier_sense_threshold, -85.0);
}

TEST(Config, KeysOverrideDefaults) {
  ScenarioConfig c;
  apply_json(c, json::parse(R"({
    "scenario": "manhattan", "vehicle_count": 12, "beacon_mode": "adaptive",
    "weight_params": [{"alpha": 1, "beta": 0.01}], "target": 0.2,
    "channel": {"sinr_threshold": 10, "carrier_sense_threshold": null},
    "adaptive": {"gain_d": 0.2, "derivative_sign": "current_minus_previous"},
    "mobility": {"bounds": [300, 400]}
  })"));
  EXPECT_EQ(c.kind, ScenarioKind::manhattan);
  EXPECT_EQ(c.vehicle_count, 12);
  EXPECT_EQ(c.beacon_mode, BeaconMode::adaptive);
  EXPECT_EQ(c.weight_params, (std::vector<WeightParams>{{1, 0.01}}));
  EXPECT_EQ(c.target.target, 0.2);
  EXPECT_EQ(c.channel.sinr_threshold, 10.0);
  EXPECT_FALSE(c.channel.carrier_sense_threshold);
  EXPECT_EQ(c.adaptive.pid.gain_d, 0.2);
  EXPECT_EQ(c.adaptive.pid.derivative_sign, DerivativeSign::current_minus_previous);
  EXPECT_EQ(c.mobility.bounds, (Vec2{300, 400}));
}

TEST(Config, UnknownAndIllTypedKeysAreNamed) {
  ScenarioConfig c;
  try {
    apply_json(c, json::parse(R"({"channel": {"sinr": 3}})"));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("channel.sinr"), std::string::npos);
  }
  try {
    apply_json(c, json::parse(R"({"vehicle_count": "many"})"));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("vehicle_count"), std::string::npos);
  }
  EXPECT_THROW(apply_json(c, json::parse(R"({"scenario": "highway"})")), std::invalid_argument);
  EXPECT_THROW(apply_json(c, json::parse(R"({"weight_params": [[1]]})")), std::invalid_argument);
}

TEST(Config, FileWithComments) {
  testing::TempDir dir("saoi_cfg");
  {
    std::ofstream(dir / "c.json") << "// sweep base\n{\"sim_time\": 3, /* s */ \"seed\": 9}\n";
  }
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.sim_time, 3.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_THROW(load_config(dir / "nope.json"), std::invalid_argument);
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SAOI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, RunWritesTablesAndManifest) {
  testing::TempDir dir("saoi_cli");
  const auto out = (dir / "run").string();
  ASSERT_EQ(cli("run --vehicle_count 5 --sim_time 1 --seed 3 --out " + out), 0);
  for (const char* f : {"paoi_samples.csv", "network_aoi.csv", "networking.csv", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "run" / f)) << f;
  }
  const auto manifest = json::parse(testing::slurp(dir / "run" / "manifest.json"));
  EXPECT_EQ(manifest.dump().find("\"seed\":3") != std::string::npos, true);
  ASSERT_EQ(cli("report --in " + out + " --out " + (dir / "rep").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "rep" / "report.csv"));
}

TEST(Cli, SweepAndAnalytic) {
  testing::TempDir dir("saoi_cli");
  EXPECT_EQ(cli("sweep --vehicle_count 4 --sim_time 0.5 --rates 5 10 --weight_params 0,0 "
                "--weight_params 1,0.01 --out " + (dir / "sw").string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "sw" / "network_aoi.csv"));
  EXPECT_EQ(cli("analytic --over beta --values 0 0.01 --psd 0.5 --mean_system_time 0.001 "
                "--vehicle_count 4 --out " + (dir / "an").string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "an" / "analytic.csv"));
}

TEST(Cli, FailuresExitNonzero) {
  testing::TempDir dir("saoi_cli");
  const auto out = " --out " + (dir / "x").string();
  EXPECT_NE(cli("run --vehicle_count 1" + out), 0);
  EXPECT_NE(cli("run --config " + (dir / "missing.json").string() + out), 0);
  EXPECT_NE(cli("run --set channel.nope=3" + out), 0);
  EXPECT_NE(cli("frobnicate"), 0);
  EXPECT_NE(cli("report --in " + (dir / "empty").string() + out), 0);
}

}  // namespace
}  // namespace saoi
