#include "saoi/config.hpp"

#include <array>
#include <fstream>
#include <set>
#include <stdexcept>

namespace saoi {

using nlohmann::json;

namespace {

// Reads j[key] into out when present, tagging type errors with the key path.
template <typename T>
void read(const json& j, const char* key, T& out, const std::string& prefix) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + prefix + key + "' has the wrong type");
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& prefix) {
  if (!j.is_object()) {
    throw std::invalid_argument("config section '" + prefix + "' must be an object");
  }
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw std::invalid_argument("unknown config key '" + prefix + k + "'");
  }
}

void apply_channel(ChannelConfig& c, const json& j) {
  const std::string p = "channel.";
  check_keys(j,
             {"carrier_frequency", "tx_power", "path_loss_exponent", "noise_floor", "sensitivity",
              "sinr_threshold", "wall_attenuation", "interior_attenuation",
              "obstacle_shadowing_enabled", "propagation_delay", "extra_loss_probability",
              "carrier_sense_threshold"},
             p);
  read(j, "carrier_frequency", c.carrier_frequency, p);
  read(j, "tx_power", c.tx_power, p);
  read(j, "path_loss_exponent", c.path_loss_exponent, p);
  read(j, "noise_floor", c.noise_floor, p);
  read(j, "sensitivity", c.sensitivity, p);
  read(j, "sinr_threshold", c.sinr_threshold, p);
  read(j, "wall_attenuation", c.wall_attenuation, p);
  read(j, "interior_attenuation", c.interior_attenuation, p);
  read(j, "obstacle_shadowing_enabled", c.obstacle_shadowing_enabled, p);
  read(j, "propagation_delay", c.propagation_delay, p);
  read(j, "extra_loss_probability", c.extra_loss_probability, p);
  if (j.contains("carrier_sense_threshold")) {
    const auto& v = j.at("carrier_sense_threshold");
    if (v.is_null()) {
      c.carrier_sense_threshold.reset();
    } else {
      double t = 0.0;
      read(j, "carrier_sense_threshold", t, p);
      c.carrier_sense_threshold = t;
    }
  }
}

void apply_mac(MacConfig& m, const json& j) {
  const std::string p = "mac.";
  check_keys(j,
             {"bitrate", "cw_slots", "slot_time", "aifs", "preamble", "plcp", "beacon_size",
              "queue_capacity"},
             p);
  read(j, "bitrate", m.bitrate, p);
  read(j, "cw_slots", m.cw_slots, p);
  read(j, "slot_time", m.slot_time, p);
  read(j, "aifs", m.aifs, p);
  read(j, "preamble", m.preamble, p);
  read(j, "plcp", m.plcp, p);
  read(j, "beacon_size", m.beacon_size, p);
  read(j, "queue_capacity", m.queue_capacity, p);
}

void apply_mobility(MobilityConfig& m, const json& j) {
  const std::string p = "mobility.";
  check_keys(j, {"bounds", "block_pitch", "building_inset", "speed", "step"}, p);
  if (j.contains("bounds")) {
    std::array<double, 2> b{};
    read(j, "bounds", b, p);
    m.bounds = {b[0], b[1]};
  }
  read(j, "block_pitch", m.block_pitch, p);
  read(j, "building_inset", m.building_inset, p);
  read(j, "speed", m.speed, p);
  read(j, "step", m.step, p);
}

void apply_adaptive(AdaptiveConfig& a, const json& j) {
  const std::string p = "adaptive.";
  check_keys(j,
             {"gain_p", "gain_i", "gain_d", "interval_min", "interval_max", "derivative_sign",
              "initial_rate", "staleness_periods", "max_feedback_records"},
             p);
  read(j, "gain_p", a.pid.gain_p, p);
  read(j, "gain_i", a.pid.gain_i, p);
  read(j, "gain_d", a.pid.gain_d, p);
  read(j, "interval_min", a.pid.interval_min, p);
  read(j, "interval_max", a.pid.interval_max, p);
  if (j.contains("derivative_sign")) {
    std::string s;
    read(j, "derivative_sign", s, p);
    if (s == "previous_minus_current") {
      a.pid.derivative_sign = DerivativeSign::previous_minus_current;
    } else if (s == "current_minus_previous") {
      a.pid.derivative_sign = DerivativeSign::current_minus_previous;
    } else {
      throw std::invalid_argument("adaptive.derivative_sign must be previous_minus_current or "
                                  "current_minus_previous");
    }
  }
  read(j, "initial_rate", a.initial_rate, p);
  read(j, "staleness_periods", a.staleness_periods, p);
  read(j, "max_feedback_records", a.max_feedback_records, p);
}

std::vector<WeightParams> parse_weights(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("weight_params must be a list");
  std::vector<WeightParams> out;
  for (const auto& e : j) {
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out.push_back({e[0].get<double>(), e[1].get<double>()});
    } else if (e.is_object() && e.contains("alpha") && e.contains("beta")) {
      out.push_back({e.at("alpha").get<double>(), e.at("beta").get<double>()});
    } else {
      throw std::invalid_argument("weight_params entries must be [alpha, beta] pairs");
    }
  }
  return out;
}

std::vector<Placement> parse_placements(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("placements must be a list");
  std::vector<Placement> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) {
      throw std::invalid_argument("placements entries must be [x, y, heading]");
    }
    out.push_back({{e[0].get<double>(), e[1].get<double>()}, e[2].get<double>()});
  }
  return out;
}

}  // namespace

void apply_json(ScenarioConfig& cfg, const json& j) {
  check_keys(j,
             {"scenario", "vehicle_count", "sim_time", "warmup", "beacon_mode", "beacon_rate",
              "weight_params", "target", "seed", "channel", "mac", "mobility", "adaptive",
              "placements", "keep_samples", "log_receptions", "trace_receptions"},
             "");
  if (j.contains("scenario")) {
    std::string s;
    read(j, "scenario", s, "");
    cfg.kind = parse_scenario_kind(s);
  }
  read(j, "vehicle_count", cfg.vehicle_count, "");
  read(j, "sim_time", cfg.sim_time, "");
  read(j, "warmup", cfg.warmup, "");
  if (j.contains("beacon_mode")) {
    std::string s;
    read(j, "beacon_mode", s, "");
    cfg.beacon_mode = parse_beacon_mode(s);
  }
  read(j, "beacon_rate", cfg.beacon_rate, "");
  if (j.contains("weight_params")) cfg.weight_params = parse_weights(j.at("weight_params"));
  read(j, "target", cfg.target.target, "");
  read(j, "seed", cfg.seed, "");
  if (j.contains("channel")) apply_channel(cfg.channel, j.at("channel"));
  if (j.contains("mac")) apply_mac(cfg.mac, j.at("mac"));
  if (j.contains("mobility")) apply_mobility(cfg.mobility, j.at("mobility"));
  if (j.contains("adaptive")) apply_adaptive(cfg.adaptive, j.at("adaptive"));
  if (j.contains("placements")) cfg.placements = parse_placements(j.at("placements"));
  read(j, "keep_samples", cfg.keep_samples, "");
  read(j, "log_receptions", cfg.log_receptions, "");
  read(j, "trace_receptions", cfg.trace_receptions, "");
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  ScenarioConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  json weights = json::array();
  for (const auto& w : cfg.weight_params) weights.push_back({w.alpha, w.beta});
  json placements = json::array();
  for (const auto& p : cfg.placements) {
    placements.push_back({p.position.x, p.position.y, p.heading});
  }
  const auto& c = cfg.channel;
  const auto& m = cfg.mac;
  const auto& pid = cfg.adaptive.pid;
  return json{
      {"scenario", std::string(to_string(cfg.kind))},
      {"vehicle_count", cfg.vehicle_count},
      {"sim_time", cfg.sim_time},
      {"warmup", cfg.warmup},
      {"beacon_mode", std::string(to_string(cfg.beacon_mode))},
      {"beacon_rate", cfg.beacon_rate},
      {"weight_params", weights},
      {"target", cfg.target.target},
      {"seed", cfg.seed},
      {"channel",
       {{"carrier_frequency", c.carrier_frequency},
        {"tx_power", c.tx_power},
        {"path_loss_exponent", c.path_loss_exponent},
        {"noise_floor", c.noise_floor},
        {"sensitivity", c.sensitivity},
        {"sinr_threshold", c.sinr_threshold},
        {"wall_attenuation", c.wall_attenuation},
        {"interior_attenuation", c.interior_attenuation},
        {"obstacle_shadowing_enabled", c.obstacle_shadowing_enabled},
        {"propagation_delay", c.propagation_delay},
        {"extra_loss_probability", c.extra_loss_probability},
        {"carrier_sense_threshold",
         c.carrier_sense_threshold ? json(*c.carrier_sense_threshold) : json(nullptr)}}},
      {"mac",
       {{"bitrate", m.bitrate},
        {"cw_slots", m.cw_slots},
        {"slot_time", m.slot_time},
        {"aifs", m.aifs},
        {"preamble", m.preamble},
        {"plcp", m.plcp},
        {"beacon_size", m.beacon_size},
        {"queue_capacity", m.queue_capacity}}},
      {"mobility",
       {{"bounds", {cfg.mobility.bounds.x, cfg.mobility.bounds.y}},
        {"block_pitch", cfg.mobility.block_pitch},
        {"building_inset", cfg.mobility.building_inset},
        {"speed", cfg.mobility.speed},
        {"step", cfg.mobility.step}}},
      {"adaptive",
       {{"gain_p", pid.gain_p},
        {"gain_i", pid.gain_i},
        {"gain_d", pid.gain_d},
        {"interval_min", pid.interval_min},
        {"interval_max", pid.interval_max},
        {"derivative_sign", pid.derivative_sign == DerivativeSign::previous_minus_current
                                ? "previous_minus_current"
                                : "current_minus_previous"},
        {"initial_rate", cfg.adaptive.initial_rate},
        {"staleness_periods", cfg.adaptive.staleness_periods},
        {"max_feedback_records", cfg.adaptive.max_feedback_records}}},
      {"placements", placements},
      {"keep_samples", cfg.keep_samples},
      {"log_receptions", cfg.log_receptions},
      {"trace_receptions", cfg.trace_receptions},
  };
}

void write_manifest(const std::filesystem::path& path, const json& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace saoi
