// Command-line front end: run, sweep, analytic, report.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saoi/config.hpp"
#include "saoi/engine.hpp"
#include "saoi/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace saoi;

namespace {

const std::vector<double> kTableRates{1, 2, 5, 8, 10, 16, 20, 25, 40, 50, 100};

struct CommonArgs {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out = "saoi_out";
  std::optional<std::string> scenario;
  std::optional<int> vehicle_count;
  std::optional<double> sim_time;
  std::optional<double> warmup;
  std::optional<std::string> beacon_mode;
  std::optional<double> beacon_rate;
  std::vector<std::string> weight_params;
  std::optional<double> target;
  std::optional<bool> keep_samples;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config_file, "JSON config file; command-line flags win")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", a.seed, "master seed");
  app->add_option("--out", a.out, "output directory")->capture_default_str();
  app->add_option("--scenario", a.scenario,
                  "freespace | freespace_static | manhattan | manhattan_static");
  app->add_option("--vehicle_count", a.vehicle_count, "number of vehicles");
  app->add_option("--sim_time", a.sim_time, "simulated seconds");
  app->add_option("--warmup", a.warmup, "seconds discarded before recording");
  app->add_option("--beacon_mode", a.beacon_mode, "fixed | adaptive");
  app->add_option("--beacon_rate", a.beacon_rate, "fixed beacon rate in Hz");
  app->add_option("--weight_params", a.weight_params,
                  "weighting as alpha,beta; repeat for several");
  app->add_option("--target", a.target, "target AoI in seconds");
  app->add_option("--keep_samples", a.keep_samples, "store every PAoI sample (true/false)");
  app->add_option("--set", a.sets, "nested override, e.g. mac.cw_slots=8 or channel.sensitivity=-90");
}

WeightParams parse_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("expected alpha,beta in '" + s + "'");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw std::invalid_argument("expected alpha,beta in '" + s + "'");
  }
}

json parse_scalar(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::parse_error&) {
    return v;  // bare strings need no quotes
  }
}

ScenarioConfig build_config(const CommonArgs& a) {
  ScenarioConfig cfg;
  if (!a.config_file.empty()) cfg = load_config(a.config_file);
  json o = json::object();
  if (a.seed) o["seed"] = *a.seed;
  if (a.scenario) o["scenario"] = *a.scenario;
  if (a.vehicle_count) o["vehicle_count"] = *a.vehicle_count;
  if (a.sim_time) o["sim_time"] = *a.sim_time;
  if (a.warmup) o["warmup"] = *a.warmup;
  if (a.beacon_mode) o["beacon_mode"] = *a.beacon_mode;
  if (a.beacon_rate) o["beacon_rate"] = *a.beacon_rate;
  if (a.target) o["target"] = *a.target;
  if (a.keep_samples) o["keep_samples"] = *a.keep_samples;
  if (!a.weight_params.empty()) {
    json w = json::array();
    for (const auto& s : a.weight_params) {
      const WeightParams p = parse_pair(s);
      w.push_back({p.alpha, p.beta});
    }
    o["weight_params"] = w;
  }
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    }
    json::json_pointer ptr("/" + std::regex_replace(s.substr(0, eq), std::regex("\\."), "/"));
    o[ptr] = parse_scalar(s.substr(eq + 1));
  }
  apply_json(cfg, o);
  cfg.validate();
  return cfg;
}

ExportItem item_for(const ScenarioConfig& cfg, const MetricsStore& store) {
  const double rate =
      cfg.beacon_mode == BeaconMode::fixed ? cfg.beacon_rate : cfg.adaptive.initial_rate;
  return {&store, rate, cfg.seed, std::string(to_string(cfg.kind)),
          std::string(to_string(cfg.beacon_mode))};
}

void print_summary(const ScenarioConfig& cfg, const MetricsStore& store) {
  std::printf("%s %s rate=%s seed=%llu: cbr=%s brr=%s known=%s tx=%lld samples=%zu\n",
              std::string(to_string(cfg.kind)).c_str(),
              std::string(to_string(cfg.beacon_mode)).c_str(),
              format_g9(item_for(cfg, store).beacon_rate).c_str(),
              static_cast<unsigned long long>(cfg.seed), format_g9(network_cbr(store)).c_str(),
              format_g9(compute_brr(store)).c_str(),
              format_g9(mean_known_neighbors_ratio(store)).c_str(),
              static_cast<long long>(store.tx_completed), store.observations.size());
  if (store.observations.empty()) return;
  for (const auto& p : store.weight_params) {
    const NetworkAoI n = network_aoi(store, p);
    std::printf("  alpha=%s beta=%s network_paoi=%s target=%s below=%s pairs=%lld\n",
                format_g9(p.alpha).c_str(), format_g9(p.beta).c_str(), format_g9(n.paoi).c_str(),
                format_g9(n.target).c_str(), format_g9(n.below_target_ratio).c_str(),
                static_cast<long long>(n.pairs));
  }
}

json files_json(const std::vector<fs::path>& files) {
  json j = json::array();
  for (const auto& f : files) j.push_back(f.filename().string());
  return j;
}

int cmd_run(const CommonArgs& a) {
  const ScenarioConfig cfg = build_config(a);
  const MetricsStore store = run_scenario(cfg);
  print_summary(cfg, store);
  CsvExporter exporter(a.out);
  exporter.add(item_for(cfg, store));
  auto files = exporter.finish();
  write_manifest(fs::path(a.out) / "manifest.json",
                 {{"verb", "run"}, {"config", to_json(cfg)}, {"files", files_json(files)}});
  return 0;
}

int cmd_sweep(const CommonArgs& a, std::vector<double> rates, std::vector<std::uint64_t> seeds,
              int jobs) {
  const ScenarioConfig base = build_config(a);
  if (rates.empty()) rates = kTableRates;
  if (seeds.empty()) seeds = {base.seed};
  CsvExporter exporter(a.out);
  json runs = json::array();
  SweepOptions opt;
  opt.max_parallel = jobs;
  opt.on_run = [&](const ScenarioConfig& cfg, const MetricsStore& store) {
    print_summary(cfg, store);
    exporter.add(item_for(cfg, store));
    runs.push_back(to_json(cfg));
    return false;
  };
  const auto cells = sweep(base, rates, base.weight_params, seeds, opt);
  json failures = json::array();
  for (const auto& c : cells) {
    if (c.error.empty()) continue;
    std::fprintf(stderr, "run failed: rate=%s alpha=%s beta=%s seed=%llu: %s\n",
                 format_g9(c.beacon_rate).c_str(), format_g9(c.params.alpha).c_str(),
                 format_g9(c.params.beta).c_str(), static_cast<unsigned long long>(c.seed),
                 c.error.c_str());
    failures.push_back({{"beacon_rate", c.beacon_rate},
                        {"alpha", c.params.alpha},
                        {"beta", c.params.beta},
                        {"seed", c.seed},
                        {"error", c.error}});
  }
  auto files = exporter.finish();
  write_manifest(fs::path(a.out) / "manifest.json", {{"verb", "sweep"},
                                                     {"base", to_json(base)},
                                                     {"rates", rates},
                                                     {"seeds", seeds},
                                                     {"runs", runs},
                                                     {"failures", failures},
                                                     {"files", files_json(files)}});
  return failures.empty() ? 0 : 1;
}

struct AnalyticArgs {
  std::string over = "alpha";
  std::vector<double> values;
  std::optional<double> psd;
  std::optional<double> system_time;
};

int cmd_analytic(const CommonArgs& a, AnalyticArgs an) {
  ScenarioConfig cfg = build_config(a);
  if (an.over != "alpha" && an.over != "beta") {
    throw std::invalid_argument("--over must be alpha or beta");
  }
  if (an.values.empty()) {
    for (int k = 0; k <= 20; ++k) {
      an.values.push_back(an.over == "alpha" ? 0.05 * k : 0.0025 * k);
    }
  }
  const WeightParams fixed = cfg.weight_params.front();

  // Delivery probability per 10 m distance bin, either given or measured.
  std::map<int, double> psd_by_bin;
  double system_time = an.system_time.value_or(0.0);
  if (!an.psd) {
    cfg.keep_samples = false;
    const MetricsStore store = run_scenario(cfg);
    for (const auto& [bin, c] : store.delivery_by_distance) {
      if (c.attempts > 0) psd_by_bin[bin] = static_cast<double>(c.successes) / c.attempts;
    }
    if (!an.system_time) system_time = store.mean_latency();
  } else if (!an.system_time) {
    system_time = frame_airtime(cfg.mac.beacon_size, cfg.mac) + cfg.mac.aifs +
                  cfg.channel.propagation_delay;
  }
  const double interarrival = 1.0 / cfg.beacon_rate;

  // Same geometry as the simulated run for this seed.
  const RoadNetwork net = build_network(cfg.kind, cfg.mobility.bounds, cfg.mobility.block_pitch,
                                        cfg.mobility.building_inset);
  Rng placement = make_stream(cfg.seed, RngStream::placement);
  std::vector<VehicleState> vehicles;
  if (cfg.placements.empty()) {
    vehicles = spawn_vehicles(net, cfg.vehicle_count, 0.0, placement);
  } else {
    for (int i = 0; i < cfg.vehicle_count; ++i) {
      VehicleState v;
      v.id = i;
      v.position = cfg.placements[i].position;
      v.heading = wrap_angle(cfg.placements[i].heading);
      vehicles.push_back(v);
    }
  }

  fs::create_directories(a.out);
  const fs::path path = fs::path(a.out) / "analytic.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "parameter,value,alpha,beta,network_paoi,network_target,pairs,excluded_pairs\n";
  for (double value : an.values) {
    WeightParams p = fixed;
    (an.over == "alpha" ? p.alpha : p.beta) = value;
    double sum = 0.0;
    double sum_target = 0.0;
    long long pairs = 0;
    long long excluded = 0;
    for (const auto& rx : vehicles) {
      for (const auto& tx : vehicles) {
        if (rx.id == tx.id) continue;
        const RelativeGeometry g = relative_geometry(rx, tx);
        double psd = an.psd.value_or(0.0);
        if (!an.psd) {
          const auto it = psd_by_bin.find(static_cast<int>(std::lround(g.distance / 10.0)));
          psd = it == psd_by_bin.end() ? 0.0 : it->second;
        }
        if (!(psd > 0.0)) {
          ++excluded;
          continue;
        }
        const double omega = weight_coefficient(g.bearing, g.distance, p);
        sum += omega * analytic_paoi(interarrival, system_time, psd);
        sum_target += omega * cfg.target.target;
        ++pairs;
      }
    }
    const double mean = pairs ? sum / pairs : std::nan("");
    const double mean_target = pairs ? sum_target / pairs : std::nan("");
    out << an.over << ',' << format_g9(value) << ',' << format_g9(p.alpha) << ','
        << format_g9(p.beta) << ',' << format_g9(mean) << ',' << format_g9(mean_target) << ','
        << pairs << ',' << excluded << '\n';
    std::printf("%s=%s network_paoi=%s pairs=%lld\n", an.over.c_str(), format_g9(value).c_str(),
                format_g9(mean).c_str(), pairs);
  }
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
  write_manifest(fs::path(a.out) / "manifest.json",
                 {{"verb", "analytic"},
                  {"config", to_json(cfg)},
                  {"over", an.over},
                  {"values", an.values},
                  {"psd", an.psd ? json(*an.psd) : json("measured per 10 m bin")},
                  {"mean_system_time", system_time},
                  {"files", json::array({"analytic.csv"})}});
  return 0;
}

int cmd_report(const std::string& in_dir, const std::vector<std::string>& weights, double target,
               const std::string& out) {
  const auto runs = import_samples(fs::path(in_dir) / "paoi_samples.csv");
  std::vector<WeightParams> params;
  for (const auto& w : weights) params.push_back(parse_pair(w));
  if (params.empty()) params = {WeightParams{}};
  fs::create_directories(out);
  const fs::path path = fs::path(out) / "report.csv";
  std::ofstream csv(path, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + path.string());
  csv << "scenario,mode,beacon_rate,seed,alpha,beta,network_paoi,network_target,pairs,samples,"
         "weighted_ratio,unweighted_ratio\n";
  for (const auto& run : runs) {
    MetricsStore st;
    st.target.target = target;
    st.observations = run.observations;
    int n = 0;
    for (const auto& o : st.observations) n = std::max({n, o.receiver + 1, o.sender + 1});
    st.vehicle_count = n;
    for (const auto& p : params) {
      const NetworkAoI net = network_aoi(st, p);
      csv << run.scenario << ',' << run.mode << ',' << format_g9(run.beacon_rate) << ','
          << run.seed << ',' << format_g9(p.alpha) << ',' << format_g9(p.beta) << ','
          << format_g9(net.paoi) << ',' << format_g9(net.target) << ',' << net.pairs << ','
          << net.samples << ',' << format_g9(net.below_target_ratio) << ','
          << format_g9(net.below_target_ratio_unweighted) << '\n';
      std::printf("%s %s rate=%s seed=%llu alpha=%s beta=%s network_paoi=%s pairs=%lld\n",
                  run.scenario.c_str(), run.mode.c_str(), format_g9(run.beacon_rate).c_str(),
                  static_cast<unsigned long long>(run.seed), format_g9(p.alpha).c_str(),
                  format_g9(p.beta).c_str(), format_g9(net.paoi).c_str(),
                  static_cast<long long>(net.pairs));
    }
  }
  csv.close();
  if (!csv) throw std::runtime_error("write failed for " + path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially weighted AoI simulator for vehicular beaconing"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "simulate one scenario and export CSVs");
  add_common(run, run_args);

  CommonArgs sweep_args;
  std::vector<double> rates;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  auto* sw = app.add_subcommand("sweep", "rate x weighting x seed grid");
  add_common(sw, sweep_args);
  sw->add_option("--rates", rates, "beacon rates in Hz (default: 1 2 5 8 10 16 20 25 40 50 100)");
  sw->add_option("--seeds", seeds, "seeds (default: --seed)");
  sw->add_option("--jobs", jobs, "concurrent runs (0: all cores)")->capture_default_str();

  CommonArgs an_common;
  AnalyticArgs an;
  auto* analytic = app.add_subcommand("analytic", "analytic network PAoI over alpha or beta");
  add_common(analytic, an_common);
  analytic->add_option("--over", an.over, "alpha | beta")->capture_default_str();
  analytic->add_option("--values", an.values, "parameter values to evaluate");
  analytic->add_option("--psd", an.psd,
                       "delivery probability for every link (default: measured per 10 m bin)");
  analytic->add_option("--mean_system_time", an.system_time, "E{T} in seconds");

  CommonArgs report_common;
  std::string in_dir;
  std::vector<std::string> report_weights;
  double report_target = 0.1;
  auto* report = app.add_subcommand("report", "recompute statistics from exported CSVs");
  report->add_option("--in", in_dir, "directory holding paoi_samples.csv")->required();
  report->add_option("--weight_params", report_weights, "alpha,beta; repeat for several");
  report->add_option("--target", report_target, "target AoI in seconds")->capture_default_str();
  report->add_option("--out", report_common.out, "output directory")->capture_default_str();
  report->add_option("--config", report_common.config_file, "accepted for symmetry; unused");
  report->add_option("--seed", report_common.seed, "accepted for symmetry; unused");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sw) return cmd_sweep(sweep_args, rates, seeds, jobs);
    if (*analytic) return cmd_analytic(an_common, an);
    if (*report) return cmd_report(in_dir, report_weights, report_target, report_common.out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "saoi: %s\n", e.what());
    return 2;
  }
  return 0;
}
