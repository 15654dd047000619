#include "saoi/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <tuple>

namespace saoi {

double compute_cbr(const MetricsStore& store, int vehicle, Interval window) {
  if (window.end <= window.start) throw std::invalid_argument("CBR window has zero length");
  if (vehicle < 0 || vehicle >= store.vehicle_count) {
    throw std::out_of_range("no vehicle " + std::to_string(vehicle));
  }
  const double len = to_seconds(window.end - window.start);
  if (window.start == store.warmup && window.end == store.sim_time &&
      !store.busy_in_window.empty()) {
    return to_seconds(store.busy_in_window[vehicle]) / len;
  }
  if (store.busy.size() == 0) {
    throw std::logic_error("busy intervals were not kept; only the run window is available");
  }
  return to_seconds(store.busy.busy_time(vehicle, window)) / len;
}

double network_cbr(const MetricsStore& store) {
  if (store.vehicle_count == 0) return 0.0;
  double sum = 0.0;
  for (int v = 0; v < store.vehicle_count; ++v) sum += compute_cbr(store, v, store.window());
  return sum / store.vehicle_count;
}

double compute_brr(const MetricsStore& store, BrrDenominator denominator) {
  if (denominator == BrrDenominator::in_range) {
    return store.rx_in_range ? static_cast<double>(store.rx_success) /
                                   static_cast<double>(store.rx_in_range)
                             : 0.0;
  }
  const auto potential =
      static_cast<double>(store.tx_completed) * static_cast<double>(store.vehicle_count - 1);
  return potential > 0.0 ? static_cast<double>(store.rx_success) / potential : 0.0;
}

double known_neighbors_ratio(const MetricsStore& store, int vehicle) {
  if (store.vehicle_count < 2) return 0.0;
  return static_cast<double>(store.known_neighbors.at(vehicle)) /
         static_cast<double>(store.vehicle_count - 1);
}

double mean_known_neighbors_ratio(const MetricsStore& store) {
  if (store.known_neighbors.empty()) return 0.0;
  double sum = 0.0;
  for (int v = 0; v < store.vehicle_count; ++v) sum += known_neighbors_ratio(store, v);
  return sum / store.vehicle_count;
}

std::vector<DistanceBin> bin_paoi_by_distance(std::span<const PAoISample> samples, double bin) {
  if (!(bin > 0.0)) throw std::invalid_argument("distance bin must be > 0");
  struct Acc {
    double paoi = 0.0;
    double weighted = 0.0;
    std::int64_t n = 0;
  };
  std::map<long long, Acc> acc;
  for (const auto& s : samples) {
    Acc& a = acc[std::llround(s.link_distance / bin)];
    a.paoi += s.paoi;
    a.weighted += s.weighted_paoi;
    ++a.n;
  }
  std::vector<DistanceBin> out;
  out.reserve(acc.size());
  for (const auto& [k, a] : acc) {
    const auto n = static_cast<double>(a.n);
    out.push_back({static_cast<double>(k) * bin, a.paoi / n, a.weighted / n, a.n});
  }
  return out;
}

ECDF::ECDF(std::vector<double> values) : sorted_(std::move(values)) {
  for (double v : sorted_) {
    if (std::isnan(v)) throw std::invalid_argument("eCDF of NaN");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double ECDF::operator()(double x) const {
  if (sorted_.empty()) throw std::domain_error("eCDF of an empty sample");
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ECDF::quantile(double q) const {
  if (sorted_.empty()) throw std::domain_error("quantile of an empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw std::domain_error("quantile level must lie in (0, 1]");
  const auto n = static_cast<double>(sorted_.size());
  auto k = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted_.size());
  return sorted_[k - 1];
}

double ECDF::mean() const {
  if (sorted_.empty()) throw std::domain_error("mean of an empty sample");
  double sum = 0.0;
  for (double v : sorted_) sum += v;
  return sum / static_cast<double>(sorted_.size());
}

DeviationStats deviation_from_target(std::span<const PAoISample> samples) {
  if (samples.empty()) throw std::domain_error("deviation of an empty sample set");
  DeviationStats stats;
  std::vector<double> dev;
  dev.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.omega == 0.0) {
      ++stats.excluded;
      continue;
    }
    dev.push_back(std::abs(s.weighted_paoi - s.weighted_target) / s.weighted_target);
  }
  if (dev.empty()) throw std::domain_error("every sample has omega = 0; deviation undefined");
  const ECDF ecdf(std::move(dev));
  stats.count = static_cast<std::int64_t>(ecdf.size());
  stats.mean = ecdf.mean();
  for (int p : {5, 25, 50, 75, 95, 99}) stats.percentiles[p] = ecdf.quantile(p / 100.0);
  return stats;
}

NetworkAoI network_aoi(const MetricsStore& store, WeightParams params) {
  // Same arithmetic as summarize_links + weighted_network_avg, without
  // materialising one PAoISample per observation.
  struct Acc {
    double sum = 0.0;
    std::int64_t n = 0;
    SimTime latest_at{std::numeric_limits<std::int64_t>::min()};
    double latest_omega = 1.0;
  };
  const auto n = static_cast<std::size_t>(store.vehicle_count);
  std::vector<Acc> acc(n * n);
  NetworkAoI out;
  out.params = params;
  std::int64_t below_w = 0;
  std::int64_t below_u = 0;
  double pooled = 0.0;
  const double target = store.target.target;
  for (const auto& o : store.observations) {
    const PAoISample s = weigh(o, params, store.target);
    Acc& a = acc[static_cast<std::size_t>(o.receiver) * n + o.sender];
    a.sum += s.paoi;
    ++a.n;
    if (o.recorded_at >= a.latest_at) {
      a.latest_at = o.recorded_at;
      a.latest_omega = s.omega;
    }
    pooled += s.weighted_paoi;
    below_w += meets_target(s.weighted_paoi, s.weighted_target) ? 1 : 0;
    below_u += meets_target(s.paoi, target) ? 1 : 0;
  }
  double sum_paoi = 0.0;
  double sum_target = 0.0;
  for (const auto& a : acc) {
    if (a.n == 0) continue;
    sum_paoi += a.latest_omega * (a.sum / static_cast<double>(a.n));
    sum_target += a.latest_omega * target;
    ++out.pairs;
  }
  out.samples = static_cast<std::int64_t>(store.observations.size());
  if (out.pairs > 0) {
    out.paoi = sum_paoi / static_cast<double>(out.pairs);
    out.target = sum_target / static_cast<double>(out.pairs);
  }
  if (out.samples > 0) {
    const auto k = static_cast<double>(out.samples);
    out.pooled_paoi = pooled / k;
    out.below_target_ratio = static_cast<double>(below_w) / k;
    out.below_target_ratio_unweighted = static_cast<double>(below_u) / k;
  }
  return out;
}

std::vector<double> observed_beacon_rates(const MetricsStore& store) {
  std::vector<double> out;
  out.reserve(store.beacon_rate_series.size());
  for (const auto& r : store.beacon_rate_series) {
    if (r.time >= store.warmup) out.push_back(1.0 / r.interval);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kLabel = "scenario,mode,beacon_rate,seed";

std::string label_of(const ExportItem& item) {
  return item.scenario + "," + item.mode + "," + format_g9(item.beacon_rate) + "," +
         std::to_string(item.seed);
}

}  // namespace

struct CsvExporter::File {
  File(std::filesystem::path p, const std::string& columns) : path(std::move(p)) {
    out.open(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kLabel << ',' << columns << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((out << (first ? "" : ",") << fields, first = false), ...);
    out << '\n';
  }

  void close() {
    out.close();
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }

  std::filesystem::path path;
  std::ofstream out;
};

CsvExporter::CsvExporter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw std::runtime_error("cannot create output directory " + dir_.string());
  }
  samples_ = open("paoi_samples.csv", "receiver,sender,recorded_at,paoi,link_distance,bearing");
  by_distance_ =
      open("paoi_by_distance.csv", "alpha,beta,distance,mean_paoi,mean_weighted_paoi,count");
  network_ = open("network_aoi.csv",
                  "alpha,beta,network_paoi,network_target,pooled_weighted_paoi,pairs,samples");
  below_ = open("below_target_ratio.csv",
                "alpha,beta,weighted_ratio,unweighted_ratio,samples,deviation_mean,deviation_p5,"
                "deviation_p50,deviation_p95,deviation_excluded");
  networking_ = open("networking.csv",
                     "cbr,brr,brr_in_range,known_neighbors_ratio,transmissions,mean_latency,"
                     "generated,replaced");
}

CsvExporter::~CsvExporter() = default;

std::unique_ptr<CsvExporter::File> CsvExporter::open(const char* name, const char* columns) {
  written_.push_back(dir_ / name);
  return std::make_unique<File>(written_.back(), columns);
}

void CsvExporter::add(const ExportItem& item) {
  if (!item.store) throw std::invalid_argument("export item without a store");
  const MetricsStore& st = *item.store;
  const std::string head = label_of(item);

  for (const auto& o : st.observations) {
    samples_->row(head, o.receiver, o.sender, format_exact(to_seconds(o.recorded_at)),
                  format_exact(to_seconds(o.paoi)), format_exact(o.link_distance),
                  format_exact(o.bearing));
  }
  for (const auto& p : st.weight_params) {
    const std::string pl = head + "," + format_g9(p.alpha) + "," + format_g9(p.beta);
    const auto weighted = weigh_all(st.observations, p, st.target);
    for (const auto& b : bin_paoi_by_distance(weighted)) {
      by_distance_->row(pl, format_g9(b.distance), format_g9(b.mean_paoi),
                        format_g9(b.mean_weighted_paoi), b.count);
    }
    const NetworkAoI net = network_aoi(st, p);
    network_->row(pl, format_g9(net.paoi), format_g9(net.target), format_g9(net.pooled_paoi),
                  net.pairs, net.samples);
    if (weighted.empty()) continue;
    std::string dev = "nan,nan,nan,nan," + std::to_string(weighted.size());
    try {
      const DeviationStats d = deviation_from_target(weighted);
      dev = format_g9(d.mean) + "," + format_g9(d.percentiles.at(5)) + "," +
            format_g9(d.percentiles.at(50)) + "," + format_g9(d.percentiles.at(95)) + "," +
            std::to_string(d.excluded);
    } catch (const std::domain_error&) {
      // every sample has omega = 0: the deviation columns stay nan
    }
    below_->row(pl, format_g9(net.below_target_ratio),
                format_g9(net.below_target_ratio_unweighted), net.samples, dev);
  }
  networking_->row(head, format_g9(network_cbr(st)), format_g9(compute_brr(st)),
                   format_g9(compute_brr(st, BrrDenominator::in_range)),
                   format_g9(mean_known_neighbors_ratio(st)), st.tx_completed,
                   format_g9(st.mean_latency()), st.generated, st.replaced);

  if (st.controller_log.empty() && st.beacon_rate_series.empty()) return;
  if (!ecdf_) {
    ecdf_ = open("beacon_rate_ecdf.csv", "alpha,beta,rate,ecdf");
    controller_ = open("controller_log.csv",
                       "time,vehicle,error,adjustment,interval,weighted_paoi,weighted_target,"
                       "reporters");
  }
  const WeightParams p = st.weight_params.empty() ? WeightParams{} : st.weight_params.front();
  const std::string pl = head + "," + format_g9(p.alpha) + "," + format_g9(p.beta);
  const auto rates = observed_beacon_rates(st);
  if (!rates.empty()) {
    const ECDF e(rates);
    const auto& v = e.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k + 1 < v.size() && v[k + 1] == v[k]) continue;  // one row per step
      ecdf_->row(pl, format_g9(v[k]),
                 format_g9(static_cast<double>(k + 1) / static_cast<double>(v.size())));
    }
  }
  for (const auto& c : st.controller_log) {
    controller_->row(head, format_g9(to_seconds(c.time)), c.vehicle, format_g9(c.error),
                     format_g9(c.adjustment), format_g9(c.interval), format_g9(c.weighted_paoi),
                     format_g9(c.weighted_target), c.reporters);
  }
}

std::vector<std::filesystem::path> CsvExporter::finish() {
  for (auto* f : {&samples_, &by_distance_, &network_, &below_, &networking_, &ecdf_,
                  &controller_}) {
    if (*f) {
      (*f)->close();
      f->reset();
    }
  }
  return written_;
}

std::vector<std::filesystem::path> export_csv(std::span<const ExportItem> items,
                                              const std::filesystem::path& output_dir) {
  CsvExporter exporter(output_dir);
  for (const auto& item : items) exporter.add(item);
  return exporter.finish();
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad field '" +
                             std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<ImportedRun> import_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const std::string expected =
      std::string(kLabel) + ",receiver,sender,recorded_at,paoi,link_distance,bearing";
  if (line != expected) throw std::runtime_error(path.string() + ": unexpected header");

  std::vector<ImportedRun> runs;
  std::map<std::tuple<std::string, std::string, double, std::uint64_t>, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 10) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 10 fields");
    }
    const std::string scenario(f[0]);
    const std::string mode(f[1]);
    const double rate = parse_field<double>(f[2], path, lineno);
    const auto seed = parse_field<std::uint64_t>(f[3], path, lineno);
    auto [it, inserted] = index.try_emplace({scenario, mode, rate, seed}, runs.size());
    if (inserted) runs.push_back({rate, seed, scenario, mode, {}});
    LinkObservation o;
    o.receiver = parse_field<int>(f[4], path, lineno);
    o.sender = parse_field<int>(f[5], path, lineno);
    o.recorded_at = from_seconds(parse_field<double>(f[6], path, lineno));
    o.paoi = from_seconds(parse_field<double>(f[7], path, lineno));
    o.link_distance = parse_field<double>(f[8], path, lineno);
    o.bearing = parse_field<double>(f[9], path, lineno);
    runs[it->second].observations.push_back(o);
  }
  return runs;
}

}  // namespace saoi
