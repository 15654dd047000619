#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "saoi/aoi.hpp"
#include "saoi/channel.hpp"
#include "saoi/mac.hpp"
#include "saoi/time.hpp"

namespace saoi {

struct ControllerLogEntry {
  SimTime time{};
  int vehicle = -1;
  double error = 0.0;
  double adjustment = 0.0;
  double interval = 0.0;  // after clamping
  double weighted_paoi = 0.0;
  double weighted_target = 0.0;
  int reporters = 0;
};

/// Beacon interval of one vehicle right after a controller decision.
struct RateObservation {
  SimTime time{};
  int vehicle = -1;
  double interval = 0.0;
};

/// One decoded frame, as needed to replay a link's AoI sawtooth.
struct ReceptionLogEntry {
  int receiver = -1;
  int sender = -1;
  SimTime generated_at{};
  SimTime received_at{};
};

/// Per receiver-transmission outcome, kept only when tracing is enabled.
struct ReceptionTrace {
  std::uint64_t tx_id = 0;
  int receiver = -1;
  ReceptionOutcome outcome = ReceptionOutcome::collision;
};

struct DeliveryCounts {
  std::int64_t attempts = 0;
  std::int64_t successes = 0;
};

/// Everything a run records. Append-only while the run executes.
struct MetricsStore {
  int vehicle_count = 0;
  SimTime warmup{};
  SimTime sim_time{};
  TargetConfig target;
  std::vector<WeightParams> weight_params;

  std::vector<LinkObservation> observations;  // recorded_at > warmup
  BusyAccumulator busy;                       // only kept with samples
  std::vector<SimTime> busy_in_window;        // per vehicle, always

  // Transmission accounting; "post-warm-up" counters only include frames
  // that started after the warm-up and completed before the end.
  std::int64_t generated = 0;
  std::int64_t replaced = 0;
  std::int64_t pending_at_end = 0;
  std::int64_t tx_started = 0;
  std::int64_t tx_ended = 0;
  std::int64_t tx_in_flight_at_end = 0;
  std::int64_t tx_completed = 0;       // post-warm-up
  std::int64_t rx_success = 0;         // post-warm-up
  std::int64_t rx_in_range = 0;        // post-warm-up, power >= sensitivity
  std::int64_t rx_below_sensitivity = 0;
  std::int64_t rx_collision = 0;
  std::int64_t reception_decisions = 0;
  double latency_sum = 0.0;  // seconds, post-warm-up receptions
  std::int64_t latency_count = 0;
  std::vector<std::int64_t> tx_per_vehicle;
  std::vector<int> known_neighbors;  // distinct senders heard, whole run
  std::map<int, DeliveryCounts> delivery_by_distance;  // key: 10 m bin

  std::vector<RateObservation> beacon_rate_series;
  std::vector<ControllerLogEntry> controller_log;

  std::vector<ReceptionLogEntry> reception_log;  // optional
  std::vector<TransmissionEvent> tx_trace;       // optional
  std::vector<ReceptionTrace> rx_trace;          // optional

  Interval window() const { return {warmup, sim_time}; }
  double mean_latency() const {
    return latency_count ? latency_sum / static_cast<double>(latency_count) : 0.0;
  }
};

// ---------------------------------------------------------------------------
// Statistics

/// Busy time of `vehicle` over `window`, divided by the window length.
/// Windows other than the store's own need the busy intervals.
double compute_cbr(const MetricsStore& store, int vehicle, Interval window);
/// Mean over vehicles of compute_cbr on the store's post-warm-up window.
double network_cbr(const MetricsStore& store);

enum class BrrDenominator { all_others, in_range };

/// Successful receptions over transmissions times potential receivers.
double compute_brr(const MetricsStore& store,
                   BrrDenominator denominator = BrrDenominator::all_others);

double known_neighbors_ratio(const MetricsStore& store, int vehicle);
double mean_known_neighbors_ratio(const MetricsStore& store);

struct DistanceBin {
  double distance = 0.0;  // bin centre, meters
  double mean_paoi = 0.0;
  double mean_weighted_paoi = 0.0;
  std::int64_t count = 0;
};

/// Groups samples by round(distance / bin) * bin. Empty bins are absent.
std::vector<DistanceBin> bin_paoi_by_distance(std::span<const PAoISample> samples,
                                              double bin = 10.0);

/// Empirical CDF over a sorted copy of the values.
class ECDF {
 public:
  ECDF() = default;
  explicit ECDF(std::vector<double> values);

  /// Fraction of values <= x.
  double operator()(double x) const;
  /// Smallest value v with eCDF(v) >= q, q in (0, 1].
  double quantile(double q) const;
  double mean() const;

  std::size_t size() const { return sorted_.size(); }
  bool empty() const { return sorted_.empty(); }
  const std::vector<double>& values() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct DeviationStats {
  double mean = 0.0;
  std::map<int, double> percentiles;  // 5, 25, 50, 75, 95, 99
  std::int64_t count = 0;
  std::int64_t excluded = 0;  // omega = 0 samples
};

/// |omega*PAoI - omega*T| / (omega*T) over samples with omega > 0.
DeviationStats deviation_from_target(std::span<const PAoISample> samples);

/// The network-level summary of one weighting configuration.
struct NetworkAoI {
  WeightParams params;
  double paoi = 0.0;    // weighted network PAoI (pair means first)
  double target = 0.0;  // weighted network target
  double pooled_paoi = 0.0;  // mean over individual samples
  double below_target_ratio = 0.0;
  double below_target_ratio_unweighted = 0.0;
  std::int64_t pairs = 0;
  std::int64_t samples = 0;
};

NetworkAoI network_aoi(const MetricsStore& store, WeightParams params);

/// Beacon rates (Hz) set by controller decisions after the warm-up.
std::vector<double> observed_beacon_rates(const MetricsStore& store);

// ---------------------------------------------------------------------------
// CSV interchange

/// Formats with 9 significant digits.
std::string format_g9(double v);
/// Shortest representation that parses back to the identical double.
std::string format_exact(double v);

/// One exported run; the label fields prefix every row.
struct ExportItem {
  const MetricsStore* store = nullptr;
  double beacon_rate = 0.0;  // Hz; the initial rate for adaptive runs
  std::uint64_t seed = 0;
  std::string scenario;
  std::string mode;
};

/// Streams runs into paoi_samples.csv, paoi_by_distance.csv, network_aoi.csv,
/// below_target_ratio.csv and networking.csv; runs with controller activity
/// add beacon_rate_ecdf.csv and controller_log.csv. I/O failures throw
/// std::runtime_error naming the offending path.
class CsvExporter {
 public:
  explicit CsvExporter(std::filesystem::path output_dir);
  ~CsvExporter();
  CsvExporter(const CsvExporter&) = delete;
  CsvExporter& operator=(const CsvExporter&) = delete;

  void add(const ExportItem& item);
  /// Flushes and closes every file; returns the paths written.
  std::vector<std::filesystem::path> finish();

 private:
  struct File;
  std::unique_ptr<File> open(const char* name, const char* columns);

  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  std::unique_ptr<File> samples_, by_distance_, network_, below_, networking_;
  std::unique_ptr<File> ecdf_, controller_;
};

std::vector<std::filesystem::path> export_csv(std::span<const ExportItem> items,
                                              const std::filesystem::path& output_dir);

/// Reads paoi_samples.csv back into observations, grouped per (rate, seed).
struct ImportedRun {
  double beacon_rate = 0.0;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string mode;
  std::vector<LinkObservation> observations;
};
std::vector<ImportedRun> import_samples(const std::filesystem::path& csv_path);

}  // namespace saoi
