#include "saoi/engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>

#include "saoi/rng.hpp"

namespace saoi {

BeaconMode parse_beacon_mode(std::string_view name) {
  if (name == "fixed") return BeaconMode::fixed;
  if (name == "adaptive") return BeaconMode::adaptive;
  throw std::invalid_argument("unknown beacon_mode '" + std::string(name) +
                              "' (expected fixed or adaptive)");
}

std::string_view to_string(BeaconMode mode) {
  return mode == BeaconMode::fixed ? "fixed" : "adaptive";
}

void MobilityConfig::validate() const {
  if (!(bounds.x > 0.0) || !(bounds.y > 0.0)) {
    throw std::invalid_argument("mobility.bounds must be positive");
  }
  if (!(block_pitch > 0.0)) throw std::invalid_argument("mobility.block_pitch must be > 0");
  if (!(building_inset >= 0.0)) throw std::invalid_argument("mobility.building_inset must be >= 0");
  if (!(speed >= 0.0)) throw std::invalid_argument("mobility.speed must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("mobility.step must be > 0");
}

void AdaptiveConfig::validate() const {
  if (!(initial_rate > 0.0)) throw std::invalid_argument("adaptive.initial_rate must be > 0");
  if (!(staleness_periods > 0.0)) {
    throw std::invalid_argument("adaptive.staleness_periods must be > 0");
  }
  if (!(pid.interval_min > 0.0) || !(pid.interval_max >= pid.interval_min)) {
    throw std::invalid_argument("adaptive interval bounds must satisfy 0 < min <= max");
  }
}

void ScenarioConfig::validate() const {
  if (vehicle_count < 2) throw std::invalid_argument("vehicle_count must be >= 2");
  if (!(sim_time > 0.0)) throw std::invalid_argument("sim_time must be > 0");
  if (!(warmup >= 0.0) || !(warmup < sim_time)) {
    throw std::invalid_argument("warmup must lie in [0, sim_time)");
  }
  if (beacon_mode == BeaconMode::fixed && !(beacon_rate > 0.0)) {
    throw std::invalid_argument("beacon_rate must be > 0");
  }
  if (weight_params.empty()) throw std::invalid_argument("weight_params must not be empty");
  for (const auto& p : weight_params) p.validate();
  target.validate();
  channel.validate();
  mac.validate();
  mobility.validate();
  if (beacon_mode == BeaconMode::adaptive) adaptive.validate();
  if (!placements.empty() && static_cast<int>(placements.size()) != vehicle_count) {
    throw std::invalid_argument("placements must list exactly vehicle_count poses");
  }
}

namespace {

enum class EventKind : int {
  // Same-instant events run in this order: geometry first, then frames
  // leaving the air before new ones arrive.
  mobility_step = 0,
  signal_departure = 1,
  tx_end = 2,
  signal_arrival = 3,
  controller_step = 4,
  beacon_generation = 5,
  aifs_elapsed = 6,
  tx_start = 7,
};

struct Event {
  SimTime time;
  EventKind kind;
  std::uint64_t seq;
  int node;
  std::uint64_t arg;  // timer epoch, generation token or transmission id
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct Incoming {
  std::uint64_t tx;
  double power_mw;
  bool sensed;
  bool decodable;
  int bin;
};

struct Candidate {
  std::uint64_t tx;
  double power_mw;
  double worst_mw;  // largest interference seen so far
  bool preempted;   // receiver transmitted during the frame
};

struct Radio {
  std::vector<Incoming> incoming;
  std::vector<Candidate> candidates;
  int sensed = 0;
  bool transmitting = false;
  bool busy = false;
  SimTime busy_since{};
};

struct Node {
  explicit Node(const MacConfig& mac) : mac(mac) {}
  CsmaMac mac;
  Radio radio;
  NeighborTable table;
  FeedbackStager stager;
  FeedbackInbox inbox;
  PidState pid;
  std::uint64_t sequence = 0;
  std::uint64_t gen_token = 0;
  std::optional<SimTime> last_generation;
};

struct Transmission {
  TransmissionEvent ev;
  BeaconFrame frame;
  std::uint64_t geometry_epoch;
  bool counted;  // started after the warm-up
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg),
        n_(cfg.vehicle_count),
        net_(build_network(cfg.kind, cfg.mobility.bounds, cfg.mobility.block_pitch,
                           cfg.mobility.building_inset)),
        rng_mobility_(make_stream(cfg.seed, RngStream::mobility)),
        rng_backoff_(make_stream(cfg.seed, RngStream::backoff)),
        rng_loss_(make_stream(cfg.seed, RngStream::loss)),
        warmup_(from_seconds(cfg.warmup)),
        end_(from_seconds(cfg.sim_time)),
        airtime_(from_seconds(frame_airtime(cfg.mac.beacon_size, cfg.mac))),
        delay_(from_seconds(cfg.channel.propagation_delay)),
        noise_mw_(dbm_to_mw(cfg.channel.noise_floor)),
        sinr_linear_(std::pow(10.0, cfg.channel.sinr_threshold / 10.0)) {
    init_vehicles();
    init_store();
    recompute_power();
    nodes_.reserve(n_);
    for (int i = 0; i < n_; ++i) {
      nodes_.emplace_back(cfg.mac);
      nodes_.back().stager = FeedbackStager(i);
      nodes_.back().inbox = FeedbackInbox(i);
      nodes_.back().pid.cfg = cfg.adaptive.pid;
    }
    schedule_initial();
  }

  MetricsStore run() {
    while (!queue_.empty() && queue_.top().time < end_) {
      const Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      dispatch(ev);
    }
    now_ = end_;
    finish();
    return std::move(store_);
  }

 private:
  // --- setup -------------------------------------------------------------

  void init_vehicles() {
    Rng placement = make_stream(cfg_.seed, RngStream::placement);
    const double speed = is_static(cfg_.kind) ? 0.0 : cfg_.mobility.speed;
    if (cfg_.placements.empty()) {
      vehicles_ = spawn_vehicles(net_, n_, speed, placement);
    } else {
      vehicles_.resize(n_);
      for (int i = 0; i < n_; ++i) {
        vehicles_[i].id = i;
        vehicles_[i].position = cfg_.placements[i].position;
        vehicles_[i].heading = wrap_angle(cfg_.placements[i].heading);
        vehicles_[i].speed = speed;
        if (speed > 0.0) draw_trip(vehicles_[i], net_, placement);
      }
    }
  }

  void init_store() {
    store_.vehicle_count = n_;
    store_.warmup = warmup_;
    store_.sim_time = end_;
    store_.target = cfg_.target;
    store_.weight_params = cfg_.weight_params;
    if (cfg_.keep_samples) store_.busy.resize(n_);
    store_.busy_in_window.assign(n_, SimTime{});
    store_.tx_per_vehicle.assign(n_, 0);
  }

  void schedule_initial() {
    Rng beacon_phase = make_stream(cfg_.seed, RngStream::beacon_phase);
    Rng controller_phase = make_stream(cfg_.seed, RngStream::controller_phase);
    const bool adaptive = cfg_.beacon_mode == BeaconMode::adaptive;
    const double interval =
        1.0 / (adaptive ? cfg_.adaptive.initial_rate : cfg_.beacon_rate);
    fixed_interval_ = from_seconds(interval);
    for (int i = 0; i < n_; ++i) {
      nodes_[i].pid.interval = interval;
      push(from_seconds(uniform(beacon_phase, 0.0, interval)), EventKind::beacon_generation, i,
           nodes_[i].gen_token);
    }
    if (adaptive) {
      period_ = controller_period(cfg_.target);
      staleness_ = from_seconds(cfg_.adaptive.staleness_periods * to_seconds(period_));
      for (int i = 0; i < n_; ++i) {
        const SimTime phase = from_seconds(uniform(controller_phase, 0.0, to_seconds(period_)));
        // The first execution then sees dt = one period and a zero previous error.
        nodes_[i].pid.last_exec = phase - period_;
        push(phase, EventKind::controller_step, i, 0);
      }
    }
    if (!is_static(cfg_.kind) && cfg_.mobility.speed > 0.0) {
      mobility_step_ = from_seconds(cfg_.mobility.step);
      push(mobility_step_, EventKind::mobility_step, -1, 0);
    }
  }

  void recompute_power() {
    power_dbm_.assign(static_cast<std::size_t>(n_) * n_, -1e300);
    power_mw_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int a = 0; a < n_; ++a) {
      for (int b = a + 1; b < n_; ++b) {
        const double p =
            received_power_dbm(vehicles_[a].position, vehicles_[b].position, net_, cfg_.channel);
        const double mw = dbm_to_mw(p);
        power_dbm_[idx(a, b)] = power_dbm_[idx(b, a)] = p;
        power_mw_[idx(a, b)] = power_mw_[idx(b, a)] = mw;
      }
    }
    ++geometry_epoch_;
  }

  std::size_t idx(int tx, int rx) const { return static_cast<std::size_t>(tx) * n_ + rx; }

  void push(SimTime t, EventKind kind, int node, std::uint64_t arg) {
    queue_.push(Event{t, kind, seq_++, node, arg});
  }

  // --- dispatch ----------------------------------------------------------

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::mobility_step: on_mobility(); break;
      case EventKind::signal_departure: on_departure(ev.arg); break;
      case EventKind::tx_end: on_tx_end(ev.node); break;
      case EventKind::signal_arrival: on_arrival(ev.arg); break;
      case EventKind::controller_step: on_controller(ev.node); break;
      case EventKind::beacon_generation:
        if (ev.arg == nodes_[ev.node].gen_token) on_generation(ev.node);
        break;
      case EventKind::aifs_elapsed:
        if (ev.arg == nodes_[ev.node].mac.epoch()) on_aifs(ev.node);
        break;
      case EventKind::tx_start:
        if (ev.arg == nodes_[ev.node].mac.epoch()) start_transmission(ev.node);
        break;
    }
  }

  void on_mobility() {
    step_mobility(vehicles_, net_, cfg_.mobility.step, rng_mobility_);
    recompute_power();
    push(now_ + mobility_step_, EventKind::mobility_step, -1, 0);
  }

  void on_generation(int i) {
    Node& node = nodes_[i];
    const VehicleState& v = vehicles_[i];
    BeaconFrame frame;
    frame.sender = i;
    frame.sequence = node.sequence++;
    frame.generated_at = now_;
    frame.sender_position = v.position;
    frame.sender_heading = v.heading;
    frame.size = cfg_.mac.beacon_size;
    if (cfg_.beacon_mode == BeaconMode::adaptive) {
      frame.feedback = node.stager.take_staged(cfg_.adaptive.max_feedback_records);
    }
    ++store_.generated;
    EnqueueResult result{};
    const auto wake = node.mac.enqueue(std::move(frame), now_, node.radio.busy, &result);
    if (result == EnqueueResult::replaced) ++store_.replaced;
    if (wake) push(*wake, EventKind::aifs_elapsed, i, node.mac.epoch());

    node.last_generation = now_;
    push(now_ + current_interval(i), EventKind::beacon_generation, i, ++node.gen_token);
  }

  SimTime current_interval(int i) const {
    if (cfg_.beacon_mode == BeaconMode::fixed) return fixed_interval_;
    return from_seconds(nodes_[i].pid.interval);
  }

  void on_aifs(int i) {
    Node& node = nodes_[i];
    const auto tx_time = node.mac.on_aifs_elapsed(
        now_, [this](int w) { return uniform_int(rng_backoff_, 0, w - 1); });
    if (!tx_time) return;
    if (*tx_time == now_) {
      start_transmission(i);
    } else {
      push(*tx_time, EventKind::tx_start, i, node.mac.epoch());
    }
  }

  void start_transmission(int i) {
    Node& node = nodes_[i];
    Transmission tx;
    tx.frame = node.mac.begin_transmission(now_);
    tx.ev = {i, next_tx_id_++, now_, now_ + airtime_, vehicles_[i].position};
    tx.geometry_epoch = geometry_epoch_;
    tx.counted = now_ >= warmup_;
    ++store_.tx_started;
    if (tx.counted) ++store_.tx_per_vehicle[i];
    if (cfg_.trace_receptions) store_.tx_trace.push_back(tx.ev);

    node.radio.transmitting = true;
    for (auto& c : node.radio.candidates) c.preempted = true;
    update_busy(i);

    const std::uint64_t id = tx.ev.id;
    push(now_ + delay_, EventKind::signal_arrival, i, id);
    push(tx.ev.air_end, EventKind::tx_end, i, id);
    push(tx.ev.air_end + delay_, EventKind::signal_departure, i, id);
    active_.emplace(id, std::move(tx));
  }

  void on_tx_end(int i) {
    Node& node = nodes_[i];
    node.mac.end_transmission(now_);
    node.radio.transmitting = false;
    ++store_.tx_ended;
    // With the medium clear this edge restarts access for a queued frame.
    update_busy(i);
  }

  int distance_bin(double d) const { return static_cast<int>(std::lround(d / 10.0)); }

  void on_arrival(std::uint64_t id) {
    const Transmission& tx = active_.at(id);
    const int s = tx.ev.sender;
    const bool fresh_geometry = tx.geometry_epoch == geometry_epoch_;
    for (int r = 0; r < n_; ++r) {
      if (r == s) continue;
      double p_dbm;
      double p_mw;
      if (fresh_geometry) {
        p_dbm = power_dbm_[idx(s, r)];
        p_mw = power_mw_[idx(s, r)];
      } else {
        p_dbm = received_power_dbm(tx.ev, vehicles_[r].position, net_, cfg_.channel);
        p_mw = dbm_to_mw(p_dbm);
      }
      const bool decodable = p_dbm >= cfg_.channel.sensitivity;
      const bool sensed = p_dbm >= cfg_.channel.busy_threshold();
      const int bin = distance_bin(distance(tx.ev.tx_position, vehicles_[r].position));
      Radio& radio = nodes_[r].radio;
      radio.incoming.push_back({id, p_mw, sensed, decodable, bin});
      if (decodable || !radio.candidates.empty()) {
        double total = 0.0;
        for (const auto& in : radio.incoming) total += in.power_mw;
        for (auto& c : radio.candidates) c.worst_mw = std::max(c.worst_mw, total - c.power_mw);
        if (decodable) {
          radio.candidates.push_back({id, p_mw, total - p_mw, radio.transmitting});
        }
      }
      if (tx.counted) ++store_.delivery_by_distance[bin].attempts;
      if (sensed) {
        ++radio.sensed;
        update_busy(r);
      }
    }
  }

  void on_departure(std::uint64_t id) {
    auto it = active_.find(id);
    Transmission& tx = it->second;
    const int s = tx.ev.sender;
    if (tx.counted) ++store_.tx_completed;
    for (int r = 0; r < n_; ++r) {
      if (r == s) continue;
      Radio& radio = nodes_[r].radio;
      auto in = std::find_if(radio.incoming.begin(), radio.incoming.end(),
                             [id](const Incoming& x) { return x.tx == id; });
      const Incoming entry = *in;
      *in = radio.incoming.back();
      radio.incoming.pop_back();

      ReceptionOutcome outcome = ReceptionOutcome::below_sensitivity;
      if (entry.decodable) {
        if (tx.counted) ++store_.rx_in_range;
        auto c = std::find_if(radio.candidates.begin(), radio.candidates.end(),
                              [id](const Candidate& x) { return x.tx == id; });
        const Candidate cand = *c;
        radio.candidates.erase(c);
        outcome = ReceptionOutcome::collision;
        if (!cand.preempted && cand.power_mw >= sinr_linear_ * (noise_mw_ + cand.worst_mw)) {
          outcome = ReceptionOutcome::success;
          if (cfg_.channel.extra_loss_probability > 0.0 &&
              uniform(rng_loss_, 0.0, 1.0) < cfg_.channel.extra_loss_probability) {
            outcome = ReceptionOutcome::collision;
          }
        }
      }
      ++store_.reception_decisions;
      if (outcome == ReceptionOutcome::below_sensitivity) ++store_.rx_below_sensitivity;
      if (outcome == ReceptionOutcome::collision) ++store_.rx_collision;
      if (cfg_.trace_receptions) store_.rx_trace.push_back({id, r, outcome});
      if (outcome == ReceptionOutcome::success) {
        if (tx.counted) {
          ++store_.rx_success;
          ++store_.delivery_by_distance[entry.bin].successes;
        }
        deliver(r, tx);
      }
      if (entry.sensed) {
        --radio.sensed;
        update_busy(r);
      }
    }
    active_.erase(it);
  }

  void deliver(int r, const Transmission& tx) {
    Node& node = nodes_[r];
    const BeaconFrame& frame = tx.frame;
    if (tx.counted) {
      store_.latency_sum += to_seconds(now_ - frame.generated_at);
      ++store_.latency_count;
    }
    if (cfg_.log_receptions) {
      store_.reception_log.push_back({r, frame.sender, frame.generated_at, now_});
    }
    const auto obs = observe_reception(node.table, frame, now_, vehicles_[r]);
    if (obs && obs->recorded_at > warmup_ && cfg_.keep_samples) {
      store_.observations.push_back(*obs);
    }
    if (cfg_.beacon_mode == BeaconMode::adaptive) {
      if (obs) node.stager.make_feedback(weigh(*obs, cfg_.weight_params.front(), cfg_.target), now_);
      node.inbox.ingest(frame.feedback);
    }
  }

  /// Re-evaluates the carrier-sense state of `i`. Returns true on an edge.
  bool update_busy(int i) {
    Node& node = nodes_[i];
    Radio& radio = node.radio;
    const bool busy = radio.transmitting || radio.sensed > 0;
    if (busy == radio.busy) return false;
    radio.busy = busy;
    if (busy) {
      radio.busy_since = now_;
      node.mac.on_channel_busy(now_);
    } else {
      close_busy(i, radio.busy_since, now_);
      if (auto wake = node.mac.on_channel_idle(now_)) {
        push(*wake, EventKind::aifs_elapsed, i, node.mac.epoch());
      }
    }
    return true;
  }

  void close_busy(int i, SimTime start, SimTime end) {
    if (cfg_.keep_samples) store_.busy.record_busy(i, {start, end});
    const SimTime a = std::max(start, warmup_);
    const SimTime b = std::min(end, end_);
    if (b > a) store_.busy_in_window[i] += b - a;
  }

  void on_controller(int i) {
    Node& node = nodes_[i];
    if (const auto means = node.inbox.live_means(now_, staleness_)) {
      const double error = means->weighted_target - means->weighted_paoi;
      const double u = pid_step(node.pid, error, now_);
      apply_interval(node.pid, u);
      store_.controller_log.push_back({now_, i, error, u, node.pid.interval, means->weighted_paoi,
                                       means->weighted_target,
                                       static_cast<int>(means->reporters)});
      store_.beacon_rate_series.push_back({now_, i, node.pid.interval});
      if (node.last_generation) {
        const SimTime next = std::max(now_, *node.last_generation + current_interval(i));
        push(next, EventKind::beacon_generation, i, ++node.gen_token);
      }
    }
    push(now_ + period_, EventKind::controller_step, i, 0);
  }

  void finish() {
    for (int i = 0; i < n_; ++i) {
      Node& node = nodes_[i];
      if (node.radio.busy) close_busy(i, node.radio.busy_since, end_);
      if (node.mac.has_queued()) ++store_.pending_at_end;
      store_.known_neighbors.push_back(static_cast<int>(node.table.size()));
    }
    store_.tx_in_flight_at_end = store_.tx_started - store_.tx_ended;
  }

  const ScenarioConfig& cfg_;
  const int n_;
  RoadNetwork net_;
  std::vector<VehicleState> vehicles_;
  std::vector<Node> nodes_;
  Rng rng_mobility_;
  Rng rng_backoff_;
  Rng rng_loss_;
  const SimTime warmup_;
  const SimTime end_;
  const SimTime airtime_;
  const SimTime delay_;
  const double noise_mw_;
  const double sinr_linear_;
  SimTime fixed_interval_{};
  SimTime period_{};
  SimTime staleness_{};
  SimTime mobility_step_{};

  std::vector<double> power_dbm_;
  std::vector<double> power_mw_;
  std::uint64_t geometry_epoch_ = 0;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_{};
  std::uint64_t next_tx_id_ = 0;
  std::unordered_map<std::uint64_t, Transmission> active_;
  MetricsStore store_;
};

}  // namespace

MetricsStore run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Simulation sim(cfg);
  return sim.run();
}

std::vector<SweepCell> sweep(const ScenarioConfig& base, const std::vector<double>& rates,
                             const std::vector<WeightParams>& params,
                             const std::vector<std::uint64_t>& seeds,
                             const SweepOptions& options) {
  if (rates.empty() || params.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep needs at least one rate, weighting and seed");
  }
  struct Job {
    ScenarioConfig cfg;
    double rate;
    std::vector<WeightParams> params;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  const bool adaptive = base.beacon_mode == BeaconMode::adaptive;
  for (double rate : rates) {
    for (std::uint64_t seed : seeds) {
      if (adaptive) {
        for (const auto& p : params) {
          Job j{base, rate, {p}, seed};
          j.cfg.adaptive.initial_rate = rate;
          j.cfg.weight_params = {p};
          j.cfg.seed = seed;
          jobs.push_back(std::move(j));
        }
      } else {
        Job j{base, rate, params, seed};
        j.cfg.beacon_rate = rate;
        j.cfg.weight_params = params;
        j.cfg.seed = seed;
        jobs.push_back(std::move(j));
      }
    }
  }

  int parallel = options.max_parallel > 0
                     ? options.max_parallel
                     : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<SweepCell> cells;
  auto collect = [&](const Job& job, std::shared_ptr<const MetricsStore> store,
                     const std::string& error) {
    for (const auto& p : job.params) cells.push_back({job.rate, p, job.seed, store, error});
  };
  for (std::size_t begin = 0; begin < jobs.size(); begin += parallel) {
    const std::size_t end = std::min(jobs.size(), begin + parallel);
    std::vector<std::future<MetricsStore>> running;
    for (std::size_t k = begin; k < end; ++k) {
      const ScenarioConfig* cfg = &jobs[k].cfg;
      running.push_back(std::async(end - begin == 1 ? std::launch::deferred : std::launch::async,
                                   [cfg] { return run_scenario(*cfg); }));
    }
    for (std::size_t k = begin; k < end; ++k) {
      try {
        auto store = std::make_shared<MetricsStore>(running[k - begin].get());
        const bool keep = !options.on_run || options.on_run(jobs[k].cfg, *store);
        collect(jobs[k], keep ? store : nullptr, "");
      } catch (const std::exception& e) {
        collect(jobs[k], nullptr, e.what());
      }
    }
  }
  return cells;
}

}  // namespace saoi
