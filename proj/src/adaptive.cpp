#include "saoi/adaptive.hpp"

#include <algorithm>
#include <stdexcept>

namespace saoi {

double pid_step(PidState& state, double error, SimTime now) {
  if (now <= state.last_exec) {
    throw std::invalid_argument("controller step must advance in time");
  }
  const double dt = to_seconds(now - state.last_exec);
  const double diff = state.cfg.derivative_sign == DerivativeSign::previous_minus_current
                          ? state.prev_error - error
                          : error - state.prev_error;
  const double u = state.cfg.gain_p * error + state.cfg.gain_i * state.integral +
                   state.cfg.gain_d * diff / dt;
  state.integral += error * dt;
  state.prev_error = error;
  state.last_exec = now;
  return u;
}

void apply_interval(PidState& state, double u) {
  state.interval = std::clamp(state.interval + u, state.cfg.interval_min, state.cfg.interval_max);
}

SimTime controller_period(TargetConfig t) {
  t.validate();
  return from_seconds(2.0 * t.target);
}

SimTime controller_schedule(const PidState& state, TargetConfig t) {
  return state.last_exec + controller_period(t);
}

FeedbackRecord FeedbackStager::make_feedback(const PAoISample& sample, SimTime now) {
  if (sample.receiver != reporter_) {
    throw std::invalid_argument("feedback sample was not measured by this reporter");
  }
  if (sample.sender == reporter_) throw std::invalid_argument("feedback about the reporter itself");
  Acc& a = acc_[sample.sender];
  a.sum_paoi += sample.weighted_paoi;
  a.sum_target += sample.weighted_target;
  ++a.n;
  a.last = now;
  const auto n = static_cast<double>(a.n);
  return {sample.sender, reporter_, a.sum_paoi / n, a.sum_target / n, now};
}

std::vector<FeedbackRecord> FeedbackStager::take_staged(std::size_t max_records) {
  std::vector<FeedbackRecord> out;
  out.reserve(acc_.size());
  for (const auto& [subject, a] : acc_) {
    const auto n = static_cast<double>(a.n);
    out.push_back({subject, reporter_, a.sum_paoi / n, a.sum_target / n, a.last});
  }
  std::stable_sort(out.begin(), out.end(), [](const FeedbackRecord& x, const FeedbackRecord& y) {
    return x.reported_at > y.reported_at;
  });
  if (out.size() > max_records) out.resize(max_records);
  acc_.clear();
  return out;
}

void FeedbackInbox::ingest(std::span<const FeedbackRecord> records) {
  for (const auto& r : records) {
    if (r.subject != subject_ || r.reporter == subject_) continue;
    auto [it, inserted] = latest_.try_emplace(r.reporter, r);
    if (!inserted && r.reported_at >= it->second.reported_at) it->second = r;
  }
}

std::optional<FeedbackInbox::Means> FeedbackInbox::live_means(SimTime now, SimTime staleness) {
  Means m;
  for (auto it = latest_.begin(); it != latest_.end();) {
    if (now - it->second.reported_at > staleness) {
      it = latest_.erase(it);
      continue;
    }
    m.weighted_paoi += it->second.weighted_paoi;
    m.weighted_target += it->second.weighted_target;
    ++m.reporters;
    ++it;
  }
  if (m.reporters == 0) return std::nullopt;
  m.weighted_paoi /= static_cast<double>(m.reporters);
  m.weighted_target /= static_cast<double>(m.reporters);
  return m;
}

}  // namespace saoi
