#include "jumpchain/trajectory.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace jumpchain {

StateSpace::StateSpace(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size())
    throw ModelError("state labels must be distinct");
  if (labels_.empty()) throw ModelError("state space is empty");
  if (seen.count("")) throw ModelError("state labels must be non-empty");
}

StateSpace StateSpace::indexed(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return StateSpace(std::move(labels));
}

State StateSpace::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ModelError("unknown state label '" + label + "'");
  return static_cast<State>(it - labels_.begin());
}

namespace {

void check_interval(double tmin, double tmax) {
  if (!std::isfinite(tmin) || !std::isfinite(tmax) || !(tmin < tmax))
    throw ModelError("time interval must satisfy tmin < tmax");
}

// Strictly increasing, inside (tmin, tmax), separated by more than the tie
// tolerance (and separated from tmin).
void check_times(double tmin, double tmax, std::span<const double> times) {
  const double tol = kTieTolerance * (tmax - tmin);
  double prev = tmin;
  for (double t : times) {
    if (!std::isfinite(t) || t <= prev + tol || t >= tmax)
      throw ModelError("event times must be strictly increasing inside (tmin, tmax)"
                       " and separated by more than the tie tolerance");
    prev = t;
  }
}

}  // namespace

Trajectory::Trajectory(double tmin, double tmax, std::vector<double> jump_times,
                       std::vector<State> states)
    : tmin_(tmin), tmax_(tmax), jump_times_(std::move(jump_times)),
      states_(std::move(states)) {
  check_interval(tmin_, tmax_);
  if (states_.size() != jump_times_.size() + 1)
    throw ModelError("trajectory needs exactly one more state than jump times");
  check_times(tmin_, tmax_, jump_times_);
  for (std::size_t i = 1; i < states_.size(); ++i)
    if (states_[i] == states_[i - 1])
      throw ModelError("compact trajectory has a repeated state at a jump");
}

Trajectory Trajectory::constant(double tmin, double tmax, State s) {
  return Trajectory(tmin, tmax, {}, {s});
}

EventSequence::EventSequence(double tmin, double tmax, std::vector<double> times,
                             std::vector<State> skeleton)
    : tmin_(tmin), tmax_(tmax), times_(std::move(times)),
      skeleton_(std::move(skeleton)) {
  check_interval(tmin_, tmax_);
  if (times_.empty() || times_.size() != skeleton_.size())
    throw ModelError("event sequence needs matching non-empty times and skeleton");
  if (times_.front() != tmin_) throw ModelError("event sequence must start at tmin");
  check_times(tmin_, tmax_, std::span<const double>(times_).subspan(1));
}

std::size_t segment_index(const Trajectory& traj, double t) {
  if (!(t >= traj.tmin() && t <= traj.tmax()))
    throw std::out_of_range("time outside [tmin, tmax]");
  const auto& jt = traj.jump_times();
  return static_cast<std::size_t>(std::upper_bound(jt.begin(), jt.end(), t) - jt.begin());
}

State evaluate(const Trajectory& traj, double t) {
  return traj.states()[segment_index(traj, t)];
}

Trajectory compact(const EventSequence& ev) {
  std::vector<double> jumps;
  std::vector<State> states{ev.skeleton().front()};
  for (std::size_t i = 1; i < ev.size(); ++i) {
    if (ev.skeleton()[i] != states.back()) {
      jumps.push_back(ev.times()[i]);
      states.push_back(ev.skeleton()[i]);
    }
  }
  return Trajectory(ev.tmin(), ev.tmax(), std::move(jumps), std::move(states));
}

EventSequence to_event_sequence(const Trajectory& traj) {
  std::vector<double> times{traj.tmin()};
  times.insert(times.end(), traj.jump_times().begin(), traj.jump_times().end());
  return EventSequence(traj.tmin(), traj.tmax(), std::move(times), traj.states());
}

std::size_t jump_count(const Trajectory& traj) { return traj.jump_times().size() + 1; }

double occupation_time(const Trajectory& traj, State s) {
  double total = 0.0;
  for (std::size_t i = 0; i < traj.segment_count(); ++i)
    if (traj.states()[i] == s) total += traj.segment_end(i) - traj.segment_start(i);
  return total;
}

}  // namespace jumpchain
