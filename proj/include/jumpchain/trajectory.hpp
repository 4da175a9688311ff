#ifndef JUMPCHAIN_TRAJECTORY_HPP
#define JUMPCHAIN_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "jumpchain/common.hpp"

namespace jumpchain {

// Ordered state labels; states are addressed by dense index 0..size()-1.
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(std::vector<std::string> labels);
  static StateSpace indexed(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(State s) const { return labels_.at(s); }
  const std::vector<std::string>& labels() const { return labels_; }
  // Throws ModelError for an unknown label.
  State index_of(const std::string& label) const;

  bool operator==(const StateSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

// Right-continuous piecewise-constant path on [tmin, tmax] in compact form:
// only true jumps are stored, so consecutive states always differ.
class Trajectory {
 public:
  Trajectory(double tmin, double tmax, std::vector<double> jump_times,
             std::vector<State> states);
  static Trajectory constant(double tmin, double tmax, State s);

  double tmin() const { return tmin_; }
  double tmax() const { return tmax_; }
  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<State>& states() const { return states_; }
  std::size_t segment_count() const { return states_.size(); }
  double segment_start(std::size_t i) const {
    return i == 0 ? tmin_ : jump_times_[i - 1];
  }
  double segment_end(std::size_t i) const {
    return i == jump_times_.size() ? tmax_ : jump_times_[i];
  }

  bool operator==(const Trajectory&) const = default;

 private:
  double tmin_;
  double tmax_;
  std::vector<double> jump_times_;
  std::vector<State> states_;
};

// Redundant representation (T, S): T[0] == tmin, times strictly increasing,
// adjacent skeleton states may repeat (virtual jumps).
class EventSequence {
 public:
  EventSequence(double tmin, double tmax, std::vector<double> times,
                std::vector<State> skeleton);

  double tmin() const { return tmin_; }
  double tmax() const { return tmax_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<State>& skeleton() const { return skeleton_; }
  std::size_t size() const { return times_.size(); }

 private:
  double tmin_;
  double tmax_;
  std::vector<double> times_;
  std::vector<State> skeleton_;
};

// X(t) with right-continuity at jump times. Throws std::out_of_range when t
// lies outside [tmin, tmax].
State evaluate(const Trajectory& traj, double t);

// Index of the segment containing t (same convention as evaluate).
std::size_t segment_index(const Trajectory& traj, double t);

// Drops virtual jumps.
Trajectory compact(const EventSequence& ev);

// Lifts a trajectory to an event sequence with no virtual jumps.
EventSequence to_event_sequence(const Trajectory& traj);

// |J(X)|: true jumps plus the index-0 entry, so a constant path counts 1.
std::size_t jump_count(const Trajectory& traj);

// Number of true jumps, i.e. jump_count() - 1.
inline std::size_t true_jumps(const Trajectory& traj) {
  return traj.jump_times().size();
}

// Total time spent in state s.
double occupation_time(const Trajectory& traj, State s);

}  // namespace jumpchain

#endif
