#ifndef JUMPCHAIN_INTENSITY_MODEL_HPP
#define JUMPCHAIN_INTENSITY_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "jumpchain/common.hpp"
#include "jumpchain/event_sampling.hpp"
#include "jumpchain/trajectory.hpp"

namespace jumpchain {

// Default instrumental intensity: R(t;s) = factor * max(Q(t;s), q_floor) with
// q_floor = 1e-6 * max_{t,s} Q(t;s). factor 2 gives eta = 1/2.
inline constexpr double kDefaultRFactor = 2.0;
inline constexpr double kDefaultQFloorFraction = 1e-6;

// MJP law on [tmin, tmax] with transition intensities Q and instrumental
// intensities R, both constant on the blocks delimited by the interior
// breakpoints. Block k covers [block_start(k), block_end(k)).
class IntensityModel {
 public:
  IntensityModel(StateSpace states, Vector nu, double tmin, double tmax,
                 std::vector<double> breakpoints, std::vector<Matrix> q_blocks,
                 std::vector<Vector> r_blocks);

  // Same model with the default instrumental intensity.
  static IntensityModel with_default_r(StateSpace states, Vector nu, double tmin,
                                       double tmax, std::vector<double> breakpoints,
                                       std::vector<Matrix> q_blocks,
                                       double factor = kDefaultRFactor);

  const StateSpace& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  const Vector& nu() const { return nu_; }
  double tmin() const { return tmin_; }
  double tmax() const { return tmax_; }
  double length() const { return tmax_ - tmin_; }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  std::size_t block_count() const { return q_blocks_.size(); }
  double block_start(std::size_t k) const { return k == 0 ? tmin_ : breakpoints_[k - 1]; }
  double block_end(std::size_t k) const {
    return k + 1 == block_count() ? tmax_ : breakpoints_[k];
  }
  std::size_t block_at(double t) const;

  // Generator of block k with diagonal -Q(t;s).
  const Matrix& generator(std::size_t k) const { return q_blocks_[k]; }
  const Vector& instrumental_block(std::size_t k) const { return r_blocks_[k]; }

  double rate(double t, State from, State to) const {
    return q_blocks_[block_at(t)](from, to);
  }
  double leave_rate(double t, State s) const { return -q_blocks_[block_at(t)](s, s); }
  double instrumental(double t, State s) const { return r_blocks_[block_at(t)](s); }

  // R(.;s), Q(.;s) and max(R - Q, 0)(.;s) as rate functions starting at tmin.
  const RateFunction& instrumental_rate(State s) const { return r_fn_[s]; }
  const RateFunction& leave_rate_fn(State s) const { return q_fn_[s]; }
  const RateFunction& virtual_rate(State s) const { return v_fn_[s]; }

 private:
  StateSpace states_;
  Vector nu_;
  double tmin_;
  double tmax_;
  std::vector<double> breakpoints_;
  std::vector<Matrix> q_blocks_;
  std::vector<Vector> r_blocks_;
  std::vector<RateFunction> r_fn_;
  std::vector<RateFunction> q_fn_;
  std::vector<RateFunction> v_fn_;
};

// Observations at fixed times with per-state log-likelihood tables.
class Evidence {
 public:
  Evidence() = default;
  Evidence(std::vector<double> obs_times, std::vector<Vector> log_lik);

  std::size_t size() const { return obs_times_.size(); }
  bool empty() const { return obs_times_.empty(); }
  const std::vector<double>& obs_times() const { return obs_times_; }
  const Vector& log_lik(std::size_t j) const { return log_lik_[j]; }
  const std::vector<Vector>& log_lik_tables() const { return log_lik_; }

  // Throws ModelError if times fall outside the model interval or a table
  // has the wrong length.
  void check_compatible(const IntensityModel& m) const;
  void check_compatible(double tmin, double tmax, std::size_t n_states) const;

  double log_likelihood(const Trajectory& x) const;

 private:
  std::vector<double> obs_times_;
  std::vector<Vector> log_lik_;
};

// Which ergodicity precondition a violation breaks. kStructure covers
// problems that make the model unusable regardless of the theory.
enum class Assumption { kStructure = 0, kIrreducibleQmin = 1, kEta = 2, kRmax = 3, kSupport = 4 };

std::string to_string(Assumption a);

struct Violation {
  Assumption assumption;
  std::string where;  // node name for networks, empty for a plain MJP
  std::optional<double> time;
  std::optional<State> state;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  Matrix q_min;
  bool q_min_irreducible = false;
  double q_min_rate = 0.0;  // min_s sum_{s' != s} Q_min(s, s')
  double r_max = 0.0;
  double eta = 0.0;         // declared, or the best achievable when none declared
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
  bool fails(Assumption a) const;
};

struct ValidationOptions {
  std::optional<double> eta;  // none: require that some eta > 0 exists
  double r_max_cap = std::numeric_limits<double>::infinity();
};

ValidationReport validate_model(const IntensityModel& m, const ValidationOptions& opts = {});

// Entrywise minimum of the off-diagonal rates across generators.
Matrix entrywise_min(std::span<const Matrix> generators);

// Strong connectivity of the directed graph with an edge s->s' when
// m(s, s') > 0 (s != s').
bool is_irreducible(const Matrix& m);

// Log density of a compact path under MJP(nu, Q), w.r.t. the measure that
// makes exp(-integral Q) the survival factor.
double path_log_density(const IntensityModel& m, const Trajectory& x);

}  // namespace jumpchain

#endif
