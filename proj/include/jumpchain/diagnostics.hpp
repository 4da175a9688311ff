#ifndef JUMPCHAIN_DIAGNOSTICS_HPP
#define JUMPCHAIN_DIAGNOSTICS_HPP

#include <functional>
#include <span>
#include <vector>

#include "jumpchain/common.hpp"
#include "jumpchain/ctbn.hpp"
#include "jumpchain/rao_teh.hpp"

namespace jumpchain {

struct DriftReport {
  std::vector<double> seeded;  // jump count of each seed
  std::vector<double> mean;    // mean jump count after one step
  std::vector<double> se;      // its standard error (floored, always > 0)
  std::vector<std::size_t> reps;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

// step(i, rng) applies one kernel step to seed i and returns the resulting
// jump count. The affine fit is weighted least squares with weights 1/se^2.
DriftReport drift_estimate(std::span<const double> seeded,
                           const std::function<double(std::size_t, Rng&)>& step,
                           std::size_t reps, Rng& rng);

DriftReport drift_estimate(const std::function<Trajectory(const Trajectory&, Rng&)>& kernel,
                           const std::vector<Trajectory>& seeds, std::size_t reps, Rng& rng);

// Seed trajectory with jump_count == count: count - 1 evenly spaced jumps, each
// to the most likely next state under Q.
Trajectory path_with_jump_count(const IntensityModel& m, std::size_t count);

// Network analogue: the total count is split evenly over the unobserved
// nodes; observed nodes are copied from `base`.
CtbnPath ctbn_path_with_jump_count(const CtbnModel& model, const CtbnEvidence& evid,
                                   const CtbnPath& base, std::size_t count);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov p-value for an effective sample size n.
double kolmogorov_p_value(double statistic, double n);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

template <class X, class Y>
struct GewekeProblem {
  std::function<X(Rng&)> prior;                          // X ~ p(X)
  std::function<Y(const X&, Rng&)> evidence;             // Y ~ L(. | X)
  std::function<X(const X&, const Y&, Rng&)> kernel;     // leaves p(X | Y) invariant
  std::function<std::vector<double>(const X&, const Y&)> statistics;
};

struct GewekeOptions {
  std::size_t n = 10000;  // draws per simulator
  std::size_t thin = 1;   // successive-conditional steps between recorded draws
  std::size_t burnin = 0;
};

// Marginal-conditional vs successive-conditional simulation of (X, Y); one
// two-sample KS result per statistic.
template <class X, class Y>
std::vector<KsResult> geweke_joint_test(const GewekeProblem<X, Y>& p, const GewekeOptions& opts,
                                        Rng& rng) {
  std::vector<std::vector<double>> marginal, successive;
  auto record = [](std::vector<std::vector<double>>& into, const std::vector<double>& v) {
    if (into.empty()) into.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) into[k].push_back(v[k]);
  };
  for (std::size_t i = 0; i < opts.n; ++i) {
    X x = p.prior(rng);
    Y y = p.evidence(x, rng);
    record(marginal, p.statistics(x, y));
  }
  X x = p.prior(rng);
  Y y = p.evidence(x, rng);
  const std::size_t thin = std::max<std::size_t>(opts.thin, 1);
  for (std::size_t i = 0; i < opts.burnin; ++i) {
    x = p.kernel(x, y, rng);
    y = p.evidence(x, rng);
  }
  for (std::size_t i = 0; i < opts.n; ++i) {
    for (std::size_t k = 0; k < thin; ++k) {
      x = p.kernel(x, y, rng);
      y = p.evidence(x, rng);
    }
    record(successive, p.statistics(x, y));
  }
  std::vector<KsResult> out;
  for (std::size_t k = 0; k < marginal.size(); ++k)
    out.push_back(ks_two_sample(std::move(marginal[k]), std::move(successive[k])));
  return out;
}

// Observation model for Geweke tests: at times[j] a symbol y is emitted with
// probability emission(X(times[j]), y).
using Observations = std::vector<std::size_t>;

struct EmissionSpec {
  std::vector<double> times;
  Matrix emission;  // rows sum to 1
};

Evidence make_evidence(const EmissionSpec& spec, const Observations& y);
Observations sample_observations(const EmissionSpec& spec, const Trajectory& x, Rng& rng);

using MjpKernel = std::function<Trajectory(const IntensityModel&, const Evidence&,
                                           const Trajectory&, Rng&)>;

// Statistics: jump count, occupation time of state 0, and the state at the
// midpoint of [tmin, tmax].
GewekeProblem<Trajectory, Observations> mjp_geweke_problem(const IntensityModel& m,
                                                           const EmissionSpec& spec,
                                                           MjpKernel kernel = rao_teh_step);

// (1/2) sum |p - q|.
double tv_distance(const Vector& p, const Vector& q);

// n / (1 + 2 sum rho_k) with Geyer's initial positive sequence; a constant
// series returns n.
double ess(std::span<const double> series);

// For each sweep m: largest TV over probes between the empirical law of the
// probe state across chains and the oracle marginal.
std::vector<double> tv_across_chains(std::span<const ChainTrace> traces,
                                     const std::vector<Vector>& oracle);

}  // namespace jumpchain

#endif
