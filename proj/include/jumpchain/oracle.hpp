#ifndef JUMPCHAIN_ORACLE_HPP
#define JUMPCHAIN_ORACLE_HPP

#include <vector>

#include "jumpchain/ctbn.hpp"
#include "jumpchain/ffbs.hpp"
#include "jumpchain/intensity_model.hpp"

namespace jumpchain {

// exp(Q dt) by uniformization. Q may be a sub-generator (rows summing to <= 0),
// in which case the result is substochastic. Long horizons are split so that
// each series stays short.
Matrix transition_probability(const Matrix& q, double dt);

// Product of block kernels over [a, b] for a piecewise-constant model.
Matrix transition_probability(const IntensityModel& m, double a, double b);

// Prior marginal law of X(t).
Vector prior_marginal(const IntensityModel& m, double t);

struct GridPosterior {
  double step = 0.0;
  std::vector<double> times;      // grid nodes, including observation and block times
  std::vector<Vector> marginals;  // p(X(times[k]) | Y)
  double log_evidence = 0.0;      // log p(Y)

  // Marginal at t: exact at nodes, linear in between.
  Vector at(double t) const;
};

// Discrete HMM on a grid of step `step` with exact exp(Q dt) kernels.
// Observation times, block boundaries and `extra_times` are inserted as nodes.
GridPosterior grid_posterior(const IntensityModel& m, const Evidence& evid, double step,
                             std::span<const double> extra_times = {});

struct RichardsonCheck {
  std::vector<Vector> coarse;        // step
  std::vector<Vector> fine;          // step / 2
  std::vector<Vector> extrapolated;  // 2 fine - coarse
  double max_abs_diff = 0.0;         // max |fine - coarse| over probes and states
};

RichardsonCheck richardson_marginals(const IntensityModel& m, const Evidence& evid, double step,
                                     std::span<const double> probes);

inline constexpr std::size_t kEnumerationCap = 1'000'000;

struct SkeletonEnumeration {
  std::vector<double> joint;    // index sum_i s_i |S|^i
  double log_normalizer = 0.0;  // log of the unnormalized total mass
  std::vector<Vector> marginals;
};

SkeletonEnumeration enumerate_skeletons(const SkeletonHmm& h, std::size_t cap = kEnumerationCap);

struct CtbnObservedPosterior {
  std::vector<double> probes;
  std::vector<Vector> joint;  // posterior over product-space states at each probe
  double log_evidence = 0.0;
};

// Exact posterior of the unobserved nodes at the probe times given the full
// trajectories of the observed nodes, by forward-backward on the flattened
// chain restricted to the observed values. The unobserved entries of `path`
// are ignored.
CtbnObservedPosterior ctbn_observed_posterior(const CtbnModel& model, const CtbnPath& path,
                                              const std::vector<bool>& observed,
                                              std::span<const double> probes,
                                              std::size_t cap = kDefaultFlattenCap);

// Marginal of node w from a distribution over product-space states.
Vector node_marginal(const CtbnModel& model, const Vector& joint, std::size_t w);

}  // namespace jumpchain

#endif
