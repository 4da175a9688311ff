#ifndef JUMPCHAIN_FFBS_HPP
#define JUMPCHAIN_FFBS_HPP

#include <vector>

#include "jumpchain/intensity_model.hpp"

namespace jumpchain {

// Discrete-time chain S_0..S_N with
//   p(S) ∝ initial(S_0) exp(g_0(S_0)) prod_i P_i(S_{i-1}, S_i) exp(g_i(S_i)).
// transitions[i-1] holds P_i; log_potentials[i] holds g_i.
struct SkeletonHmm {
  Vector initial;
  std::vector<Matrix> transitions;
  std::vector<Vector> log_potentials;

  std::size_t steps() const { return log_potentials.size(); }  // N + 1
  std::size_t states() const { return static_cast<std::size_t>(initial.size()); }
  void check() const;
};

// Skeleton conditional p(S | T, Y) for event times T (T[0] == tmin).
// Observations are assigned to the half-open segment [T_{i-1}, T_i); an
// observation exactly at tmax goes to the last segment.
SkeletonHmm build_skeleton_hmm(const IntensityModel& m, std::span<const double> times,
                               const Evidence& evid);

struct FilterResult {
  std::vector<Vector> filtered;  // normalized alpha_i
  double log_normalizer = 0.0;   // log sum_S of the unnormalized joint mass
};

// Throws ImpossibleEvidence if every state has zero mass at some step.
FilterResult forward_filter(const SkeletonHmm& h);

std::vector<State> backward_sample(const SkeletonHmm& h, const FilterResult& f, Rng& rng);

// Exact P(S_i = s | all potentials), by forward-backward in log space.
std::vector<Vector> smoothing_marginals(const SkeletonHmm& h);

}  // namespace jumpchain

#endif
