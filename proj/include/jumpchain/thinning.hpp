#ifndef JUMPCHAIN_THINNING_HPP
#define JUMPCHAIN_THINNING_HPP

#include "jumpchain/intensity_model.hpp"

namespace jumpchain {

// P(t; s, s') = Q(t; s, s') / R(t; s) off the diagonal and 1 - Q(t; s)/R(t; s)
// on it. A state with R(t; s) == 0 keeps itself with probability 1.
Matrix thinning_matrix(const IntensityModel& m, double t);

// Row-stochastic thinning matrix from a generator row set and per-state R.
Matrix thinning_matrix(const Matrix& generator, const Vector& instrumental);

// Draws (T, S) by state-dependent thinning: holding times from R(.; S_{i-1}),
// skeleton moves from P(T_i; S_{i-1}, .).
EventSequence sample_prior_path(const IntensityModel& m, Rng& rng);

// log p(T, S) of the redundant representation.
double joint_log_density(const IntensityModel& m, const EventSequence& ev);

// Categorical draw from a nonnegative weight vector (need not be normalized).
State sample_categorical(const Vector& weights, Rng& rng);

}  // namespace jumpchain

#endif
