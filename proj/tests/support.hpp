#ifndef JUMPCHAIN_TESTS_SUPPORT_HPP
#define JUMPCHAIN_TESTS_SUPPORT_HPP

// Fixtures and independent reference computations shared by the tests. Nothing
// here calls the code path it is used to check.

#include <string>
#include <vector>

#include "jumpchain/ctbn.hpp"
#include "jumpchain/intensity_model.hpp"
#include "jumpchain/oracle.hpp"
#include "jumpchain/rao_teh.hpp"

namespace testing_support {

using namespace jumpchain;

Matrix gen2(double a, double b);  // [[-a, a], [b, -b]]

// 2-state model on [tmin, tmax] with Q = gen2(a, b) and R = (r0, r1).
IntensityModel two_state(double a, double b, double r0, double r1, Vector nu,
                         double tmin = 0.0, double tmax = 1.0);

// Symmetric rate-1 model with R == 2 on [0, 1], started in state 0.
IntensityModel symmetric_model();

// exp(Q t) by Eigen's Pade-based matrix exponential.
Matrix expm(const Matrix& q, double t);

// Prior path by competing exponential clocks, restarted at block boundaries.
Trajectory gillespie_path(const IntensityModel& m, Rng& rng);

// Exact posterior draw by rejection from the Gillespie prior.
Trajectory rejection_posterior(const IntensityModel& m, const Evidence& evid, Rng& rng);

// log p(T, S) + log L(Y | X) written as the compact-path density times the
// density of the virtual points, which is Poisson with rate R - Q along X.
double redundant_log_density(const IntensityModel& m, std::span<const double> times,
                             const std::vector<State>& skeleton, const Evidence& evid);

// Random instance with strictly positive P, finite g and a positive initial law.
SkeletonHmm random_hmm(std::size_t n, std::size_t steps, Rng& rng);

// Binary networks used across tests.
CtbnModel two_node_net(bool tabular_nu = false);    // u -> w
CtbnModel three_node_net();                         // a -> b -> c and a -> c

// Random path with a few jumps per node.
CtbnPath random_ctbn_path(const CtbnModel& model, Rng& rng, std::size_t max_jumps = 4);

// log p(X_w | X_-w) up to a constant, plus the density of the virtual points
// of w, written directly from the network density.
double ctbn_redundant_log_density(const CtbnModel& model, const CtbnPath& path, std::size_t w,
                                  std::span<const double> times,
                                  const std::vector<State>& skeleton);

std::string data_path(const std::string& rel);

}  // namespace testing_support

#endif
