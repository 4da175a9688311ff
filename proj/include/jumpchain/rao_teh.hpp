#ifndef JUMPCHAIN_RAO_TEH_HPP
#define JUMPCHAIN_RAO_TEH_HPP

#include <functional>
#include <optional>
#include <vector>

#include "jumpchain/ffbs.hpp"
#include "jumpchain/intensity_model.hpp"

namespace jumpchain {

// A virtual jump candidate drawn uniformly on [lo, hi).
struct VirtualPoint {
  double t;
  double lo;
  double hi;
};

// Sorted union of fixed times (fixed[0] == tmin, strictly increasing) and the
// virtual points. Virtual points within tol of another time are redrawn on
// their own interval until no ties remain.
std::vector<double> merge_with_virtual(const std::vector<double>& fixed,
                                       std::vector<VirtualPoint> v, double tol, Rng& rng);

// Potential jump times for the next skeleton draw: {tmin} ∪ J(x) ∪ V where V
// is Poisson with rate R(t; x(t)) - Q(t; x(t)). V points that land within the
// tie tolerance of another time are redrawn.
std::vector<double> resample_virtual(const IntensityModel& m, const Trajectory& x, Rng& rng);

// One transition of the auxiliary-variable sampler; leaves p(X | Y) invariant.
Trajectory rao_teh_step(const IntensityModel& m, const Evidence& evid, const Trajectory& x,
                        Rng& rng);

// Merges event times with a freshly drawn skeleton and drops virtual jumps.
Trajectory skeleton_to_trajectory(double tmin, double tmax, std::span<const double> times,
                                  const std::vector<State>& skeleton);

struct SweepRecord {
  std::size_t sweep = 0;
  std::size_t jump_count = 0;
  double log_density = 0.0;  // log p(X) + log L(Y | X)
  std::vector<State> probe_states;
};

struct ChainOptions {
  std::size_t sweeps = 0;
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::vector<double> probes;
  std::size_t snapshot_every = 0;  // 0 disables snapshots
};

// One record per executed sweep. retained() applies burn-in and thinning.
struct ChainTrace {
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::vector<SweepRecord> records;
  std::vector<std::pair<std::size_t, Trajectory>> snapshots;

  std::vector<const SweepRecord*> retained() const;
};

// Probe times used when none are given: observation times plus endpoints.
std::vector<double> default_probes(const IntensityModel& m, const Evidence& evid);

// Runs sweeps of rao_teh_step from init (or a compacted prior draw).
ChainTrace run_chain(const IntensityModel& m, const Evidence& evid,
                     const std::optional<Trajectory>& init, const ChainOptions& opts, Rng& rng);

// Independent chains; chain c draws from make_stream(seed, c). Output is
// ordered by chain and does not depend on the worker count.
std::vector<ChainTrace> run_chains(const IntensityModel& m, const Evidence& evid,
                                   const std::optional<Trajectory>& init,
                                   const ChainOptions& opts, std::uint64_t seed,
                                   std::size_t chains, std::size_t workers);

// Runs job(i) for i in [0, count) over at most `workers` threads.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& job);

// Empirical probe marginals over the retained records of all chains:
// result[p](s) = fraction with state s at probe p.
std::vector<Vector> probe_marginals(std::span<const ChainTrace> traces, std::size_t n_states);

}  // namespace jumpchain

#endif
