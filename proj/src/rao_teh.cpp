#include "jumpchain/rao_teh.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "jumpchain/thinning.hpp"

namespace jumpchain {

std::vector<double> resample_virtual(const IntensityModel& m, const Trajectory& x, Rng& rng) {
  std::vector<VirtualPoint> v;
  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.segment_count(); ++i) {
    const double a = x.segment_start(i);
    const double b = x.segment_end(i);
    const RateFunction& rate = m.virtual_rate(x.states()[i]);
    const auto& edges = rate.edges();
    for (std::size_t k = rate.piece_at(a); k < edges.size(); ++k) {
      const double lo = std::max(a, edges[k]);
      const double hi = k + 1 < edges.size() ? std::min(b, edges[k + 1]) : b;
      if (hi > lo) {
        scratch.clear();
        append_poisson_points(rate.values()[k], lo, hi, rng, scratch);
        for (double t : scratch) v.push_back({t, lo, hi});
      }
      if (k + 1 >= edges.size() || edges[k + 1] >= b) break;
    }
  }

  std::vector<double> fixed{m.tmin()};
  fixed.insert(fixed.end(), x.jump_times().begin(), x.jump_times().end());
  return merge_with_virtual(fixed, std::move(v), kTieTolerance * m.length(), rng);
}

std::vector<double> merge_with_virtual(const std::vector<double>& fixed,
                                       std::vector<VirtualPoint> v, double tol, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    std::sort(v.begin(), v.end(), [](const VirtualPoint& p, const VirtualPoint& q) { return p.t < q.t; });
    bool collided = false;
    std::size_t f = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      while (f + 1 < fixed.size() && fixed[f + 1] <= v[i].t) ++f;
      const bool near_fixed = std::abs(v[i].t - fixed[f]) <= tol ||
                              (f + 1 < fixed.size() && std::abs(fixed[f + 1] - v[i].t) <= tol);
      const bool near_prev = i > 0 && v[i].t - v[i - 1].t <= tol;
      if (near_fixed || near_prev) {
        v[i].t = v[i].lo + (v[i].hi - v[i].lo) * unif(rng);
        collided = true;
      }
    }
    if (!collided) break;
  }

  std::vector<double> times;
  times.reserve(fixed.size() + v.size());
  std::size_t f = 0;
  for (const auto& p : v) {
    while (f < fixed.size() && fixed[f] < p.t) times.push_back(fixed[f++]);
    times.push_back(p.t);
  }
  while (f < fixed.size()) times.push_back(fixed[f++]);
  return times;
}

Trajectory skeleton_to_trajectory(double tmin, double tmax, std::span<const double> times,
                                  const std::vector<State>& skeleton) {
  std::vector<double> jumps;
  std::vector<State> states{skeleton.front()};
  for (std::size_t i = 1; i < skeleton.size(); ++i) {
    if (skeleton[i] != states.back()) {
      jumps.push_back(times[i]);
      states.push_back(skeleton[i]);
    }
  }
  return Trajectory(tmin, tmax, std::move(jumps), std::move(states));
}

Trajectory rao_teh_step(const IntensityModel& m, const Evidence& evid, const Trajectory& x,
                        Rng& rng) {
  const std::vector<double> times = resample_virtual(m, x, rng);
  const SkeletonHmm h = build_skeleton_hmm(m, times, evid);
  const FilterResult f = forward_filter(h);
  const std::vector<State> s = backward_sample(h, f, rng);
  return skeleton_to_trajectory(m.tmin(), m.tmax(), times, s);
}

std::vector<const SweepRecord*> ChainTrace::retained() const {
  std::vector<const SweepRecord*> out;
  const std::size_t step = std::max<std::size_t>(thin, 1);
  for (const auto& r : records)
    if (r.sweep >= burnin && (r.sweep - burnin) % step == 0) out.push_back(&r);
  return out;
}

std::vector<double> default_probes(const IntensityModel& m, const Evidence& evid) {
  std::vector<double> probes{m.tmin()};
  probes.insert(probes.end(), evid.obs_times().begin(), evid.obs_times().end());
  probes.push_back(m.tmax());
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  return probes;
}

ChainTrace run_chain(const IntensityModel& m, const Evidence& evid,
                     const std::optional<Trajectory>& init, const ChainOptions& opts, Rng& rng) {
  if (opts.sweeps > 0 && opts.burnin >= opts.sweeps)
    throw ModelError("burn-in must be smaller than the number of sweeps");
  evid.check_compatible(m);
  ChainTrace trace;
  trace.burnin = opts.burnin;
  trace.thin = std::max<std::size_t>(opts.thin, 1);
  if (opts.sweeps == 0) return trace;
  trace.records.reserve(opts.sweeps);

  Trajectory x = init ? *init : compact(sample_prior_path(m, rng));
  for (std::size_t sweep = 0; sweep < opts.sweeps; ++sweep) {
    x = rao_teh_step(m, evid, x, rng);
    SweepRecord rec;
    rec.sweep = sweep;
    rec.jump_count = jump_count(x);
    rec.log_density = path_log_density(m, x) + evid.log_likelihood(x);
    rec.probe_states.reserve(opts.probes.size());
    for (double t : opts.probes) rec.probe_states.push_back(evaluate(x, t));
    trace.records.push_back(std::move(rec));
    if (opts.snapshot_every > 0 && sweep % opts.snapshot_every == 0)
      trace.snapshots.emplace_back(sweep, x);
  }
  return trace;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& job) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= count || error) return;
          i = next++;
        }
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<ChainTrace> run_chains(const IntensityModel& m, const Evidence& evid,
                                   const std::optional<Trajectory>& init,
                                   const ChainOptions& opts, std::uint64_t seed,
                                   std::size_t chains, std::size_t workers) {
  std::vector<ChainTrace> out(chains);
  parallel_for(chains, workers, [&](std::size_t c) {
    Rng rng = make_stream(seed, c);
    out[c] = run_chain(m, evid, init, opts, rng);
  });
  return out;
}

std::vector<Vector> probe_marginals(std::span<const ChainTrace> traces, std::size_t n_states) {
  std::size_t n_probes = 0;
  for (const auto& t : traces)
    if (!t.records.empty()) n_probes = t.records.front().probe_states.size();
  std::vector<Vector> out(n_probes, Vector::Zero(static_cast<Eigen::Index>(n_states)));
  double total = 0.0;
  for (const auto& t : traces) {
    for (const SweepRecord* r : t.retained()) {
      for (std::size_t p = 0; p < n_probes; ++p) out[p](static_cast<Eigen::Index>(r->probe_states[p])) += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0)
    for (auto& v : out) v /= total;
  return out;
}

}  // namespace jumpchain
