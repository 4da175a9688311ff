#include "jumpchain/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <memory>
#include <stdexcept>

#include "jumpchain/thinning.hpp"

namespace jumpchain {

namespace {

constexpr double kSeFloor = 1e-12;

}  // namespace

DriftReport drift_estimate(std::span<const double> seeded,
                           const std::function<double(std::size_t, Rng&)>& step,
                           std::size_t reps, Rng& rng) {
  if (reps < 100) throw std::invalid_argument("drift estimate needs at least 100 replicates");
  if (seeded.size() < 2) throw std::invalid_argument("drift estimate needs at least 2 seeds");
  DriftReport rep;
  rep.seeded.assign(seeded.begin(), seeded.end());
  for (std::size_t i = 0; i < seeded.size(); ++i) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double j = step(i, rng);
      sum += j;
      sum_sq += j * j;
    }
    const double n = static_cast<double>(reps);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    rep.mean.push_back(mean);
    rep.se.push_back(std::max(std::sqrt(var / n), kSeFloor));
    rep.reps.push_back(reps);
  }
  double s = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < rep.seeded.size(); ++i) {
    const double w = 1.0 / (rep.se[i] * rep.se[i]);
    const double x = rep.seeded[i];
    s += w;
    sx += w * x;
    sy += w * rep.mean[i];
    sxx += w * x * x;
    sxy += w * x * rep.mean[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("drift seeds need distinct jump counts");
  rep.slope = (s * sxy - sx * sy) / det;
  rep.intercept = (sxx * sy - sx * sxy) / det;
  rep.slope_se = std::sqrt(s / det);
  rep.intercept_se = std::sqrt(sxx / det);
  return rep;
}

DriftReport drift_estimate(const std::function<Trajectory(const Trajectory&, Rng&)>& kernel,
                           const std::vector<Trajectory>& seeds, std::size_t reps, Rng& rng) {
  std::vector<double> seeded;
  for (const auto& x : seeds) seeded.push_back(static_cast<double>(jump_count(x)));
  return drift_estimate(
      seeded,
      [&](std::size_t i, Rng& r) { return static_cast<double>(jump_count(kernel(seeds[i], r))); },
      reps, rng);
}

namespace {

Trajectory cycle_path(double tmin, double tmax, std::size_t count, State start,
                      const std::function<Matrix(double)>& generator_at) {
  if (count == 0) throw std::invalid_argument("jump count must be at least 1");
  std::vector<double> jumps;
  std::vector<State> states{start};
  const double step = (tmax - tmin) / static_cast<double>(count);
  for (std::size_t k = 1; k < count; ++k) {
    const double t = tmin + step * static_cast<double>(k);
    const Matrix q = generator_at(t);
    const auto s = static_cast<Eigen::Index>(states.back());
    Eigen::Index best = s == 0 ? 1 : 0;
    for (Eigen::Index s2 = 0; s2 < q.cols(); ++s2)
      if (s2 != s && q(s, s2) > q(s, best)) best = s2;
    jumps.push_back(t);
    states.push_back(static_cast<State>(best));
  }
  return Trajectory(tmin, tmax, std::move(jumps), std::move(states));
}

}  // namespace

Trajectory path_with_jump_count(const IntensityModel& m, std::size_t count) {
  if (m.size() < 2) throw std::invalid_argument("seed paths need at least 2 states");
  Eigen::Index start = 0;
  m.nu().maxCoeff(&start);
  return cycle_path(m.tmin(), m.tmax(), count, static_cast<State>(start),
                    [&](double t) { return m.generator(m.block_at(t)); });
}

CtbnPath ctbn_path_with_jump_count(const CtbnModel& model, const CtbnEvidence& evid,
                                   const CtbnPath& base, std::size_t count) {
  std::vector<std::size_t> free_nodes;
  for (std::size_t w = 0; w < model.size(); ++w)
    if (!evid.is_observed(w)) free_nodes.push_back(w);
  if (free_nodes.empty() || count < free_nodes.size())
    throw std::invalid_argument("jump count must be at least the number of unobserved nodes");
  CtbnPath out = base;
  for (std::size_t k = 0; k < free_nodes.size(); ++k) {
    const std::size_t w = free_nodes[k];
    const std::size_t share = count / free_nodes.size() + (k < count % free_nodes.size() ? 1 : 0);
    if (model.node(w).states.size() < 2) throw std::invalid_argument("seed paths need at least 2 states");
    // Most likely move under the first parent configuration.
    out[w] = cycle_path(model.tmin(), model.tmax(), share, evaluate(base[w], model.tmin()),
                        [&](double) { return model.cim(w, 0); });
  }
  return out;
}

double kolmogorov_p_value(double statistic, double n) {
  if (statistic <= 0.0) return 1.0;
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, kolmogorov_p_value(d, na * nb / (na + nb))};
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("KS test needs a nonempty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_p_value(d, n)};
}

Evidence make_evidence(const EmissionSpec& spec, const Observations& y) {
  if (y.size() != spec.times.size()) throw ModelError("need one symbol per observation time");
  std::vector<Vector> ll;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (static_cast<Eigen::Index>(y[j]) >= spec.emission.cols()) throw ModelError("unknown observation symbol");
    Vector v(spec.emission.rows());
    for (Eigen::Index s = 0; s < v.size(); ++s) v(s) = safe_log(spec.emission(s, static_cast<Eigen::Index>(y[j])));
    ll.push_back(std::move(v));
  }
  return Evidence(spec.times, std::move(ll));
}

Observations sample_observations(const EmissionSpec& spec, const Trajectory& x, Rng& rng) {
  Observations y;
  y.reserve(spec.times.size());
  for (double t : spec.times)
    y.push_back(sample_categorical(spec.emission.row(static_cast<Eigen::Index>(evaluate(x, t))).transpose(), rng));
  return y;
}

GewekeProblem<Trajectory, Observations> mjp_geweke_problem(const IntensityModel& m,
                                                           const EmissionSpec& spec,
                                                           MjpKernel kernel) {
  auto model = std::make_shared<const IntensityModel>(m);
  auto em = std::make_shared<const EmissionSpec>(spec);
  GewekeProblem<Trajectory, Observations> p;
  p.prior = [model](Rng& rng) { return compact(sample_prior_path(*model, rng)); };
  p.evidence = [em](const Trajectory& x, Rng& rng) { return sample_observations(*em, x, rng); };
  p.kernel = [model, em, kernel](const Trajectory& x, const Observations& y, Rng& rng) {
    return kernel(*model, make_evidence(*em, y), x, rng);
  };
  p.statistics = [model](const Trajectory& x, const Observations&) {
    return std::vector<double>{static_cast<double>(jump_count(x)), occupation_time(x, 0),
                               static_cast<double>(evaluate(x, 0.5 * (model->tmin() + model->tmax())))};
  };
  return p;
}

double tv_distance(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions have different support sizes");
  return 0.5 * (p - q).cwiseAbs().sum();
}

double ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw std::invalid_argument("ESS needs a series of length at least 100");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (series[t] - mean) * (series[t + lag] - mean);
    return acc / static_cast<double>(n);
  };
  const double g0 = autocov(0);
  if (!(g0 > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / g0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / tau;
}

std::vector<double> tv_across_chains(std::span<const ChainTrace> traces,
                                     const std::vector<Vector>& oracle) {
  std::size_t sweeps = std::numeric_limits<std::size_t>::max();
  for (const auto& t : traces) sweeps = std::min(sweeps, t.records.size());
  if (traces.empty()) sweeps = 0;
  std::vector<double> out;
  out.reserve(sweeps);
  const double chains = static_cast<double>(traces.size());
  for (std::size_t m = 0; m < sweeps; ++m) {
    double worst = 0.0;
    for (std::size_t p = 0; p < oracle.size(); ++p) {
      Vector emp = Vector::Zero(oracle[p].size());
      for (const auto& t : traces) emp(static_cast<Eigen::Index>(t.records[m].probe_states[p])) += 1.0;
      worst = std::max(worst, tv_distance(emp / chains, oracle[p]));
    }
    out.push_back(worst);
  }
  return out;
}

}  // namespace jumpchain
