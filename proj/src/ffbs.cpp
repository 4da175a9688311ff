#include "jumpchain/ffbs.hpp"

#include <algorithm>

#include "jumpchain/thinning.hpp"

namespace jumpchain {

namespace {

// Normalizes exp(logw) in place into probabilities; returns log of the sum.
double normalize_log_weights(const Vector& logw, Vector& out) {
  const double m = logw.maxCoeff();
  if (is_log_zero(m) || std::isnan(m)) throw ImpossibleEvidence("impossible evidence: all skeleton states have zero mass");
  out = exp_of((logw.array() - m).matrix());
  const double sum = out.sum();
  out /= sum;
  return m + std::log(sum);
}

Vector log_of(const Vector& v) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = safe_log(v(i));
  return out;
}

}  // namespace

void SkeletonHmm::check() const {
  const auto n = initial.size();
  if (log_potentials.empty()) throw ModelError("skeleton chain needs at least one step");
  if (transitions.size() + 1 != log_potentials.size())
    throw ModelError("skeleton chain needs one transition matrix per step after the first");
  for (const auto& g : log_potentials)
    if (g.size() != n) throw ModelError("potential has the wrong length");
  for (const auto& p : transitions) {
    if (p.rows() != n || p.cols() != n) throw ModelError("transition matrix has the wrong shape");
    for (Eigen::Index s = 0; s < n; ++s)
      if (std::abs(p.row(s).sum() - 1.0) > 1e-12 || p.row(s).minCoeff() < 0.0)
        throw ModelError("transition matrix is not row-stochastic");
  }
}

SkeletonHmm build_skeleton_hmm(const IntensityModel& m, std::span<const double> times,
                               const Evidence& evid) {
  if (times.empty() || times.front() != m.tmin())
    throw ModelError("event times must start at tmin");
  const std::size_t n = m.size();
  const std::size_t steps = times.size();
  SkeletonHmm h;
  h.initial = m.nu();
  h.transitions.reserve(steps - 1);
  h.log_potentials.assign(steps, Vector::Zero(static_cast<Eigen::Index>(n)));

  const auto& obs = evid.obs_times();
  std::size_t j = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double lo = times[i];
    const bool last = i + 1 == steps;
    const double hi = last ? m.tmax() : times[i + 1];
    Vector& g = h.log_potentials[i];
    const std::size_t k = last ? 0 : m.block_at(hi);
    for (std::size_t s = 0; s < n; ++s) {
      const auto& r = m.instrumental_rate(s);
      g(s) = -r.integral(lo, hi);
      if (!last) g(s) += safe_log(m.instrumental_block(k)(s));
    }
    while (j < obs.size() && obs[j] < lo) ++j;
    while (j < obs.size() && (obs[j] < hi || (last && obs[j] <= hi))) {
      g += evid.log_lik(j);
      ++j;
    }
    if (!last) h.transitions.push_back(thinning_matrix(m.generator(k), m.instrumental_block(k)));
  }
  return h;
}

FilterResult forward_filter(const SkeletonHmm& h) {
  FilterResult f;
  f.filtered.resize(h.steps());
  Vector logw = log_of(h.initial) + h.log_potentials[0];
  f.log_normalizer = normalize_log_weights(logw, f.filtered[0]);
  for (std::size_t i = 1; i < h.steps(); ++i) {
    const Vector pred = h.transitions[i - 1].transpose() * f.filtered[i - 1];
    logw = log_of(pred) + h.log_potentials[i];
    f.log_normalizer += normalize_log_weights(logw, f.filtered[i]);
  }
  return f;
}

std::vector<State> backward_sample(const SkeletonHmm& h, const FilterResult& f, Rng& rng) {
  const std::size_t steps = h.steps();
  std::vector<State> s(steps);
  s[steps - 1] = sample_categorical(f.filtered[steps - 1], rng);
  for (std::size_t i = steps - 1; i-- > 0;) {
    const Vector w = f.filtered[i].cwiseProduct(
        h.transitions[i].col(static_cast<Eigen::Index>(s[i + 1])));
    s[i] = sample_categorical(w, rng);
  }
  return s;
}

std::vector<Vector> smoothing_marginals(const SkeletonHmm& h) {
  const FilterResult f = forward_filter(h);
  const std::size_t steps = h.steps();
  const auto n = static_cast<Eigen::Index>(h.states());
  std::vector<Vector> log_beta(steps, Vector::Zero(n));
  for (std::size_t i = steps - 1; i-- > 0;) {
    const Vector v = h.log_potentials[i + 1] + log_beta[i + 1];
    const double mv = v.maxCoeff();
    const Vector e = exp_of((v.array() - mv).matrix());
    log_beta[i] = log_of(h.transitions[i] * e).array() + mv;
  }
  std::vector<Vector> out(steps);
  for (std::size_t i = 0; i < steps; ++i)
    normalize_log_weights(log_of(f.filtered[i]) + log_beta[i], out[i]);
  return out;
}

}  // namespace jumpchain
