#include "jumpchain/thinning.hpp"

namespace jumpchain {

Matrix thinning_matrix(const Matrix& generator, const Vector& instrumental) {
  const auto n = generator.rows();
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double r = instrumental(s);
    if (r <= 0.0) {
      p(s, s) = 1.0;
      continue;
    }
    double off = 0.0;
    for (Eigen::Index s2 = 0; s2 < n; ++s2) {
      if (s2 == s) continue;
      p(s, s2) = generator(s, s2) / r;
      off += p(s, s2);
    }
    p(s, s) = 1.0 - off;
  }
  return p;
}

Matrix thinning_matrix(const IntensityModel& m, double t) {
  const std::size_t k = m.block_at(t);
  return thinning_matrix(m.generator(k), m.instrumental_block(k));
}

State sample_categorical(const Vector& weights, Rng& rng) {
  const double total = weights.sum();
  std::uniform_real_distribution<double> unif(0.0, total);
  double u = unif(rng);
  State last = 0;
  for (Eigen::Index s = 0; s < weights.size(); ++s) {
    if (weights(s) <= 0.0) continue;
    last = static_cast<State>(s);
    if (u < weights(s)) return last;
    u -= weights(s);
  }
  return last;
}

EventSequence sample_prior_path(const IntensityModel& m, Rng& rng) {
  std::vector<double> times{m.tmin()};
  std::vector<State> skeleton{sample_categorical(m.nu(), rng)};
  const double tol = kTieTolerance * m.length();
  for (;;) {
    const State prev = skeleton.back();
    auto next = sample_holding_time(times.back(), m.instrumental_rate(prev), m.tmax(), rng);
    if (!next) break;
    // A holding time shorter than the tie tolerance has probability ~1e-12;
    // treat it as if the clock had not fired yet.
    if (*next <= times.back() + tol) continue;
    const std::size_t k = m.block_at(*next);
    const Matrix p = thinning_matrix(m.generator(k), m.instrumental_block(k));
    times.push_back(*next);
    skeleton.push_back(sample_categorical(p.row(static_cast<Eigen::Index>(prev)).transpose(), rng));
  }
  return EventSequence(m.tmin(), m.tmax(), std::move(times), std::move(skeleton));
}

double joint_log_density(const IntensityModel& m, const EventSequence& ev) {
  const auto& t = ev.times();
  const auto& s = ev.skeleton();
  double lp = safe_log(m.nu()(s[0]));
  for (std::size_t i = 1; i < ev.size(); ++i) {
    const Matrix p = thinning_matrix(m, t[i]);
    lp += safe_log(p(s[i - 1], s[i]));
    lp += holding_log_density(t[i - 1], t[i], m.instrumental_rate(s[i - 1]));
  }
  lp -= m.instrumental_rate(s.back()).integral(t.back(), m.tmax());
  return lp;
}

}  // namespace jumpchain
