#include "jumpchain/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace jumpchain {

namespace {

constexpr double kSeriesTail = 1e-14;
constexpr double kMaxRateTime = 20.0;  // split horizons with r dt above this

Matrix uniformized_series(const Matrix& q, double r, double dt) {
  const auto n = q.rows();
  if (r <= 0.0 || dt == 0.0) return Matrix::Identity(n, n);
  const Matrix p = Matrix::Identity(n, n) + q / r;
  const double lambda = r * dt;
  double weight = std::exp(-lambda);
  double mass = weight;
  Matrix term = Matrix::Identity(n, n);
  Matrix out = weight * term;
  for (int k = 1; 1.0 - mass > kSeriesTail; ++k) {
    term = term * p;
    weight *= lambda / k;
    mass += weight;
    out += weight * term;
    if (k > 10000) break;
  }
  return out;
}

// Scales v to max 1 and returns the log of the factor removed.
double rescale(Vector& v) {
  const double m = v.maxCoeff();
  if (!(m > 0.0)) throw ImpossibleEvidence("impossible evidence: all states have zero mass");
  v /= m;
  return std::log(m);
}

std::vector<double> merge_nodes(std::vector<double> t, double tol) {
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double x : t)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

std::size_t nearest_node(const std::vector<double>& nodes, double t) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
  if (it == nodes.end()) return nodes.size() - 1;
  if (it != nodes.begin() && t - *(it - 1) < *it - t) --it;
  return static_cast<std::size_t>(it - nodes.begin());
}

}  // namespace

Matrix transition_probability(const Matrix& q, double dt) {
  if (dt < 0.0) throw ModelError("transition horizon must be nonnegative");
  const double r = (-q.diagonal()).maxCoeff();
  if (r <= 0.0 || dt == 0.0) return Matrix::Identity(q.rows(), q.cols());
  const int pieces = std::max(1, static_cast<int>(std::ceil(r * dt / kMaxRateTime)));
  const Matrix step = uniformized_series(q, r, dt / pieces);
  Matrix out = step;
  for (int k = 1; k < pieces; ++k) out = out * step;
  return out;
}

Matrix transition_probability(const IntensityModel& m, double a, double b) {
  if (b < a) throw ModelError("transition interval must satisfy a <= b");
  Matrix out = Matrix::Identity(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
  double t = a;
  while (t < b) {
    const std::size_t k = m.block_at(t);
    const double hi = std::min(b, m.block_end(k));
    out = out * transition_probability(m.generator(k), hi - t);
    t = hi;
  }
  return out;
}

Vector prior_marginal(const IntensityModel& m, double t) {
  return transition_probability(m, m.tmin(), t).transpose() * m.nu();
}

Vector GridPosterior::at(double t) const {
  if (times.empty()) throw ModelError("empty grid posterior");
  if (t <= times.front()) return marginals.front();
  if (t >= times.back()) return marginals.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double tol = 1e-12 * (times.back() - times.front());
  if (t - times[k] <= tol) return marginals[k];
  if (times[k + 1] - t <= tol) return marginals[k + 1];
  const double u = (t - times[k]) / (times[k + 1] - times[k]);
  return (1.0 - u) * marginals[k] + u * marginals[k + 1];
}

GridPosterior grid_posterior(const IntensityModel& m, const Evidence& evid, double step,
                             std::span<const double> extra_times) {
  evid.check_compatible(m);
  const double len = m.length();
  if (!(step > 0.0) || step > len) throw ModelError("grid step must lie in (0, tmax - tmin]");
  const double count = std::round(len / step);
  if (std::abs(count * step - len) > 1e-9 * len)
    throw ModelError("grid step must divide tmax - tmin");
  const auto n_steps = static_cast<std::size_t>(count);
  const double tol = 1e-12 * len;

  std::vector<double> raw;
  raw.reserve(n_steps + 1 + evid.size() + extra_times.size());
  for (std::size_t k = 0; k < n_steps; ++k) raw.push_back(m.tmin() + static_cast<double>(k) * step);
  raw.push_back(m.tmax());
  raw.insert(raw.end(), evid.obs_times().begin(), evid.obs_times().end());
  for (std::size_t k = 1; k < m.block_count(); ++k) raw.push_back(m.block_start(k));
  for (double t : extra_times) {
    if (t < m.tmin() || t > m.tmax()) throw ModelError("grid probe outside [tmin, tmax]");
    raw.push_back(t);
  }
  GridPosterior out;
  out.step = step;
  out.times = merge_nodes(std::move(raw), tol);
  const std::size_t nodes = out.times.size();
  const auto ns = static_cast<Eigen::Index>(m.size());

  std::vector<Vector> emission(nodes, Vector::Ones(ns));
  double log_scale = 0.0;
  for (std::size_t j = 0; j < evid.size(); ++j) {
    const std::size_t k = nearest_node(out.times, evid.obs_times()[j]);
    const Vector& ll = evid.log_lik(j);
    const double top = ll.maxCoeff();
    emission[k] = emission[k].cwiseProduct(exp_of((ll.array() - top).matrix()));
    log_scale += top;
  }

  // kernels[k] maps node k-1 to node k.
  std::vector<Matrix> kernels(nodes);
  std::vector<Matrix> full_step(m.block_count());
  for (std::size_t k = 1; k < nodes; ++k) {
    const double dt = out.times[k] - out.times[k - 1];
    const std::size_t b = m.block_at(out.times[k - 1]);
    if (std::abs(dt - step) <= tol) {
      if (full_step[b].size() == 0) full_step[b] = transition_probability(m.generator(b), step);
      kernels[k] = full_step[b];
    } else {
      kernels[k] = transition_probability(m.generator(b), dt);
    }
  }

  std::vector<Vector> alpha(nodes);
  alpha[0] = m.nu().cwiseProduct(emission[0]);
  double log_norm = rescale(alpha[0]);
  for (std::size_t k = 1; k < nodes; ++k) {
    alpha[k] = (kernels[k].transpose() * alpha[k - 1]).cwiseProduct(emission[k]);
    log_norm += rescale(alpha[k]);
  }
  out.log_evidence = log_norm + std::log(alpha[nodes - 1].sum()) + log_scale;

  Vector beta = Vector::Ones(ns);
  out.marginals.assign(nodes, Vector());
  for (std::size_t k = nodes; k-- > 0;) {
    if (k + 1 < nodes) {
      beta = kernels[k + 1] * emission[k + 1].cwiseProduct(beta);
      rescale(beta);
    }
    Vector p = alpha[k].cwiseProduct(beta);
    p /= p.sum();
    out.marginals[k] = std::move(p);
  }
  return out;
}

RichardsonCheck richardson_marginals(const IntensityModel& m, const Evidence& evid, double step,
                                     std::span<const double> probes) {
  const GridPosterior coarse = grid_posterior(m, evid, step, probes);
  const GridPosterior fine = grid_posterior(m, evid, step / 2.0, probes);
  RichardsonCheck out;
  for (double t : probes) {
    out.coarse.push_back(coarse.at(t));
    out.fine.push_back(fine.at(t));
    out.extrapolated.push_back(2.0 * out.fine.back() - out.coarse.back());
    out.max_abs_diff = std::max(out.max_abs_diff, (out.fine.back() - out.coarse.back()).cwiseAbs().maxCoeff());
  }
  return out;
}

SkeletonEnumeration enumerate_skeletons(const SkeletonHmm& h, std::size_t cap) {
  h.check();
  const std::size_t n = h.states();
  const std::size_t steps = h.steps();
  std::size_t total = 1;
  for (std::size_t i = 0; i < steps; ++i) {
    if (total > cap / n) throw ModelError("skeleton enumeration exceeds the cap");
    total *= n;
  }
  std::vector<double> logp(total);
  std::vector<State> s(steps, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < steps; ++i) {
      s[i] = rest % n;
      rest /= n;
    }
    double lp = safe_log(h.initial(static_cast<Eigen::Index>(s[0]))) + h.log_potentials[0](static_cast<Eigen::Index>(s[0]));
    for (std::size_t i = 1; i < steps && !is_log_zero(lp); ++i)
      lp += safe_log(h.transitions[i - 1](static_cast<Eigen::Index>(s[i - 1]), static_cast<Eigen::Index>(s[i]))) +
            h.log_potentials[i](static_cast<Eigen::Index>(s[i]));
    logp[idx] = lp;
  }
  SkeletonEnumeration out;
  out.log_normalizer = log_sum_exp(logp);
  if (is_log_zero(out.log_normalizer)) throw ImpossibleEvidence("impossible evidence: zero total mass");
  out.joint.resize(total);
  out.marginals.assign(steps, Vector::Zero(static_cast<Eigen::Index>(n)));
  for (std::size_t idx = 0; idx < total; ++idx) {
    const double p = std::exp(logp[idx] - out.log_normalizer);
    out.joint[idx] = p;
    std::size_t rest = idx;
    for (std::size_t i = 0; i < steps; ++i) {
      out.marginals[i](static_cast<Eigen::Index>(rest % n)) += p;
      rest /= n;
    }
  }
  return out;
}

CtbnObservedPosterior ctbn_observed_posterior(const CtbnModel& model, const CtbnPath& path,
                                              const std::vector<bool>& observed,
                                              std::span<const double> probes, std::size_t cap) {
  if (path.size() != model.size()) throw ModelError("path needs one trajectory per node");
  const IntensityModel flat = flatten(model, cap);
  const Matrix& q = flat.generator(0);
  const std::size_t total = model.joint_size();
  const auto nt = static_cast<Eigen::Index>(total);
  const double tol = 1e-12 * (model.tmax() - model.tmin());
  auto is_obs = [&](std::size_t w) { return w < observed.size() && observed[w]; };

  std::vector<double> points{model.tmin(), model.tmax()};
  for (std::size_t w = 0; w < model.size(); ++w)
    if (is_obs(w)) points.insert(points.end(), path[w].jump_times().begin(), path[w].jump_times().end());
  for (double t : probes) {
    if (t < model.tmin() || t > model.tmax()) throw ModelError("probe outside [tmin, tmax]");
    points.push_back(t);
  }
  points = merge_nodes(std::move(points), tol);
  const std::size_t np = points.size();

  std::vector<std::vector<State>> decoded(total);
  for (std::size_t x = 0; x < total; ++x) decoded[x] = model.decode_joint(x);
  auto mask_at = [&](double t) {
    Vector mask = Vector::Ones(nt);
    for (std::size_t x = 0; x < total; ++x)
      for (std::size_t w = 0; w < model.size(); ++w)
        if (is_obs(w) && decoded[x][w] != evaluate(path[w], t)) mask(static_cast<Eigen::Index>(x)) = 0.0;
    return mask;
  };

  // step[k]: segment kernel from point k-1 to point k, followed by the jump
  // matrix of any observed jump at point k.
  std::vector<Matrix> step(np);
  for (std::size_t k = 1; k < np; ++k) {
    const Vector mask = mask_at(points[k - 1]);
    const Matrix sub = mask.asDiagonal() * q * mask.asDiagonal();
    Matrix kern = transition_probability(sub, points[k] - points[k - 1]);
    if (k + 1 < np) {
      std::vector<std::size_t> jumping;
      for (std::size_t w = 0; w < model.size(); ++w) {
        if (!is_obs(w)) continue;
        const auto& jt = path[w].jump_times();
        if (std::binary_search(jt.begin(), jt.end(), points[k])) jumping.push_back(w);
      }
      if (jumping.size() > 1) throw ModelError("observed nodes jump simultaneously");
      if (!jumping.empty()) {
        const Vector after = mask_at(points[k]);
        kern = kern * (mask.asDiagonal() * q * after.asDiagonal());
      }
    }
    step[k] = std::move(kern);
  }

  std::vector<Vector> alpha(np);
  alpha[0] = flat.nu().cwiseProduct(mask_at(points[0]));
  double log_norm = rescale(alpha[0]);
  for (std::size_t k = 1; k < np; ++k) {
    alpha[k] = step[k].transpose() * alpha[k - 1];
    log_norm += rescale(alpha[k]);
  }
  CtbnObservedPosterior out;
  out.probes.assign(probes.begin(), probes.end());
  out.log_evidence = log_norm + std::log(alpha[np - 1].sum());

  std::vector<Vector> marg(np);
  Vector beta = Vector::Ones(nt);
  for (std::size_t k = np; k-- > 0;) {
    if (k + 1 < np) {
      beta = step[k + 1] * beta;
      rescale(beta);
    }
    marg[k] = alpha[k].cwiseProduct(beta);
    marg[k] /= marg[k].sum();
  }
  for (double t : probes) out.joint.push_back(marg[nearest_node(points, t)]);
  return out;
}

Vector node_marginal(const CtbnModel& model, const Vector& joint, std::size_t w) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(model.node(w).states.size()));
  for (Eigen::Index x = 0; x < joint.size(); ++x)
    out(static_cast<Eigen::Index>(model.decode_joint(static_cast<std::size_t>(x))[w])) += joint(x);
  return out;
}

}  // namespace jumpchain
