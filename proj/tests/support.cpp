#include "support.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace testing_support {

Matrix gen2(double a, double b) {
  Matrix q(2, 2);
  q << -a, a, b, -b;
  return q;
}

IntensityModel two_state(double a, double b, double r0, double r1, Vector nu, double tmin,
                         double tmax) {
  Vector r(2);
  r << r0, r1;
  return IntensityModel(StateSpace({"a", "b"}), std::move(nu), tmin, tmax, {}, {gen2(a, b)}, {r});
}

IntensityModel symmetric_model() {
  Vector nu(2);
  nu << 1.0, 0.0;
  return two_state(1.0, 1.0, 2.0, 2.0, nu);
}

Matrix expm(const Matrix& q, double t) {
  const Matrix a = q * t;
  return a.exp();
}

Trajectory gillespie_path(const IntensityModel& m, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> jumps;
  std::vector<State> states;
  {
    double u = unif(rng), acc = 0.0;
    State s = 0;
    for (; s + 1 < m.size(); ++s) {
      acc += m.nu()(static_cast<Eigen::Index>(s));
      if (u < acc) break;
    }
    states.push_back(s);
  }
  double t = m.tmin();
  while (t < m.tmax()) {
    const std::size_t k = m.block_at(t);
    const Matrix& q = m.generator(k);
    const auto s = static_cast<Eigen::Index>(states.back());
    const double rate = -q(s, s);
    const double end = m.block_end(k);
    const double h = rate > 0.0 ? std::exponential_distribution<double>(rate)(rng)
                                : std::numeric_limits<double>::infinity();
    if (t + h >= end) {
      t = end;
      continue;
    }
    t += h;
    double u = unif(rng) * rate, acc = 0.0;
    Eigen::Index next = -1;
    for (Eigen::Index s2 = 0; s2 < q.cols(); ++s2) {
      if (s2 == s) continue;
      acc += q(s, s2);
      next = s2;
      if (u < acc) break;
    }
    jumps.push_back(t);
    states.push_back(static_cast<State>(next));
  }
  return Trajectory(m.tmin(), m.tmax(), std::move(jumps), std::move(states));
}

Trajectory rejection_posterior(const IntensityModel& m, const Evidence& evid, Rng& rng) {
  double bound = 0.0;
  for (std::size_t j = 0; j < evid.size(); ++j) bound += evid.log_lik(j).maxCoeff();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    Trajectory x = gillespie_path(m, rng);
    double ll = 0.0;
    for (std::size_t j = 0; j < evid.size(); ++j)
      ll += evid.log_lik(j)(static_cast<Eigen::Index>(evaluate(x, evid.obs_times()[j])));
    if (std::log(unif(rng)) < ll - bound) return x;
  }
}

namespace {

// Integral over [a, b] of f(block) where f is constant on each block.
template <class F>
double block_integral(const IntensityModel& m, double a, double b, F f) {
  double total = 0.0;
  double t = a;
  while (t < b) {
    const std::size_t k = m.block_at(t);
    const double hi = std::min(b, m.block_end(k));
    total += f(k) * (hi - t);
    t = hi;
  }
  return total;
}

}  // namespace

double redundant_log_density(const IntensityModel& m, std::span<const double> times,
                             const std::vector<State>& skeleton, const Evidence& evid) {
  double lp = safe_log(m.nu()(static_cast<Eigen::Index>(skeleton[0])));
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto s = static_cast<Eigen::Index>(skeleton[i]);
    const double lo = times[i];
    const double hi = i + 1 < times.size() ? times[i + 1] : m.tmax();
    // Survival of the compact path and of the virtual process on this segment.
    lp -= block_integral(m, lo, hi, [&](std::size_t k) { return m.instrumental_block(k)(s); });
    if (i + 1 < times.size()) {
      const std::size_t k = m.block_at(hi);
      const auto s2 = static_cast<Eigen::Index>(skeleton[i + 1]);
      lp += s2 == s ? safe_log(m.instrumental_block(k)(s) + m.generator(k)(s, s))
                    : safe_log(m.generator(k)(s, s2));
    }
  }
  for (std::size_t j = 0; j < evid.size(); ++j) {
    const double t = evid.obs_times()[j];
    std::size_t i = 0;
    while (i + 1 < times.size() && times[i + 1] <= t) ++i;
    lp += evid.log_lik(j)(static_cast<Eigen::Index>(skeleton[i]));
  }
  return lp;
}

SkeletonHmm random_hmm(std::size_t n, std::size_t steps, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.5);
  const auto ni = static_cast<Eigen::Index>(n);
  SkeletonHmm h;
  h.initial = Vector(ni);
  for (Eigen::Index s = 0; s < ni; ++s) h.initial(s) = unif(rng);
  h.initial /= h.initial.sum();
  for (std::size_t i = 0; i < steps; ++i) {
    Vector g(ni);
    for (Eigen::Index s = 0; s < ni; ++s) g(s) = gauss(rng);
    h.log_potentials.push_back(g);
    if (i == 0) continue;
    Matrix p(ni, ni);
    for (Eigen::Index r = 0; r < ni; ++r) {
      for (Eigen::Index c = 0; c < ni; ++c) p(r, c) = unif(rng);
      p.row(r) /= p.row(r).sum();
    }
    h.transitions.push_back(p);
  }
  return h;
}

CtbnModel two_node_net(bool tabular_nu) {
  CtbnNode u{"u", StateSpace({"0", "1"}), {}, {gen2(1.0, 1.5)}, {}};
  CtbnNode w{"w", StateSpace({"0", "1"}), {0}, {gen2(0.5, 2.0), gen2(2.5, 0.4)}, {}};
  CtbnInitialLaw nu;
  if (tabular_nu) {
    Vector t(4);
    t << 0.4, 0.1, 0.2, 0.3;  // joint index u + 2 w
    nu.tabular = t;
  } else {
    Vector pu(2), pw(2);
    pu << 0.7, 0.3;
    pw << 0.4, 0.6;
    nu.factored = {pu, pw};
  }
  return CtbnModel({u, w}, nu, 0.0, 1.0);
}

CtbnModel three_node_net() {
  CtbnNode a{"a", StateSpace({"0", "1"}), {}, {gen2(1.2, 0.8)}, {}};
  CtbnNode b{"b", StateSpace({"0", "1"}), {0}, {gen2(0.6, 1.8), gen2(2.0, 0.5)}, {}};
  // c has parents (b, a): config = b + 2 a.
  CtbnNode c{"c", StateSpace({"0", "1"}), {1, 0},
             {gen2(0.4, 1.0), gen2(1.5, 0.7), gen2(0.9, 2.2), gen2(2.4, 0.3)}, {}};
  Vector pa(2), pb(2), pc(2);
  pa << 0.5, 0.5;
  pb << 0.8, 0.2;
  pc << 0.3, 0.7;
  CtbnInitialLaw nu;
  nu.factored = {pa, pb, pc};
  return CtbnModel({a, b, c}, nu, 0.0, 1.5);
}

CtbnPath random_ctbn_path(const CtbnModel& model, Rng& rng, std::size_t max_jumps) {
  std::uniform_real_distribution<double> unif(model.tmin(), model.tmax());
  std::uniform_int_distribution<std::size_t> count(0, max_jumps);
  CtbnPath path;
  for (std::size_t w = 0; w < model.size(); ++w) {
    const std::size_t n = model.node(w).states.size();
    std::vector<double> jumps(count(rng));
    for (auto& t : jumps) t = unif(rng);
    std::sort(jumps.begin(), jumps.end());
    std::vector<State> states{std::uniform_int_distribution<State>(0, n - 1)(rng)};
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      State s = std::uniform_int_distribution<State>(0, n - 2)(rng);
      if (s >= states.back()) ++s;
      states.push_back(s);
    }
    path.emplace_back(model.tmin(), model.tmax(), std::move(jumps), std::move(states));
  }
  return path;
}

double ctbn_redundant_log_density(const CtbnModel& model, const CtbnPath& path, std::size_t w,
                                  std::span<const double> times,
                                  const std::vector<State>& skeleton) {
  std::vector<double> jumps;
  std::vector<State> states{skeleton[0]};
  for (std::size_t i = 1; i < skeleton.size(); ++i) {
    if (skeleton[i] != states.back()) {
      jumps.push_back(times[i]);
      states.push_back(skeleton[i]);
    }
  }
  CtbnPath x = path;
  x[w] = Trajectory(model.tmin(), model.tmax(), jumps, states);
  double lp = ctbn_log_density(model, x);

  const auto& node = model.node(w);
  auto leave = [&](double t, State s) {
    std::vector<State> joint(model.size());
    for (std::size_t u = 0; u < model.size(); ++u) joint[u] = evaluate(x[u], t);
    const auto si = static_cast<Eigen::Index>(s);
    return -model.cim(w, model.parent_config(w, joint))(si, si);
  };
  for (std::size_t i = 1; i < skeleton.size(); ++i)
    if (skeleton[i] == skeleton[i - 1]) lp += std::log(node.instrumental[skeleton[i]](times[i]) - leave(times[i], skeleton[i]));
  // Survival of the virtual process: integrate R - Q over the cells between
  // any change points of w, its parents, or R.
  std::vector<double> cuts{model.tmin(), model.tmax()};
  for (const auto& y : x) cuts.insert(cuts.end(), y.jump_times().begin(), y.jump_times().end());
  for (const auto& r : node.instrumental)
    for (double e : r.edges())
      if (e > model.tmin() && e < model.tmax()) cuts.push_back(e);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const State s = evaluate(x[w], a);
    lp -= (node.instrumental[s](a) - leave(a, s)) * (b - a);
  }
  return lp;
}

std::string data_path(const std::string& rel) { return std::string(JUMPCHAIN_TEST_DATA) + "/" + rel; }

}  // namespace testing_support
