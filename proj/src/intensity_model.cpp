#include "jumpchain/intensity_model.hpp"

#include <algorithm>
#include <sstream>

namespace jumpchain {

namespace {

Matrix normalized_generator(const Matrix& q, std::size_t n) {
  if (static_cast<std::size_t>(q.rows()) != n || static_cast<std::size_t>(q.cols()) != n)
    throw ModelError("Q block has the wrong shape");
  Matrix out = q;
  for (std::size_t s = 0; s < n; ++s) {
    double leave = 0.0;
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      if (s2 == s) continue;
      const double v = q(s, s2);
      if (!std::isfinite(v) || v < 0.0)
        throw ModelError("Q off-diagonal entries must be finite and nonnegative");
      leave += v;
    }
    out(s, s) = -leave;
  }
  return out;
}

}  // namespace

IntensityModel::IntensityModel(StateSpace states, Vector nu, double tmin, double tmax,
                               std::vector<double> breakpoints,
                               std::vector<Matrix> q_blocks, std::vector<Vector> r_blocks)
    : states_(std::move(states)), nu_(std::move(nu)), tmin_(tmin), tmax_(tmax),
      breakpoints_(std::move(breakpoints)) {
  const std::size_t n = states_.size();
  if (!std::isfinite(tmin_) || !std::isfinite(tmax_) || !(tmin_ < tmax_))
    throw ModelError("model interval must satisfy tmin < tmax");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    const double b = breakpoints_[k];
    if (!(b > tmin_ && b < tmax_) || (k > 0 && !(b > breakpoints_[k - 1])))
      throw ModelError("breakpoints must be strictly increasing inside (tmin, tmax)");
  }
  if (static_cast<std::size_t>(nu_.size()) != n) throw ModelError("nu has the wrong length");
  for (double p : nu_)
    if (!std::isfinite(p) || p < 0.0) throw ModelError("nu entries must be nonnegative");
  if (std::abs(nu_.sum() - 1.0) > 1e-12) throw ModelError("nu must sum to 1");

  const std::size_t blocks = breakpoints_.size() + 1;
  if (q_blocks.size() != blocks || r_blocks.size() != blocks)
    throw ModelError("need one Q block and one R block per breakpoint interval");
  q_blocks_.reserve(blocks);
  for (const auto& q : q_blocks) q_blocks_.push_back(normalized_generator(q, n));
  r_blocks_ = std::move(r_blocks);
  for (const auto& r : r_blocks_) {
    if (static_cast<std::size_t>(r.size()) != n) throw ModelError("R block has the wrong length");
    for (double v : r)
      if (!std::isfinite(v) || v < 0.0) throw ModelError("R entries must be finite and nonnegative");
  }

  std::vector<double> edges{tmin_};
  edges.insert(edges.end(), breakpoints_.begin(), breakpoints_.end());
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> rv(blocks), qv(blocks), vv(blocks);
    for (std::size_t k = 0; k < blocks; ++k) {
      rv[k] = r_blocks_[k](s);
      qv[k] = -q_blocks_[k](s, s);
      vv[k] = std::max(rv[k] - qv[k], 0.0);
    }
    r_fn_.emplace_back(edges, std::move(rv));
    q_fn_.emplace_back(edges, std::move(qv));
    v_fn_.emplace_back(edges, std::move(vv));
  }
}

IntensityModel IntensityModel::with_default_r(StateSpace states, Vector nu, double tmin,
                                              double tmax, std::vector<double> breakpoints,
                                              std::vector<Matrix> q_blocks, double factor) {
  if (!(factor > 1.0)) throw ModelError("R factor must exceed 1");
  const std::size_t n = states.size();
  std::vector<Matrix> gens;
  double q_top = 0.0;
  for (const auto& q : q_blocks) {
    gens.push_back(normalized_generator(q, n));
    q_top = std::max(q_top, (-gens.back().diagonal()).maxCoeff());
  }
  const double q_floor = q_top * kDefaultQFloorFraction;
  std::vector<Vector> r_blocks;
  for (const auto& g : gens) {
    Vector r(n);
    for (std::size_t s = 0; s < n; ++s) r(s) = factor * std::max(-g(s, s), q_floor);
    r_blocks.push_back(std::move(r));
  }
  return IntensityModel(std::move(states), std::move(nu), tmin, tmax, std::move(breakpoints),
                        std::move(gens), std::move(r_blocks));
}

std::size_t IntensityModel::block_at(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

Evidence::Evidence(std::vector<double> obs_times, std::vector<Vector> log_lik)
    : obs_times_(std::move(obs_times)), log_lik_(std::move(log_lik)) {
  if (obs_times_.size() != log_lik_.size())
    throw ModelError("evidence needs one log-likelihood table per observation time");
  for (std::size_t j = 0; j < obs_times_.size(); ++j) {
    if (!std::isfinite(obs_times_[j]) || (j > 0 && !(obs_times_[j] > obs_times_[j - 1])))
      throw ModelError("observation times must be finite and strictly increasing");
    bool possible = false;
    for (double v : log_lik_[j]) {
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw ModelError("log-likelihood entries must be finite or log-zero");
      possible = possible || std::isfinite(v);
    }
    if (!possible)
      throw ImpossibleEvidence("observation " + std::to_string(j) +
                               " has zero likelihood in every state");
  }
}

void Evidence::check_compatible(double tmin, double tmax, std::size_t n_states) const {
  for (std::size_t j = 0; j < size(); ++j) {
    if (obs_times_[j] < tmin || obs_times_[j] > tmax)
      throw ModelError("observation time outside [tmin, tmax]");
    if (static_cast<std::size_t>(log_lik_[j].size()) != n_states)
      throw ModelError("log-likelihood table length differs from the number of states");
  }
}

void Evidence::check_compatible(const IntensityModel& m) const {
  check_compatible(m.tmin(), m.tmax(), m.size());
}

double Evidence::log_likelihood(const Trajectory& x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < size(); ++j) total += log_lik_[j](evaluate(x, obs_times_[j]));
  return total;
}

std::string to_string(Assumption a) {
  switch (a) {
    case Assumption::kStructure: return "structure";
    case Assumption::kIrreducibleQmin: return "irreducible-qmin";
    case Assumption::kEta: return "eta";
    case Assumption::kRmax: return "rmax";
    case Assumption::kSupport: return "support";
  }
  return "unknown";
}

bool ValidationReport::fails(Assumption a) const {
  return std::any_of(violations.begin(), violations.end(),
                     [a](const Violation& v) { return v.assumption == a; });
}

Matrix entrywise_min(std::span<const Matrix> generators) {
  Matrix out = generators.front();
  for (const auto& g : generators.subspan(1)) out = out.cwiseMin(g);
  for (Eigen::Index s = 0; s < out.rows(); ++s) {
    out(s, s) = 0.0;
    out(s, s) = -out.row(s).sum();
  }
  return out;
}

bool is_irreducible(const Matrix& m) {
  const auto n = m.rows();
  // Every state must reach every other; check reachability from each root.
  for (Eigen::Index root = 0; root < n; ++root) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{root};
    seen[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
      const auto s = stack.back();
      stack.pop_back();
      for (Eigen::Index s2 = 0; s2 < n; ++s2) {
        if (s2 != s && m(s, s2) > 0.0 && !seen[static_cast<std::size_t>(s2)]) {
          seen[static_cast<std::size_t>(s2)] = 1;
          stack.push_back(s2);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  }
  return true;
}

ValidationReport validate_model(const IntensityModel& m, const ValidationOptions& opts) {
  ValidationReport rep;
  const std::size_t n = m.size();
  if (n < 2) {
    rep.violations.push_back({Assumption::kStructure, "", std::nullopt, std::nullopt,
                              "state space needs at least 2 states"});
  }

  std::vector<Matrix> gens;
  for (std::size_t k = 0; k < m.block_count(); ++k) gens.push_back(m.generator(k));
  rep.q_min = entrywise_min(gens);
  rep.q_min_irreducible = is_irreducible(rep.q_min);
  rep.q_min_rate = (-rep.q_min.diagonal()).minCoeff();
  if (!rep.q_min_irreducible) {
    std::ostringstream msg;
    msg << "Q_min is not irreducible;";
    for (std::size_t s = 0; s < n; ++s)
      if (-rep.q_min(s, s) <= 0.0) msg << " state '" << m.states().label(s) << "' has no exit in Q_min;";
    rep.violations.push_back({Assumption::kIrreducibleQmin, "", std::nullopt, std::nullopt, msg.str()});
  }

  // Largest ratio Q/R over blocks and states.
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < m.block_count(); ++k) {
    for (std::size_t s = 0; s < n; ++s) {
      const double q = -m.generator(k)(s, s);
      const double r = m.instrumental_block(k)(s);
      rep.r_max = std::max(rep.r_max, r);
      const double ratio = r > 0.0 ? q / r : (q > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      worst_ratio = std::max(worst_ratio, ratio);
      const double limit = opts.eta ? 1.0 - *opts.eta : 1.0;
      const bool bad = opts.eta ? ratio > limit + 1e-12 : ratio >= 1.0;
      if (bad) {
        std::ostringstream msg;
        msg << "Q(t;s)/R(t;s) = " << ratio << " exceeds 1 - eta = " << limit;
        rep.violations.push_back({Assumption::kEta, "", m.block_start(k), s, msg.str()});
      }
      if (r > opts.r_max_cap) {
        std::ostringstream msg;
        msg << "R(t;s) = " << r << " exceeds r_max = " << opts.r_max_cap;
        rep.violations.push_back({Assumption::kRmax, "", m.block_start(k), s, msg.str()});
      }
    }
  }
  rep.eta = opts.eta ? *opts.eta : 1.0 - worst_ratio;
  if (opts.eta && !(*opts.eta > 0.0 && *opts.eta < 1.0))
    rep.violations.push_back({Assumption::kEta, "", std::nullopt, std::nullopt,
                              "declared eta must lie in (0, 1)"});
  return rep;
}

double path_log_density(const IntensityModel& m, const Trajectory& x) {
  double lp = safe_log(m.nu()(x.states().front()));
  for (std::size_t i = 0; i < x.segment_count(); ++i) {
    const State s = x.states()[i];
    lp -= m.leave_rate_fn(s).integral(x.segment_start(i), x.segment_end(i));
    if (i + 1 < x.segment_count()) {
      const double t = x.jump_times()[i];
      lp += safe_log(m.rate(t, s, x.states()[i + 1]));
    }
  }
  return lp;
}

}  // namespace jumpchain
