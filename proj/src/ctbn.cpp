#include "jumpchain/ctbn.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "jumpchain/thinning.hpp"

namespace jumpchain {

namespace {

Matrix normalize_cim(const Matrix& q, std::size_t n, const std::string& node) {
  if (static_cast<std::size_t>(q.rows()) != n || static_cast<std::size_t>(q.cols()) != n)
    throw ModelError("CIM of node '" + node + "' has the wrong shape");
  Matrix out = q;
  for (std::size_t s = 0; s < n; ++s) {
    double leave = 0.0;
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      if (s2 == s) continue;
      if (!std::isfinite(q(s, s2)) || q(s, s2) < 0.0)
        throw ModelError("CIM of node '" + node + "' has a negative or non-finite rate");
      leave += q(s, s2);
    }
    out(s, s) = -leave;
  }
  return out;
}

void check_law(const Vector& p, std::size_t n, const std::string& what) {
  if (static_cast<std::size_t>(p.size()) != n) throw ModelError(what + " has the wrong length");
  for (double v : p)
    if (!std::isfinite(v) || v < 0.0) throw ModelError(what + " has a negative entry");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw ModelError(what + " must sum to 1");
}

// Sorted distinct jump times of the given nodes, strictly inside (tmin, tmax).
std::vector<double> merged_jumps(const CtbnPath& path, std::span<const std::size_t> nodes) {
  std::vector<double> out;
  for (std::size_t u : nodes)
    out.insert(out.end(), path[u].jump_times().begin(), path[u].jump_times().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<State> states_at(const CtbnPath& path, double t) {
  std::vector<State> out(path.size());
  for (std::size_t u = 0; u < path.size(); ++u) out[u] = evaluate(path[u], t);
  return out;
}

std::size_t config_at(const CtbnModel& model, const CtbnPath& path, std::size_t w, double t) {
  const auto& pa = model.node(w).parents;
  std::size_t c = 0;
  for (std::size_t k = 0; k < pa.size(); ++k) c += evaluate(path[pa[k]], t) * model.parent_stride(w, k);
  return c;
}

std::size_t segment_of(std::span<const double> times, double t) {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
}

}  // namespace

CtbnModel::CtbnModel(std::vector<CtbnNode> nodes, CtbnInitialLaw nu, double tmin, double tmax,
                     double default_r_factor)
    : nodes_(std::move(nodes)), nu_(std::move(nu)), tmin_(tmin), tmax_(tmax) {
  if (nodes_.empty()) throw ModelError("network has no nodes");
  if (!std::isfinite(tmin_) || !std::isfinite(tmax_) || !(tmin_ < tmax_))
    throw ModelError("network interval must satisfy tmin < tmax");
  std::set<std::string> names;
  const std::size_t n_nodes = nodes_.size();
  children_.resize(n_nodes);
  for (std::size_t w = 0; w < n_nodes; ++w) {
    auto& node = nodes_[w];
    if (!names.insert(node.name).second) throw ModelError("duplicate node name '" + node.name + "'");
    std::set<std::size_t> seen;
    std::size_t count = 1;
    std::vector<std::size_t> strides;
    for (std::size_t p : node.parents) {
      if (p >= n_nodes) throw ModelError("node '" + node.name + "' has an unknown parent");
      if (p == w) throw ModelError("node '" + node.name + "' lists itself as a parent");
      if (!seen.insert(p).second) throw ModelError("node '" + node.name + "' repeats a parent");
      children_[p].push_back(w);
      strides.push_back(count);
      count *= nodes_[p].states.size();
    }
    config_count_.push_back(count);
    parent_strides_.push_back(std::move(strides));
  }
  for (std::size_t w = 0; w < n_nodes; ++w) {
    auto& node = nodes_[w];
    const std::size_t n = node.states.size();
    if (node.cims.size() != config_count_[w])
      throw ModelError("node '" + node.name + "' needs one CIM per parent configuration");
    double q_top = 0.0;
    for (auto& q : node.cims) {
      q = normalize_cim(q, n, node.name);
      q_top = std::max(q_top, (-q.diagonal()).maxCoeff());
    }
    if (node.instrumental.empty()) {
      const double floor = q_top * kDefaultQFloorFraction;
      for (std::size_t s = 0; s < n; ++s) {
        double worst = 0.0;
        for (const auto& q : node.cims) worst = std::max(worst, -q(s, s));
        node.instrumental.push_back(RateFunction::constant(tmin_, default_r_factor * std::max(worst, floor)));
      }
    } else if (node.instrumental.size() != n) {
      throw ModelError("node '" + node.name + "' needs one instrumental rate per state");
    }
    for (const auto& r : node.instrumental)
      if (r.start() != tmin_) throw ModelError("instrumental rates must start at tmin");
  }
  if (nu_.tabular) {
    if (joint_size() > 1'000'000) throw ModelError("tabular initial law is too large");
    check_law(*nu_.tabular, joint_size(), "tabular initial law");
  } else {
    if (nu_.factored.size() != n_nodes) throw ModelError("need one initial marginal per node");
    for (std::size_t w = 0; w < n_nodes; ++w)
      check_law(nu_.factored[w], nodes_[w].states.size(), "initial law of '" + nodes_[w].name + "'");
  }
}

std::size_t CtbnModel::index_of(const std::string& name) const {
  for (std::size_t w = 0; w < nodes_.size(); ++w)
    if (nodes_[w].name == name) return w;
  throw ModelError("unknown node '" + name + "'");
}

std::size_t CtbnModel::parent_config(std::size_t w, std::span<const State> joint) const {
  std::size_t c = 0;
  const auto& pa = nodes_[w].parents;
  for (std::size_t k = 0; k < pa.size(); ++k) c += joint[pa[k]] * parent_strides_[w][k];
  return c;
}

std::size_t CtbnModel::joint_size() const {
  std::size_t total = 1;
  for (const auto& n : nodes_) {
    const std::size_t k = n.states.size();
    if (total > std::numeric_limits<std::size_t>::max() / k) return std::numeric_limits<std::size_t>::max();
    total *= k;
  }
  return total;
}

std::size_t CtbnModel::encode_joint(std::span<const State> joint) const {
  std::size_t idx = 0, stride = 1;
  for (std::size_t w = 0; w < nodes_.size(); ++w) {
    idx += joint[w] * stride;
    stride *= nodes_[w].states.size();
  }
  return idx;
}

std::vector<State> CtbnModel::decode_joint(std::size_t index) const {
  std::vector<State> out(nodes_.size());
  for (std::size_t w = 0; w < nodes_.size(); ++w) {
    const std::size_t k = nodes_[w].states.size();
    out[w] = index % k;
    index /= k;
  }
  return out;
}

double CtbnModel::initial_log_prob(std::span<const State> joint) const {
  if (nu_.tabular) return safe_log((*nu_.tabular)(static_cast<Eigen::Index>(encode_joint(joint))));
  double lp = 0.0;
  for (std::size_t w = 0; w < nodes_.size(); ++w) lp += safe_log(nu_.factored[w](static_cast<Eigen::Index>(joint[w])));
  return lp;
}

Vector CtbnModel::initial_conditional(std::size_t w, std::span<const State> joint) const {
  if (!nu_.tabular) return nu_.factored[w];
  const std::size_t n = nodes_[w].states.size();
  std::vector<State> x(joint.begin(), joint.end());
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    x[w] = s;
    out(static_cast<Eigen::Index>(s)) = (*nu_.tabular)(static_cast<Eigen::Index>(encode_joint(x)));
  }
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

void check_path(const CtbnModel& model, const CtbnPath& path) {
  if (path.size() != model.size()) throw ModelError("path needs one trajectory per node");
  for (std::size_t w = 0; w < path.size(); ++w) {
    if (path[w].tmin() != model.tmin() || path[w].tmax() != model.tmax())
      throw ModelError("trajectory of node '" + model.node(w).name + "' has the wrong interval");
    for (State s : path[w].states())
      if (s >= model.node(w).states.size())
        throw ModelError("trajectory of node '" + model.node(w).name + "' has an invalid state");
  }
}

std::vector<double> simultaneous_parent_jumps(const CtbnModel& model, const CtbnPath& path,
                                              std::size_t w) {
  const std::vector<double> parent_times = merged_jumps(path, model.node(w).parents);
  std::vector<double> out;
  std::set_intersection(path[w].jump_times().begin(), path[w].jump_times().end(),
                        parent_times.begin(), parent_times.end(), std::back_inserter(out));
  return out;
}

SufficientStats sufficient_stats(const CtbnModel& model, const CtbnPath& path, std::size_t w) {
  const std::size_t n = model.node(w).states.size();
  const std::size_t configs = model.config_count(w);
  SufficientStats st;
  st.jumps.assign(configs, Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  st.occupancy.assign(configs, Vector::Zero(static_cast<Eigen::Index>(n)));

  std::vector<std::size_t> involved = model.node(w).parents;
  involved.push_back(w);
  const std::vector<double> times = merged_jumps(path, involved);

  double prev = model.tmin();
  std::size_t c = config_at(model, path, w, prev);
  State s = evaluate(path[w], prev);
  for (double t : times) {
    st.occupancy[c](static_cast<Eigen::Index>(s)) += t - prev;
    const std::size_t c2 = config_at(model, path, w, t);
    const State s2 = evaluate(path[w], t);
    if (s2 != s) st.jumps[c2](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) += 1.0;
    prev = t;
    c = c2;
    s = s2;
  }
  st.occupancy[c](static_cast<Eigen::Index>(s)) += model.tmax() - prev;
  return st;
}

double node_log_density(const CtbnModel& model, const CtbnPath& path, std::size_t w) {
  const SufficientStats st = sufficient_stats(model, path, w);
  const auto n = static_cast<Eigen::Index>(model.node(w).states.size());
  double lp = 0.0;
  for (std::size_t c = 0; c < model.config_count(w); ++c) {
    const Matrix& q = model.cim(w, c);
    for (Eigen::Index s = 0; s < n; ++s) {
      lp += q(s, s) * st.occupancy[c](s);
      for (Eigen::Index s2 = 0; s2 < n; ++s2)
        if (s2 != s && st.jumps[c](s, s2) > 0.0) lp += st.jumps[c](s, s2) * safe_log(q(s, s2));
    }
  }
  return lp;
}

double ctbn_log_density(const CtbnModel& model, const CtbnPath& path) {
  double lp = model.initial_log_prob(states_at(path, model.tmin()));
  for (std::size_t w = 0; w < model.size(); ++w) lp += node_log_density(model, path, w);
  return lp;
}

IntensityModel flatten(const CtbnModel& model, std::size_t cap) {
  const std::size_t total = model.joint_size();
  if (total > cap)
    throw ModelError("product space has " + std::to_string(total) + " states, above the cap of " +
                     std::to_string(cap));
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  std::vector<std::string> labels;
  Vector nu(static_cast<Eigen::Index>(total));
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::vector<State> x = model.decode_joint(idx);
    std::string label;
    std::size_t stride = 1;
    for (std::size_t w = 0; w < model.size(); ++w) {
      const auto& node = model.node(w);
      label += (w ? "," : "") + node.states.label(x[w]);
      const Matrix& cim = model.cim(w, model.parent_config(w, x));
      for (State s2 = 0; s2 < node.states.size(); ++s2) {
        if (s2 == x[w]) continue;
        const std::size_t idx2 = idx + s2 * stride - x[w] * stride;
        q(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx2)) =
            cim(static_cast<Eigen::Index>(x[w]), static_cast<Eigen::Index>(s2));
      }
      stride *= node.states.size();
    }
    labels.push_back(std::move(label));
    nu(static_cast<Eigen::Index>(idx)) = std::exp(model.initial_log_prob(x));
  }
  nu /= nu.sum();
  return IntensityModel::with_default_r(StateSpace(std::move(labels)), std::move(nu), model.tmin(),
                                        model.tmax(), {}, {q});
}

Trajectory flatten_path(const CtbnModel& model, const CtbnPath& path) {
  check_path(model, path);
  std::vector<std::size_t> all(model.size());
  for (std::size_t w = 0; w < all.size(); ++w) all[w] = w;
  std::vector<double> jumps;
  std::vector<State> states{model.encode_joint(states_at(path, model.tmin()))};
  for (double t : merged_jumps(path, all)) {
    const State s = model.encode_joint(states_at(path, t));
    if (s == states.back()) continue;
    jumps.push_back(t);
    states.push_back(s);
  }
  return Trajectory(model.tmin(), model.tmax(), std::move(jumps), std::move(states));
}

ValidationReport ctbn_validate(const CtbnModel& model, const CtbnValidationOptions& opts) {
  ValidationReport rep;
  double worst_ratio = 0.0;
  bool all_irreducible = true;
  rep.q_min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < model.size(); ++w) {
    const auto& node = model.node(w);
    const std::size_t n = node.states.size();
    const bool observed = w < opts.observed.size() && opts.observed[w];
    if (n < 2)
      rep.violations.push_back({Assumption::kStructure, node.name, std::nullopt, std::nullopt,
                                "node needs at least 2 states"});

    // Support must not depend on the parent configuration (all nodes).
    for (std::size_t c = 1; c < model.config_count(w); ++c) {
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t s2 = 0; s2 < n; ++s2) {
          if (s == s2) continue;
          const bool a = model.cim(w, 0)(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) > 0.0;
          const bool b = model.cim(w, c)(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) > 0.0;
          if (a != b) {
            std::ostringstream msg;
            msg << "support of Q(c; " << node.states.label(s) << ", " << node.states.label(s2)
                << ") differs between parent configurations 0 and " << c;
            rep.violations.push_back({Assumption::kSupport, node.name, std::nullopt, s, msg.str()});
          }
        }
      }
    }
    if (observed) continue;

    const Matrix qmin = entrywise_min(node.cims);
    rep.q_min_rate = std::min(rep.q_min_rate, (-qmin.diagonal()).minCoeff());
    if (!is_irreducible(qmin)) {
      all_irreducible = false;
      rep.violations.push_back({Assumption::kIrreducibleQmin, node.name, std::nullopt, std::nullopt,
                                "Q_min of the node is not irreducible"});
    }
    const double limit = opts.eta ? 1.0 - *opts.eta : 1.0;
    for (std::size_t s = 0; s < n; ++s) {
      const RateFunction& r = node.instrumental[s];
      double q_worst = 0.0;
      for (const auto& q : node.cims) q_worst = std::max(q_worst, -q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)));
      for (std::size_t k = 0; k < r.piece_count(); ++k) {
        if (r.edges()[k] >= model.tmax()) break;
        const double rv = r.values()[k];
        rep.r_max = std::max(rep.r_max, rv);
        const double ratio = rv > 0.0 ? q_worst / rv : (q_worst > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        worst_ratio = std::max(worst_ratio, ratio);
        if (opts.eta ? ratio > limit + 1e-12 : ratio >= 1.0) {
          std::ostringstream msg;
          msg << "max_c Q(c; s)/R(t; s) = " << ratio << " exceeds 1 - eta = " << limit;
          rep.violations.push_back({Assumption::kEta, node.name, r.edges()[k], s, msg.str()});
        }
        if (rv > opts.r_max_cap) {
          std::ostringstream msg;
          msg << "R(t; s) = " << rv << " exceeds r_max = " << opts.r_max_cap;
          rep.violations.push_back({Assumption::kRmax, node.name, r.edges()[k], s, msg.str()});
        }
      }
    }
  }
  rep.q_min_irreducible = all_irreducible;
  if (!std::isfinite(rep.q_min_rate)) rep.q_min_rate = 0.0;
  rep.eta = opts.eta ? *opts.eta : 1.0 - worst_ratio;
  if (opts.eta && !(*opts.eta > 0.0 && *opts.eta < 1.0))
    rep.violations.push_back({Assumption::kEta, "", std::nullopt, std::nullopt,
                              "declared eta must lie in (0, 1)"});
  return rep;
}

SkeletonHmm node_full_conditional_hmm(const CtbnModel& model, const CtbnPath& path,
                                      std::size_t w, std::span<const double> times,
                                      const Evidence* noisy) {
  if (times.empty() || times.front() != model.tmin())
    throw ModelError("event times must start at tmin");
  const auto& node = model.node(w);
  const std::size_t n = node.states.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const std::size_t steps = times.size();

  SkeletonHmm h;
  h.initial = model.initial_conditional(w, states_at(path, model.tmin()));
  h.log_potentials.assign(steps, Vector::Zero(ni));
  h.transitions.reserve(steps - 1);

  // Prior part of the potentials and the thinning matrices.
  Vector r_at(ni);
  for (std::size_t i = 0; i < steps; ++i) {
    const double lo = times[i];
    const bool last = i + 1 == steps;
    const double hi = last ? model.tmax() : times[i + 1];
    Vector& g = h.log_potentials[i];
    for (std::size_t s = 0; s < n; ++s) {
      const RateFunction& r = node.instrumental[s];
      g(static_cast<Eigen::Index>(s)) = -r.integral(lo, hi);
      if (!last) {
        r_at(static_cast<Eigen::Index>(s)) = r(hi);
        g(static_cast<Eigen::Index>(s)) += safe_log(r_at(static_cast<Eigen::Index>(s)));
      }
    }
    if (!last) h.transitions.push_back(thinning_matrix(model.cim(w, config_at(model, path, w, hi)), r_at));
  }

  // Each child's path density with X_w replaced by s on each segment.
  for (std::size_t u : model.children(w)) {
    const auto& pa = model.node(u).parents;
    const auto pos = static_cast<std::size_t>(std::find(pa.begin(), pa.end(), w) - pa.begin());
    const std::size_t w_stride = model.parent_stride(u, pos);
    auto base_config = [&](double t) {
      std::size_t c = 0;
      for (std::size_t k = 0; k < pa.size(); ++k)
        if (k != pos) c += evaluate(path[pa[k]], t) * model.parent_stride(u, k);
      return c;
    };

    std::vector<std::size_t> others{u};
    for (std::size_t k = 0; k < pa.size(); ++k)
      if (k != pos) others.push_back(pa[k]);
    std::vector<double> cuts = merged_jumps(path, others);
    cuts.insert(cuts.end(), times.begin(), times.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double a = cuts[k];
      const double b = k + 1 < cuts.size() ? cuts[k + 1] : model.tmax();
      Vector& g = h.log_potentials[segment_of(times, a)];
      const auto xu = static_cast<Eigen::Index>(evaluate(path[u], a));
      const std::size_t base = base_config(a);
      for (std::size_t s = 0; s < n; ++s)
        g(static_cast<Eigen::Index>(s)) += model.cim(u, base + s * w_stride)(xu, xu) * (b - a);
    }
    const Trajectory& xu = path[u];
    for (std::size_t k = 0; k < xu.jump_times().size(); ++k) {
      const double t = xu.jump_times()[k];
      Vector& g = h.log_potentials[segment_of(times, t)];
      const auto from = static_cast<Eigen::Index>(xu.states()[k]);
      const auto to = static_cast<Eigen::Index>(xu.states()[k + 1]);
      const std::size_t base = base_config(t);
      for (std::size_t s = 0; s < n; ++s)
        g(static_cast<Eigen::Index>(s)) += safe_log(model.cim(u, base + s * w_stride)(from, to));
    }
  }

  if (noisy) {
    noisy->check_compatible(model.tmin(), model.tmax(), n);
    for (std::size_t j = 0; j < noisy->size(); ++j)
      h.log_potentials[segment_of(times, noisy->obs_times()[j])] += noisy->log_lik(j);
  }
  return h;
}

std::vector<double> resample_node_virtual(const CtbnModel& model, const CtbnPath& path,
                                          std::size_t w, Rng& rng) {
  const auto& node = model.node(w);
  std::vector<std::size_t> involved = node.parents;
  involved.push_back(w);
  std::vector<double> cuts = merged_jumps(path, involved);
  cuts.push_back(model.tmin());
  for (const auto& r : node.instrumental)
    for (double e : r.edges())
      if (e > model.tmin() && e < model.tmax()) cuts.push_back(e);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<VirtualPoint> v;
  std::vector<double> scratch;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = k + 1 < cuts.size() ? cuts[k + 1] : model.tmax();
    const State s = evaluate(path[w], a);
    const auto si = static_cast<Eigen::Index>(s);
    const double rate = node.instrumental[s](a) + model.cim(w, config_at(model, path, w, a))(si, si);
    scratch.clear();
    append_poisson_points(std::max(rate, 0.0), a, b, rng, scratch);
    for (double t : scratch) v.push_back({t, a, b});
  }
  std::vector<double> fixed{model.tmin()};
  fixed.insert(fixed.end(), path[w].jump_times().begin(), path[w].jump_times().end());
  return merge_with_virtual(fixed, std::move(v), kTieTolerance * (model.tmax() - model.tmin()), rng);
}

Trajectory node_update(const CtbnModel& model, const CtbnPath& path, std::size_t w,
                       const Evidence* noisy, Rng& rng) {
  const std::vector<double> times = resample_node_virtual(model, path, w, rng);
  const SkeletonHmm h = node_full_conditional_hmm(model, path, w, times, noisy);
  const FilterResult f = forward_filter(h);
  return skeleton_to_trajectory(model.tmin(), model.tmax(), times, backward_sample(h, f, rng));
}

CtbnPath gibbs_step(const CtbnModel& model, const CtbnEvidence& evid, const CtbnPath& path,
                    std::span<const double> scan_weights, Rng& rng) {
  std::vector<std::size_t> free_nodes;
  for (std::size_t w = 0; w < model.size(); ++w)
    if (!evid.is_observed(w)) free_nodes.push_back(w);
  if (free_nodes.empty()) return path;
  Vector weights(static_cast<Eigen::Index>(free_nodes.size()));
  for (std::size_t k = 0; k < free_nodes.size(); ++k) {
    const double wt = scan_weights.empty() ? 1.0 : scan_weights[free_nodes[k]];
    if (!(wt > 0.0)) throw ModelError("scan weights must be positive on unobserved nodes");
    weights(static_cast<Eigen::Index>(k)) = wt;
  }
  const std::size_t w = free_nodes[sample_categorical(weights, rng)];
  auto it = evid.noisy.find(w);
  CtbnPath out = path;
  out[w] = node_update(model, path, w, it == evid.noisy.end() ? nullptr : &it->second, rng);
  return out;
}

std::size_t total_jump_count(const CtbnPath& path, const CtbnEvidence& evid) {
  std::size_t total = 0;
  for (std::size_t w = 0; w < path.size(); ++w)
    if (!evid.is_observed(w)) total += jump_count(path[w]);
  return total;
}

std::vector<const CtbnSweepRecord*> CtbnChainTrace::retained() const {
  std::vector<const CtbnSweepRecord*> out;
  const std::size_t step = std::max<std::size_t>(thin, 1);
  for (const auto& r : records)
    if (r.sweep >= burnin && (r.sweep - burnin) % step == 0) out.push_back(&r);
  return out;
}

CtbnPath default_initial_path(const CtbnModel& model,
                              const std::map<std::size_t, Trajectory>& observed) {
  CtbnPath path;
  std::vector<State> guess(model.size(), 0);
  for (std::size_t w = 0; w < model.size(); ++w) {
    auto it = observed.find(w);
    if (it != observed.end()) {
      path.push_back(it->second);
      guess[w] = evaluate(it->second, model.tmin());
      continue;
    }
    Eigen::Index best = 0;
    if (!model.initial_law().tabular) model.initial_law().factored[w].maxCoeff(&best);
    path.push_back(Trajectory::constant(model.tmin(), model.tmax(), static_cast<State>(best)));
    guess[w] = static_cast<State>(best);
  }
  if (model.initial_law().tabular) {
    // Most probable joint initial state consistent with the observed nodes.
    double best_p = -1.0;
    for (std::size_t idx = 0; idx < model.joint_size(); ++idx) {
      const std::vector<State> x = model.decode_joint(idx);
      bool ok = true;
      for (const auto& [w, traj] : observed) ok = ok && x[w] == guess[w];
      const double p = (*model.initial_law().tabular)(static_cast<Eigen::Index>(idx));
      if (ok && p > best_p) {
        best_p = p;
        for (std::size_t w = 0; w < model.size(); ++w)
          if (!observed.count(w)) path[w] = Trajectory::constant(model.tmin(), model.tmax(), x[w]);
      }
    }
  }
  check_path(model, path);
  return path;
}

CtbnChainTrace run_ctbn_chain(const CtbnModel& model, const CtbnEvidence& evid,
                              const CtbnPath& init, const ChainOptions& opts,
                              std::span<const double> scan_weights, Rng& rng) {
  if (opts.sweeps > 0 && opts.burnin >= opts.sweeps)
    throw ModelError("burn-in must be smaller than the number of sweeps");
  check_path(model, init);
  CtbnChainTrace trace;
  trace.burnin = opts.burnin;
  trace.thin = std::max<std::size_t>(opts.thin, 1);
  for (std::size_t w = 0; w < model.size(); ++w)
    if (!evid.is_observed(w)) trace.unobserved.push_back(w);
  trace.records.reserve(opts.sweeps);

  CtbnPath x = init;
  for (std::size_t sweep = 0; sweep < opts.sweeps; ++sweep) {
    x = gibbs_step(model, evid, x, scan_weights, rng);
    CtbnSweepRecord rec;
    rec.sweep = sweep;
    rec.jump_count = total_jump_count(x, evid);
    rec.log_density = ctbn_log_density(model, x);
    for (const auto& [w, e] : evid.noisy) rec.log_density += e.log_likelihood(x[w]);
    for (std::size_t w : trace.unobserved) {
      std::vector<State> ps;
      for (double t : opts.probes) ps.push_back(evaluate(x[w], t));
      rec.probe_states.push_back(std::move(ps));
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

std::vector<CtbnChainTrace> run_ctbn_chains(const CtbnModel& model, const CtbnEvidence& evid,
                                            const CtbnPath& init, const ChainOptions& opts,
                                            std::span<const double> scan_weights,
                                            std::uint64_t seed, std::size_t chains,
                                            std::size_t workers) {
  std::vector<CtbnChainTrace> out(chains);
  parallel_for(chains, workers, [&](std::size_t c) {
    Rng rng = make_stream(seed, c);
    out[c] = run_ctbn_chain(model, evid, init, opts, scan_weights, rng);
  });
  return out;
}

}  // namespace jumpchain
