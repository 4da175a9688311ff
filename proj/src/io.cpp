#include "jumpchain/io.hpp"

#include <fstream>

namespace jumpchain {

namespace {

const Json& field(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw FormatError(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& ctx) {
  if (j.is_null()) return kLogZero;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return kLogZero;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw FormatError(ctx + ": expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw FormatError(ctx + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw FormatError(ctx + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

Vector vec(const Json& j, const std::string& ctx) {
  const auto v = numbers(j, ctx);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix mat(const Json& j, std::size_t n, const std::string& ctx) {
  if (!j.is_array() || j.size() != n) throw FormatError(ctx + ": expected " + std::to_string(n) + " rows");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = numbers(j[r], ctx + "[" + std::to_string(r) + "]");
    if (row.size() != n) throw FormatError(ctx + "[" + std::to_string(r) + "]: expected " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = r == c ? 0.0 : row[c];
  }
  return m;
}

StateSpace state_space(const Json& j, const std::string& ctx) {
  if (j.is_number_integer()) {
    if (j.get<long long>() <= 0) throw FormatError(ctx + ": state count must be positive");
    return StateSpace::indexed(j.get<std::size_t>());
  }
  if (!j.is_array()) throw FormatError(ctx + ": expected a list of labels or a count");
  std::vector<std::string> labels;
  for (const auto& x : j) {
    if (!x.is_string()) throw FormatError(ctx + ": labels must be strings");
    labels.push_back(x.get<std::string>());
  }
  return StateSpace(std::move(labels));
}

TheoryBounds bounds_of(const Json& j, const std::string& ctx) {
  TheoryBounds b;
  if (j.contains("eta")) b.eta = number(j["eta"], ctx + ".eta");
  if (j.contains("r_max")) b.r_max = number(j["r_max"], ctx + ".r_max");
  return b;
}

template <class F>
auto wrap(const std::string& ctx, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(ctx + ": " + e.what());
  }
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ModelFile parse_model(const Json& j) {
  return wrap("model", [&] {
    const std::string ctx = "model";
    StateSpace states = state_space(field(j, "states", ctx), ctx + ".states");
    const std::size_t n = states.size();
    Vector nu = vec(field(j, "nu", ctx), ctx + ".nu");
    const double tmin = number(field(j, "tmin", ctx), ctx + ".tmin");
    const double tmax = number(field(j, "tmax", ctx), ctx + ".tmax");
    std::vector<double> bps;
    if (j.contains("breakpoints")) bps = numbers(j["breakpoints"], ctx + ".breakpoints");
    std::vector<Matrix> q;
    const Json& qj = field(j, "Q_blocks", ctx);
    if (!qj.is_array()) throw FormatError(ctx + ".Q_blocks: expected an array");
    for (std::size_t k = 0; k < qj.size(); ++k) q.push_back(mat(qj[k], n, ctx + ".Q_blocks[" + std::to_string(k) + "]"));
    TheoryBounds b = bounds_of(j, ctx);
    if (!j.contains("R_blocks"))
      return ModelFile{IntensityModel::with_default_r(std::move(states), std::move(nu), tmin, tmax,
                                                      std::move(bps), std::move(q)),
                       b};
    std::vector<Vector> r;
    const Json& rj = j["R_blocks"];
    if (!rj.is_array()) throw FormatError(ctx + ".R_blocks: expected an array");
    for (std::size_t k = 0; k < rj.size(); ++k) r.push_back(vec(rj[k], ctx + ".R_blocks[" + std::to_string(k) + "]"));
    return ModelFile{IntensityModel(std::move(states), std::move(nu), tmin, tmax, std::move(bps),
                                    std::move(q), std::move(r)),
                     b};
  });
}

ModelFile load_model(const std::filesystem::path& path) {
  try {
    return parse_model(read_json(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Evidence parse_evidence(const Json& j, std::size_t n_states) {
  return wrap("evidence", [&] {
    const std::string ctx = "evidence";
    std::vector<double> times = numbers(field(j, "obs_times", ctx), ctx + ".obs_times");
    std::vector<Vector> ll;
    if (j.contains("loglik_tables")) {
      const Json& t = j["loglik_tables"];
      if (!t.is_array()) throw FormatError(ctx + ".loglik_tables: expected an array");
      for (std::size_t i = 0; i < t.size(); ++i) ll.push_back(vec(t[i], ctx + ".loglik_tables[" + std::to_string(i) + "]"));
    } else {
      const EmissionFile f = *parse_emission_file(j, n_states);
      ll = make_evidence(f.spec, f.observations).log_lik_tables();
    }
    if (ll.size() != times.size()) throw FormatError(ctx + ": need one table per observation time");
    for (std::size_t i = 0; i < ll.size(); ++i)
      if (static_cast<std::size_t>(ll[i].size()) != n_states)
        throw FormatError(ctx + ": table " + std::to_string(i) + " has the wrong length");
    return Evidence(std::move(times), std::move(ll));
  });
}

std::optional<EmissionFile> parse_emission_file(const Json& j, std::size_t n_states) {
  return wrap("evidence", [&]() -> std::optional<EmissionFile> {
    const std::string ctx = "evidence";
    if (j.contains("loglik_tables")) return std::nullopt;
    EmissionFile f;
    f.spec.times = numbers(field(j, "obs_times", ctx), ctx + ".obs_times");
    const Json& em = field(j, "emission", ctx);
    const Json& obs = field(j, "observations", ctx);
    if (!em.is_array() || em.size() != n_states)
      throw FormatError(ctx + ".emission: expected one row per state");
    std::size_t symbols = 0;
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < n_states; ++s) {
      rows.push_back(numbers(em[s], ctx + ".emission[" + std::to_string(s) + "]"));
      if (s > 0 && rows[s].size() != symbols) throw FormatError(ctx + ".emission: rows differ in length");
      symbols = rows[s].size();
    }
    f.spec.emission.resize(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(symbols));
    for (std::size_t s = 0; s < n_states; ++s) {
      double total = 0.0;
      for (std::size_t y = 0; y < symbols; ++y) {
        if (!(rows[s][y] >= 0.0)) throw FormatError(ctx + ".emission: probabilities must be nonnegative");
        f.spec.emission(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(y)) = rows[s][y];
        total += rows[s][y];
      }
      if (std::abs(total - 1.0) > 1e-9) throw FormatError(ctx + ".emission: rows must sum to 1");
    }
    if (!obs.is_array() || obs.size() != f.spec.times.size())
      throw FormatError(ctx + ".observations: need one symbol per observation time");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (!obs[i].is_number_unsigned() || obs[i].get<std::size_t>() >= symbols)
        throw FormatError(ctx + ".observations[" + std::to_string(i) + "]: unknown symbol");
      f.observations.push_back(obs[i].get<std::size_t>());
    }
    return f;
  });
}

Evidence load_evidence(const std::filesystem::path& path, std::size_t n_states) {
  try {
    return parse_evidence(read_json(path), n_states);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

CtbnModelFile parse_ctbn_model(const Json& j) {
  return wrap("network", [&] {
    const std::string ctx = "network";
    const double tmin = number(field(j, "tmin", ctx), ctx + ".tmin");
    const double tmax = number(field(j, "tmax", ctx), ctx + ".tmax");
    const Json& nj = field(j, "nodes", ctx);
    if (!nj.is_array() || nj.empty()) throw FormatError(ctx + ".nodes: expected a nonempty array");

    std::map<std::string, std::size_t> index;
    for (std::size_t w = 0; w < nj.size(); ++w) {
      const Json& name = field(nj[w], "name", ctx + ".nodes[" + std::to_string(w) + "]");
      if (!name.is_string()) throw FormatError(ctx + ".nodes[" + std::to_string(w) + "].name: expected a string");
      index.emplace(name.get<std::string>(), w);
    }
    std::vector<CtbnNode> nodes;
    for (std::size_t w = 0; w < nj.size(); ++w) {
      const Json& x = nj[w];
      CtbnNode node;
      node.name = x["name"].get<std::string>();
      const std::string nctx = ctx + ".nodes[" + node.name + "]";
      node.states = state_space(field(x, "states", nctx), nctx + ".states");
      if (x.contains("parents")) {
        for (const auto& p : x["parents"]) {
          const auto it = index.find(p.get<std::string>());
          if (it == index.end()) throw FormatError(nctx + ".parents: unknown node '" + p.get<std::string>() + "'");
          node.parents.push_back(it->second);
        }
      }
      const std::size_t n = node.states.size();
      const Json& cims = field(x, "cim_table", nctx);
      if (!cims.is_array()) throw FormatError(nctx + ".cim_table: expected an array");
      for (std::size_t c = 0; c < cims.size(); ++c) node.cims.push_back(mat(cims[c], n, nctx + ".cim_table[" + std::to_string(c) + "]"));
      if (x.contains("R")) {
        const Json& r = x["R"];
        if (r.is_array()) {
          const auto v = numbers(r, nctx + ".R");
          if (v.size() != n) throw FormatError(nctx + ".R: expected one rate per state");
          for (double rv : v) node.instrumental.push_back(RateFunction::constant(tmin, rv));
        } else {
          std::vector<double> edges{tmin};
          if (r.contains("breakpoints")) {
            const auto b = numbers(r["breakpoints"], nctx + ".R.breakpoints");
            edges.insert(edges.end(), b.begin(), b.end());
          }
          const Json& vals = field(r, "values", nctx + ".R");
          if (!vals.is_array() || vals.size() != edges.size())
            throw FormatError(nctx + ".R.values: expected one row per piece");
          std::vector<std::vector<double>> per_state(n);
          for (std::size_t k = 0; k < vals.size(); ++k) {
            const auto row = numbers(vals[k], nctx + ".R.values[" + std::to_string(k) + "]");
            if (row.size() != n) throw FormatError(nctx + ".R.values: expected one rate per state");
            for (std::size_t s = 0; s < n; ++s) per_state[s].push_back(row[s]);
          }
          for (std::size_t s = 0; s < n; ++s) node.instrumental.emplace_back(edges, per_state[s]);
        }
      }
      nodes.push_back(std::move(node));
    }

    CtbnInitialLaw nu;
    const Json& nuj = field(j, "nu", ctx);
    if (!nuj.is_array() || nuj.empty()) throw FormatError(ctx + ".nu: expected an array");
    if (nuj[0].is_array()) {
      for (std::size_t w = 0; w < nuj.size(); ++w) nu.factored.push_back(vec(nuj[w], ctx + ".nu[" + std::to_string(w) + "]"));
    } else {
      nu.tabular = vec(nuj, ctx + ".nu");
    }
    double factor = kDefaultRFactor;
    if (j.contains("default_r_factor")) factor = number(j["default_r_factor"], ctx + ".default_r_factor");
    return CtbnModelFile{CtbnModel(std::move(nodes), std::move(nu), tmin, tmax, factor), bounds_of(j, ctx)};
  });
}

CtbnModelFile load_ctbn_model(const std::filesystem::path& path) {
  try {
    return parse_ctbn_model(read_json(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::map<std::size_t, Trajectory> parse_observed(const Json& j, const CtbnModel& model) {
  return wrap("observed", [&] {
    if (!j.is_array()) throw FormatError("observed: expected an array");
    std::map<std::size_t, Trajectory> out;
    for (const auto& x : j) {
      const std::size_t w = model.index_of(field(x, "node", "observed").get<std::string>());
      const std::string ctx = "observed[" + model.node(w).name + "]";
      std::vector<double> jumps = numbers(field(x, "jump_times", ctx), ctx + ".jump_times");
      std::vector<State> states;
      for (const auto& s : field(x, "states", ctx)) {
        if (s.is_number_integer()) states.push_back(s.get<State>());
        else states.push_back(model.node(w).states.index_of(s.get<std::string>()));
      }
      if (!out.emplace(w, Trajectory(model.tmin(), model.tmax(), std::move(jumps), std::move(states))).second)
        throw FormatError(ctx + ": node listed twice");
    }
    return out;
  });
}

std::map<std::size_t, Trajectory> load_observed(const std::filesystem::path& path,
                                                const CtbnModel& model) {
  try {
    return parse_observed(read_json(path), model);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::map<std::size_t, Evidence> parse_node_evidence(const Json& j, const CtbnModel& model) {
  if (!j.is_object()) throw FormatError("node evidence: expected an object keyed by node name");
  std::map<std::size_t, Evidence> out;
  for (const auto& [name, e] : j.items()) {
    const std::size_t w = model.index_of(name);
    out.emplace(w, parse_evidence(e, model.node(w).states.size()));
  }
  return out;
}

Json to_json(const Trajectory& x, const StateSpace& states) {
  Json labels = Json::array();
  for (State s : x.states()) labels.push_back(states.label(s));
  return Json{{"tmin", x.tmin()}, {"tmax", x.tmax()}, {"jump_times", x.jump_times()}, {"states", labels}};
}

Json to_json(const ValidationReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) {
    Json e{{"assumption", to_string(x.assumption)}, {"message", x.message}};
    if (!x.where.empty()) e["node"] = x.where;
    if (x.time) e["time"] = *x.time;
    if (x.state) e["state"] = *x.state;
    v.push_back(std::move(e));
  }
  return Json{{"ok", r.ok()},
              {"violations", v},
              {"q_min_irreducible", r.q_min_irreducible},
              {"q_min_rate", r.q_min_rate},
              {"r_max", r.r_max},
              {"eta", r.eta},
              {"warnings", r.warnings}};
}

}  // namespace jumpchain
