#include "jumpchain/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "jumpchain/diagnostics.hpp"
#include "jumpchain/io.hpp"
#include "jumpchain/oracle.hpp"
#include "jumpchain/thinning.hpp"

namespace jumpchain {

namespace fs = std::filesystem;

namespace {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string flag, const std::string& what)
      : std::runtime_error(flag + ": " + what), flag_(std::move(flag)) {}
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a(bytes));
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("JUMPCHAIN_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
      throw ConfigError("JUMPCHAIN_THREADS", "must be a positive integer");
    n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(jobs, 1));
}

// Files are written into a hidden sibling directory that replaces the target
// on commit, so a failed run never leaves a partial output directory.
class OutputDir {
 public:
  explicit OutputDir(const std::string& target) {
    target_ = fs::path(target).lexically_normal();
    if (target_.filename().empty()) target_ = target_.parent_path();
    if (target_.empty()) throw ConfigError("--out", "empty output path");
    if (fs::exists(target_)) {
      if (!fs::is_directory(target_)) throw ConfigError("--out", target_.string() + " exists and is not a directory");
      if (!fs::is_empty(target_) && !fs::exists(target_ / "manifest.json"))
        throw ConfigError("--out", target_.string() + " is not empty and holds no manifest.json; refusing to replace it");
    }
    fs::path parent = target_.parent_path();
    if (parent.empty()) parent = ".";
    fs::create_directories(parent);
    tmp_ = parent / ("." + target_.filename().string() + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(tmp_);
    fs::create_directory(tmp_);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;
  ~OutputDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(tmp_, ec);
    }
  }

  fs::path file(const std::string& name) const { return tmp_ / name; }

  void commit() {
    if (fs::exists(target_)) fs::remove_all(target_);
    fs::rename(tmp_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path tmp_;
  bool committed_ = false;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

void write_manifest(const OutputDir& out, const std::string& subcommand, Json config,
                    std::optional<std::uint64_t> seed) {
  const std::string canonical = config.dump();
  Json m{{"tool", "jumpchain"},
         {"version", kVersion},
         {"subcommand", subcommand},
         {"config", std::move(config)},
         {"config_hash", hex64(fnv1a(canonical))}};
  m["seed"] = seed ? Json(*seed) : Json(nullptr);
  write_json(out.file("manifest.json"), m);
}

Json input_entry(const std::string& path) {
  return path.empty() ? Json(nullptr) : Json{{"path", path}, {"fnv1a", file_hash(path)}};
}

std::vector<double> probe_times_or(const std::vector<double>& given, std::vector<double> fallback,
                                   double tmin, double tmax) {
  if (given.empty()) return fallback;
  for (double t : given)
    if (!(t >= tmin && t <= tmax)) throw ConfigError("--probes", "probe " + num(t) + " lies outside [tmin, tmax]");
  return given;
}

struct ChainFlags {
  std::string model;
  std::string evidence;
  std::size_t sweeps = 1000;
  std::optional<std::size_t> burnin;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::vector<double> probes;
  std::string out;
};

void add_chain_flags(CLI::App* sub, ChainFlags& f) {
  sub->add_option("--model", f.model, "model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--sweeps", f.sweeps, "number of sweeps")->capture_default_str();
  sub->add_option("--burnin", f.burnin, "burn-in sweeps (default: sweeps / 10)");
  sub->add_option("--thin", f.thin, "keep every thin-th sweep after burn-in")->capture_default_str();
  sub->add_option("--seed", f.seed, "RNG seed")->required();
  sub->add_option("--chains", f.chains, "independent chains")->capture_default_str();
  sub->add_option("--probes", f.probes, "probe times")->delimiter(',');
  sub->add_option("--out", f.out, "output directory")->required();
}

ChainOptions chain_options(const ChainFlags& f, std::vector<double> probes) {
  if (f.sweeps == 0) throw ConfigError("--sweeps", "must be positive");
  if (f.thin == 0) throw ConfigError("--thin", "must be positive");
  if (f.chains == 0) throw ConfigError("--chains", "must be positive");
  ChainOptions o;
  o.sweeps = f.sweeps;
  o.burnin = f.burnin ? *f.burnin : f.sweeps / 10;
  if (o.burnin >= o.sweeps) throw ConfigError("--burnin", "must be smaller than --sweeps");
  o.thin = f.thin;
  o.probes = std::move(probes);
  return o;
}

Json chain_config(const ChainFlags& f, const ChainOptions& o) {
  return Json{{"model", input_entry(f.model)},
              {"evidence", input_entry(f.evidence)},
              {"sweeps", o.sweeps},
              {"burnin", o.burnin},
              {"thin", o.thin},
              {"seed", f.seed},
              {"chains", f.chains},
              {"probes", o.probes}};
}

Json ess_or_null(const std::vector<double>& series) {
  if (series.size() < 100) return nullptr;
  return ess(series);
}

void report_violations(const ValidationReport& rep) {
  for (const auto& v : rep.violations) {
    std::cerr << "validation: " << to_string(v.assumption);
    if (!v.where.empty()) std::cerr << " [" << v.where << "]";
    if (v.time) std::cerr << " t=" << num(*v.time);
    if (v.state) std::cerr << " state=" << *v.state;
    std::cerr << ": " << v.message << "\n";
  }
}

ValidationOptions mjp_validation(const TheoryBounds& b) {
  ValidationOptions o;
  o.eta = b.eta;
  if (b.r_max) o.r_max_cap = *b.r_max;
  return o;
}

// ---- sample ----

int run_sample(const ChainFlags& f, std::size_t snapshot_every) {
  const ModelFile mf = load_model(f.model);
  const IntensityModel& m = mf.model;
  const Evidence evid = f.evidence.empty() ? Evidence() : load_evidence(f.evidence, m.size());
  evid.check_compatible(m);
  const ValidationReport rep = validate_model(m, mjp_validation(mf.bounds));
  if (!rep.ok()) {
    report_violations(rep);
    throw ModelError("model fails validation");
  }
  ChainOptions o = chain_options(f, probe_times_or(f.probes, default_probes(m, evid), m.tmin(), m.tmax()));
  o.snapshot_every = snapshot_every;
  OutputDir out(f.out);
  const auto traces = run_chains(m, evid, std::nullopt, o, f.seed, f.chains, worker_count(f.chains));

  std::ofstream csv(out.file("trace.csv"), std::ios::binary);
  csv << "sweep,chain,jump_count,logdens";
  for (std::size_t p = 0; p < o.probes.size(); ++p) csv << ",probe_" << p;
  csv << "\n";
  std::vector<double> jumps_all;
  double ess_jumps = 0.0, ess_logd = 0.0;
  bool ess_ok = true;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    std::vector<double> jc, ld;
    for (const SweepRecord* r : traces[c].retained()) {
      csv << r->sweep << "," << c << "," << r->jump_count << "," << num(r->log_density);
      for (State s : r->probe_states) csv << "," << m.states().label(s);
      csv << "\n";
      jc.push_back(static_cast<double>(r->jump_count));
      ld.push_back(r->log_density);
    }
    jumps_all.insert(jumps_all.end(), jc.begin(), jc.end());
    if (jc.size() >= 100) {
      ess_jumps += ess(jc);
      ess_logd += ess(ld);
    } else {
      ess_ok = false;
    }
  }
  csv.close();
  if (!csv) throw std::runtime_error("cannot write trace.csv");

  if (snapshot_every > 0) {
    std::ofstream snaps(out.file("snapshots.jsonl"), std::ios::binary);
    for (std::size_t c = 0; c < traces.size(); ++c)
      for (const auto& [sweep, x] : traces[c].snapshots)
        snaps << Json{{"chain", c}, {"sweep", sweep}, {"path", to_json(x, m.states())}}.dump() << "\n";
  }

  const auto marg = probe_marginals(traces, m.size());
  Json marginals = Json::array();
  for (const auto& v : marg) marginals.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  double mean = 0.0;
  for (double x : jumps_all) mean += x;
  Json summary{{"states", m.states().labels()},
               {"probes", o.probes},
               {"marginals", marginals},
               {"retained", jumps_all.size()},
               {"mean_jump_count", jumps_all.empty() ? 0.0 : mean / static_cast<double>(jumps_all.size())}};
  summary["ess"] = ess_ok ? Json{{"jump_count", ess_jumps}, {"log_density", ess_logd}} : Json(nullptr);
  write_json(out.file("summary.json"), summary);

  Json cfg = chain_config(f, o);
  cfg["snapshot_every"] = snapshot_every;
  write_manifest(out, "sample", cfg, f.seed);
  out.commit();
  return 0;
}

// ---- ctbn-sample ----

struct CtbnFlags {
  ChainFlags chain;
  std::string observed;
  std::string node_evidence;
  std::vector<double> scan_weights;
};

int run_ctbn_sample(const CtbnFlags& f) {
  const CtbnModelFile mf = load_ctbn_model(f.chain.model);
  const CtbnModel& model = mf.model;
  const auto observed = f.observed.empty() ? std::map<std::size_t, Trajectory>{}
                                            : load_observed(f.observed, model);
  CtbnEvidence evid;
  evid.observed.assign(model.size(), false);
  for (const auto& [w, x] : observed) evid.observed[w] = true;
  if (!f.node_evidence.empty()) {
    evid.noisy = parse_node_evidence(read_json(f.node_evidence), model);
    for (const auto& [w, e] : evid.noisy)
      if (evid.is_observed(w)) throw ConfigError("--node-evidence", "node '" + model.node(w).name + "' is already fully observed");
  }
  if (!f.scan_weights.empty() && f.scan_weights.size() != model.size())
    throw ConfigError("--scan-weights", "need one weight per node");

  CtbnValidationOptions vo;
  vo.eta = mf.bounds.eta;
  if (mf.bounds.r_max) vo.r_max_cap = *mf.bounds.r_max;
  vo.observed = evid.observed;
  const ValidationReport rep = ctbn_validate(model, vo);
  if (!rep.ok()) {
    report_violations(rep);
    throw ModelError("network fails validation");
  }

  const double mid = 0.5 * (model.tmin() + model.tmax());
  const ChainOptions o = chain_options(
      f.chain, probe_times_or(f.chain.probes, {model.tmin(), mid, model.tmax()}, model.tmin(), model.tmax()));
  OutputDir out(f.chain.out);
  const CtbnPath init = default_initial_path(model, observed);
  const auto traces = run_ctbn_chains(model, evid, init, o, f.scan_weights, f.chain.seed,
                                      f.chain.chains, worker_count(f.chain.chains));

  const auto& free_nodes = traces.front().unobserved;
  std::ofstream csv(out.file("trace.csv"), std::ios::binary);
  csv << "sweep,chain,jump_count,logdens";
  for (std::size_t w : free_nodes)
    for (std::size_t p = 0; p < o.probes.size(); ++p) csv << "," << model.node(w).name << "@" << p;
  csv << "\n";
  std::vector<std::vector<Vector>> counts(free_nodes.size());
  for (std::size_t k = 0; k < free_nodes.size(); ++k)
    counts[k].assign(o.probes.size(), Vector::Zero(static_cast<Eigen::Index>(model.node(free_nodes[k]).states.size())));
  double retained = 0.0;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (const CtbnSweepRecord* r : traces[c].retained()) {
      csv << r->sweep << "," << c << "," << r->jump_count << "," << num(r->log_density);
      for (std::size_t k = 0; k < free_nodes.size(); ++k) {
        for (std::size_t p = 0; p < o.probes.size(); ++p) {
          const State s = r->probe_states[k][p];
          csv << "," << model.node(free_nodes[k]).states.label(s);
          counts[k][p](static_cast<Eigen::Index>(s)) += 1.0;
        }
      }
      csv << "\n";
      retained += 1.0;
    }
  }
  csv.close();
  if (!csv) throw std::runtime_error("cannot write trace.csv");

  Json marginals = Json::object();
  for (std::size_t k = 0; k < free_nodes.size(); ++k) {
    Json per_probe = Json::array();
    for (auto& v : counts[k]) {
      if (retained > 0.0) v /= retained;
      per_probe.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    marginals[model.node(free_nodes[k]).name] = per_probe;
  }
  write_json(out.file("summary.json"), Json{{"probes", o.probes}, {"marginals", marginals}, {"retained", retained}});

  Json cfg = chain_config(f.chain, o);
  cfg["observed"] = input_entry(f.observed);
  cfg["node_evidence"] = input_entry(f.node_evidence);
  cfg["scan_weights"] = f.scan_weights;
  write_manifest(out, "ctbn-sample", cfg, f.chain.seed);
  out.commit();
  return 0;
}

// ---- oracle ----

struct OracleFlags {
  std::string model;
  std::string evidence;
  std::optional<double> grid_step;
  std::vector<double> probes;
  std::string out;
};

int run_oracle(const OracleFlags& f) {
  const ModelFile mf = load_model(f.model);
  const IntensityModel& m = mf.model;
  const Evidence evid = f.evidence.empty() ? Evidence() : load_evidence(f.evidence, m.size());
  const double step = f.grid_step ? *f.grid_step : 1e-3 * m.length();
  if (!(step > 0.0) || step > m.length()) throw ConfigError("--grid-step", "must lie in (0, tmax - tmin]");
  const double count = std::round(m.length() / step);
  if (std::abs(count * step - m.length()) > 1e-9 * m.length())
    throw ConfigError("--grid-step", "must divide tmax - tmin");
  const auto probes = probe_times_or(f.probes, default_probes(m, evid), m.tmin(), m.tmax());
  OutputDir out(f.out);
  const GridPosterior g = grid_posterior(m, evid, step, probes);

  std::ofstream csv(out.file("marginals.csv"), std::ios::binary);
  csv << "time";
  for (const auto& l : m.states().labels()) csv << "," << l;
  csv << "\n";
  for (std::size_t k = 0; k < g.times.size(); ++k) {
    csv << num(g.times[k]);
    for (Eigen::Index s = 0; s < g.marginals[k].size(); ++s) csv << "," << num(g.marginals[k](s));
    csv << "\n";
  }
  csv.close();
  if (!csv) throw std::runtime_error("cannot write marginals.csv");

  Json at = Json::array();
  for (double t : probes) {
    const Vector v = g.at(t);
    at.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  write_json(out.file("summary.json"), Json{{"grid_step", step}, {"log_evidence", g.log_evidence},
                                            {"probes", probes}, {"marginals", at}});
  write_manifest(out, "oracle",
                 Json{{"model", input_entry(f.model)}, {"evidence", input_entry(f.evidence)},
                      {"grid_step", step}, {"probes", probes}},
                 std::nullopt);
  out.commit();
  return 0;
}

// ---- diagnose ----

struct DiagnoseFlags {
  std::string suite;
  std::string model;
  std::string evidence;
  std::optional<std::size_t> reps;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::size_t> jumps{20, 60, 120};
  std::size_t sweeps = 0;
  std::size_t chains = 0;
  std::size_t thin = 10;
};

Json drift_json(const DriftReport& d) {
  return Json{{"seeded", d.seeded}, {"mean", d.mean}, {"se", d.se}, {"reps", d.reps},
              {"slope", d.slope}, {"intercept", d.intercept}, {"slope_se", d.slope_se},
              {"intercept_se", d.intercept_se},
              {"contracting", d.slope < 1.0 - 3.0 * d.slope_se}};
}

int run_diagnose(const DiagnoseFlags& f) {
  const ModelFile mf = load_model(f.model);
  const IntensityModel& m = mf.model;
  const Json evid_json = f.evidence.empty() ? Json(nullptr) : read_json(f.evidence);
  const Evidence evid = f.evidence.empty() ? Evidence() : parse_evidence(evid_json, m.size());
  evid.check_compatible(m);
  Rng rng = make_stream(f.seed, 0);
  Json report{{"suite", f.suite}};
  Json cfg{{"suite", f.suite}, {"model", input_entry(f.model)}, {"evidence", input_entry(f.evidence)},
           {"seed", f.seed}};

  if (f.suite == "drift") {
    const std::size_t reps = f.reps.value_or(10000);
    if (reps < 100) throw ConfigError("--reps", "drift needs at least 100 replicates");
    if (f.jumps.size() < 2) throw ConfigError("--jumps", "need at least two seed jump counts");
    std::vector<Trajectory> seeds;
    for (std::size_t j : f.jumps) {
      if (j == 0) throw ConfigError("--jumps", "jump counts must be positive");
      seeds.push_back(path_with_jump_count(m, j));
    }
    OutputDir out(f.out);
    const DriftReport d = drift_estimate(
        [&](const Trajectory& x, Rng& r) { return rao_teh_step(m, evid, x, r); }, seeds, reps, rng);
    report["drift"] = drift_json(d);
    cfg["reps"] = reps;
    cfg["jumps"] = f.jumps;
    write_json(out.file("report.json"), report);
    write_manifest(out, "diagnose", cfg, f.seed);
    out.commit();
    return 0;
  }
  if (f.suite == "geweke") {
    const auto ef = f.evidence.empty() ? std::nullopt : parse_emission_file(evid_json, m.size());
    if (!ef) throw ConfigError("--evidence", "the geweke suite needs an evidence file with an emission matrix");
    const std::size_t n = f.reps.value_or(10000);
    if (n < 100) throw ConfigError("--reps", "geweke needs at least 100 draws");
    if (f.thin == 0) throw ConfigError("--thin", "must be positive");
    OutputDir out(f.out);
    GewekeOptions go;
    go.n = n;
    go.thin = f.thin;
    go.burnin = 10 * f.thin;
    const auto ks = geweke_joint_test(mjp_geweke_problem(m, ef->spec), go, rng);
    const char* names[] = {"jump_count", "occupation_time_0", "midpoint_state"};
    Json res = Json::object();
    for (std::size_t k = 0; k < ks.size(); ++k) res[names[k]] = Json{{"ks", ks[k].statistic}, {"p", ks[k].p_value}};
    report["geweke"] = res;
    cfg["reps"] = n;
    cfg["thin"] = f.thin;
    write_json(out.file("report.json"), report);
    write_manifest(out, "diagnose", cfg, f.seed);
    out.commit();
    return 0;
  }
  if (f.suite == "tv") {
    const std::size_t chains = f.chains ? f.chains : 200;
    const std::size_t sweeps = f.sweeps ? f.sweeps : 30;
    const std::size_t start = f.jumps.empty() ? 1 : f.jumps.back();
    OutputDir out(f.out);
    ChainOptions o;
    o.sweeps = sweeps;
    o.probes = default_probes(m, evid);
    const auto traces = run_chains(m, evid, path_with_jump_count(m, start), o, f.seed, chains,
                                   worker_count(chains));
    const GridPosterior g = grid_posterior(m, evid, 1e-3 * m.length(), o.probes);
    std::vector<Vector> oracle;
    for (double t : o.probes) oracle.push_back(g.at(t));
    report["tv"] = Json{{"probes", o.probes}, {"chains", chains}, {"start_jump_count", start},
                        {"curve", tv_across_chains(traces, oracle)}};
    cfg["chains"] = chains;
    cfg["sweeps"] = sweeps;
    cfg["start_jump_count"] = start;
    write_json(out.file("report.json"), report);
    write_manifest(out, "diagnose", cfg, f.seed);
    out.commit();
    return 0;
  }
  // ess
  const std::size_t sweeps = f.sweeps ? f.sweeps : 10000;
  if (sweeps < 200) throw ConfigError("--sweeps", "the ess suite needs at least 200 sweeps");
  OutputDir out(f.out);
  ChainOptions o;
  o.sweeps = sweeps;
  o.burnin = sweeps / 10;
  o.probes = default_probes(m, evid);
  const ChainTrace t = run_chain(m, evid, std::nullopt, o, rng);
  std::vector<double> jc, ld;
  std::vector<std::vector<double>> ps(o.probes.size());
  for (const SweepRecord* r : t.retained()) {
    jc.push_back(static_cast<double>(r->jump_count));
    ld.push_back(r->log_density);
    for (std::size_t p = 0; p < ps.size(); ++p) ps[p].push_back(static_cast<double>(r->probe_states[p]));
  }
  Json probes_ess = Json::array();
  for (const auto& s : ps) probes_ess.push_back(ess_or_null(s));
  report["ess"] = Json{{"n", jc.size()}, {"jump_count", ess_or_null(jc)}, {"log_density", ess_or_null(ld)},
                       {"probes", o.probes}, {"probe_states", probes_ess}};
  cfg["sweeps"] = sweeps;
  write_json(out.file("report.json"), report);
  write_manifest(out, "diagnose", cfg, f.seed);
  out.commit();
  return 0;
}

// ---- validate ----

struct ValidateFlags {
  std::string model;
  std::string kind = "auto";
  std::optional<double> eta;
  std::optional<double> r_max;
  std::string observed;
  std::string out;
};

int run_validate(const ValidateFlags& f) {
  const Json j = read_json(f.model);
  const bool network = f.kind == "ctbn" || (f.kind == "auto" && j.is_object() && j.contains("nodes"));
  ValidationReport rep;
  if (network) {
    CtbnModelFile mf = parse_ctbn_model(j);
    CtbnValidationOptions vo;
    vo.eta = f.eta ? f.eta : mf.bounds.eta;
    const auto cap = f.r_max ? f.r_max : mf.bounds.r_max;
    if (cap) vo.r_max_cap = *cap;
    vo.observed.assign(mf.model.size(), false);
    if (!f.observed.empty())
      for (const auto& [w, x] : load_observed(f.observed, mf.model)) vo.observed[w] = true;
    rep = ctbn_validate(mf.model, vo);
  } else {
    if (!f.observed.empty()) throw ConfigError("--observed", "only applies to network models");
    ModelFile mf = parse_model(j);
    TheoryBounds b = mf.bounds;
    if (f.eta) b.eta = f.eta;
    if (f.r_max) b.r_max = f.r_max;
    rep = validate_model(mf.model, mjp_validation(b));
  }
  Json rj = to_json(rep);
  rj["kind"] = network ? "ctbn" : "mjp";
  std::cout << rj.dump(2) << "\n";
  if (!f.out.empty()) {
    OutputDir out(f.out);
    write_json(out.file("report.json"), rj);
    Json cfg{{"model", input_entry(f.model)}, {"kind", rj["kind"]}, {"observed", input_entry(f.observed)}};
    cfg["eta"] = f.eta ? Json(*f.eta) : Json(nullptr);
    cfg["r_max"] = f.r_max ? Json(*f.r_max) : Json(nullptr);
    write_manifest(out, "validate", cfg, std::nullopt);
    out.commit();
  }
  return rep.ok() ? 0 : 1;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int parse_and_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Posterior sampling for Markov jump processes and continuous-time Bayesian networks",
               "jumpchain"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ChainFlags sample;
  std::size_t snapshot_every = 0;
  auto* s = app.add_subcommand("sample", "run the auxiliary-variable sampler on an MJP");
  add_chain_flags(s, sample);
  s->add_option("--evidence", sample.evidence, "evidence JSON")->check(CLI::ExistingFile);
  s->add_option("--snapshot-every", snapshot_every, "write every k-th path to snapshots.jsonl");

  CtbnFlags ctbn;
  auto* c = app.add_subcommand("ctbn-sample", "run the random-scan Gibbs sampler on a CTBN");
  add_chain_flags(c, ctbn.chain);
  c->add_option("--observed", ctbn.observed, "observed node trajectories JSON")->check(CLI::ExistingFile);
  c->add_option("--node-evidence", ctbn.node_evidence, "noisy per-node evidence JSON")->check(CLI::ExistingFile);
  c->add_option("--scan-weights", ctbn.scan_weights, "node selection weights")->delimiter(',');

  OracleFlags oracle;
  auto* o = app.add_subcommand("oracle", "fine-grid posterior marginals");
  o->add_option("--model", oracle.model, "model JSON")->required()->check(CLI::ExistingFile);
  o->add_option("--evidence", oracle.evidence, "evidence JSON")->check(CLI::ExistingFile);
  o->add_option("--grid-step", oracle.grid_step, "grid step (default 1e-3 (tmax - tmin))");
  o->add_option("--probes", oracle.probes, "times reported in summary.json")->delimiter(',');
  o->add_option("--out", oracle.out, "output directory")->required();

  DiagnoseFlags diag;
  auto* d = app.add_subcommand("diagnose", "chain diagnostics");
  d->add_option("--suite", diag.suite, "drift, geweke, tv or ess")
      ->required()
      ->check(CLI::IsMember({"drift", "geweke", "tv", "ess"}));
  d->add_option("--model", diag.model, "model JSON")->required()->check(CLI::ExistingFile);
  d->add_option("--evidence", diag.evidence, "evidence JSON")->check(CLI::ExistingFile);
  d->add_option("--reps", diag.reps, "replicates (drift) or draws (geweke)");
  d->add_option("--seed", diag.seed, "RNG seed")->required();
  d->add_option("--out", diag.out, "output directory")->required();
  d->add_option("--jumps", diag.jumps, "seed jump counts (drift); last one is the tv start")->delimiter(',');
  d->add_option("--sweeps", diag.sweeps, "sweeps (tv, ess)");
  d->add_option("--chains", diag.chains, "chains (tv)");
  d->add_option("--thin", diag.thin, "kernel steps between recorded draws (geweke)");

  ValidateFlags val;
  auto* v = app.add_subcommand("validate", "check the ergodicity assumptions of a model");
  v->add_option("--model", val.model, "MJP or CTBN model JSON")->required()->check(CLI::ExistingFile);
  v->add_option("--kind", val.kind, "auto, mjp or ctbn")->check(CLI::IsMember({"auto", "mjp", "ctbn"}));
  v->add_option("--eta", val.eta, "declared eta");
  v->add_option("--r-max", val.r_max, "upper bound on R");
  v->add_option("--observed", val.observed, "observed node trajectories JSON")->check(CLI::ExistingFile);
  v->add_option("--out", val.out, "also write report.json and manifest.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (s->parsed()) return run_sample(sample, snapshot_every);
    if (c->parsed()) return run_ctbn_sample(ctbn);
    if (o->parsed()) return run_oracle(oracle);
    if (d->parsed()) return run_diagnose(diag);
    if (v->parsed()) return run_validate(val);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace jumpchain
