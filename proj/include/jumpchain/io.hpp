#ifndef JUMPCHAIN_IO_HPP
#define JUMPCHAIN_IO_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "jumpchain/ctbn.hpp"
#include "jumpchain/diagnostics.hpp"
#include "jumpchain/intensity_model.hpp"

namespace jumpchain {

using Json = nlohmann::json;

// Thrown for malformed files; the message names the file and the field.
class FormatError : public ModelError {
 public:
  using ModelError::ModelError;
};

Json read_json(const std::filesystem::path& path);

// Optional theory constants carried by model files.
struct TheoryBounds {
  std::optional<double> eta;
  std::optional<double> r_max;
};

struct ModelFile {
  IntensityModel model;
  TheoryBounds bounds;
};

// {states, nu, tmin, tmax, breakpoints?, Q_blocks, R_blocks?, eta?, r_max?}
// `states` is a list of labels or a count. Diagonals of Q are ignored.
ModelFile parse_model(const Json& j);
ModelFile load_model(const std::filesystem::path& path);

// {obs_times, loglik_tables} where null or "-inf" is log zero, or
// {obs_times, emission, observations} with emission[s][y] = L(y | s).
Evidence parse_evidence(const Json& j, std::size_t n_states);
Evidence load_evidence(const std::filesystem::path& path, std::size_t n_states);

struct EmissionFile {
  EmissionSpec spec;
  Observations observations;
};

// The emission form of an evidence file; nullopt for the table form.
std::optional<EmissionFile> parse_emission_file(const Json& j, std::size_t n_states);

struct CtbnModelFile {
  CtbnModel model;
  TheoryBounds bounds;
};

// {nodes: [{name, states, parents, cim_table, R?}], nu, tmin, tmax, eta?, r_max?}
// nu is a list of per-node marginals or one flat table over the product space.
// R is a per-state list or {breakpoints, values} with values[piece][state].
CtbnModelFile parse_ctbn_model(const Json& j);
CtbnModelFile load_ctbn_model(const std::filesystem::path& path);

// [{node, jump_times, states}] with node names and state labels.
std::map<std::size_t, Trajectory> parse_observed(const Json& j, const CtbnModel& model);
std::map<std::size_t, Trajectory> load_observed(const std::filesystem::path& path,
                                                const CtbnModel& model);

// Noisy per-node evidence: {node: evidence object, ...}.
std::map<std::size_t, Evidence> parse_node_evidence(const Json& j, const CtbnModel& model);

Json to_json(const Trajectory& x, const StateSpace& states);
Json to_json(const ValidationReport& r);

}  // namespace jumpchain

#endif
