#ifndef JUMPCHAIN_CTBN_HPP
#define JUMPCHAIN_CTBN_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jumpchain/ffbs.hpp"
#include "jumpchain/intensity_model.hpp"
#include "jumpchain/rao_teh.hpp"

namespace jumpchain {

// Parent configurations use a mixed-radix code over the parent list: the
// first parent is the least significant digit. Joint states of the product
// space use the same convention over the node list.
struct CtbnNode {
  std::string name;
  StateSpace states;
  std::vector<std::size_t> parents;
  std::vector<Matrix> cims;                  // one generator per parent configuration
  std::vector<RateFunction> instrumental;    // R_w(.; s), one per state; empty -> default
};

// Initial law: either one marginal per node (independent) or a full table
// over the product space.
struct CtbnInitialLaw {
  std::vector<Vector> factored;
  std::optional<Vector> tabular;
};

inline constexpr std::size_t kDefaultFlattenCap = 4096;

class CtbnModel {
 public:
  CtbnModel(std::vector<CtbnNode> nodes, CtbnInitialLaw nu, double tmin, double tmax,
            double default_r_factor = kDefaultRFactor);

  std::size_t size() const { return nodes_.size(); }
  const CtbnNode& node(std::size_t w) const { return nodes_[w]; }
  const std::vector<std::size_t>& children(std::size_t w) const { return children_[w]; }
  std::size_t index_of(const std::string& name) const;
  double tmin() const { return tmin_; }
  double tmax() const { return tmax_; }
  const CtbnInitialLaw& initial_law() const { return nu_; }

  std::size_t config_count(std::size_t w) const { return config_count_[w]; }
  // Code of the parent configuration of w read from a full joint assignment.
  std::size_t parent_config(std::size_t w, std::span<const State> joint) const;
  // Stride of parent p's digit in w's configuration code.
  std::size_t parent_stride(std::size_t w, std::size_t parent_pos) const {
    return parent_strides_[w][parent_pos];
  }

  // Q_w(c; s, s') with diagonal -Q_w(c; s).
  const Matrix& cim(std::size_t w, std::size_t c) const { return nodes_[w].cims[c]; }

  // Product-space size; saturates at SIZE_MAX.
  std::size_t joint_size() const;
  std::size_t encode_joint(std::span<const State> joint) const;
  std::vector<State> decode_joint(std::size_t index) const;

  double initial_log_prob(std::span<const State> joint) const;
  // nu(X_w(tmin) = . | X_{-w}(tmin) = rest), where joint[w] is ignored.
  Vector initial_conditional(std::size_t w, std::span<const State> joint) const;

 private:
  std::vector<CtbnNode> nodes_;
  CtbnInitialLaw nu_;
  double tmin_;
  double tmax_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> config_count_;
  std::vector<std::vector<std::size_t>> parent_strides_;
};

// One trajectory per node over the shared interval.
using CtbnPath = std::vector<Trajectory>;

void check_path(const CtbnModel& model, const CtbnPath& path);

// Times at which node w and one of its parents jump simultaneously. Such jumps
// are attributed to the post-jump parent configuration.
std::vector<double> simultaneous_parent_jumps(const CtbnModel& model, const CtbnPath& path,
                                              std::size_t w);

struct SufficientStats {
  std::vector<Matrix> jumps;      // jumps[c](s, s'): transition counts
  std::vector<Vector> occupancy;  // occupancy[c](s): time spent
};

SufficientStats sufficient_stats(const CtbnModel& model, const CtbnPath& path, std::size_t w);

// log p(X_w || X_pa(w)).
double node_log_density(const CtbnModel& model, const CtbnPath& path, std::size_t w);

// log nu(X(tmin)) + sum_w log p(X_w || X_pa(w)).
double ctbn_log_density(const CtbnModel& model, const CtbnPath& path);

// Joint MJP on the product space: a single node moves at a time.
IntensityModel flatten(const CtbnModel& model, std::size_t cap = kDefaultFlattenCap);

// The same path as a trajectory on the product space.
Trajectory flatten_path(const CtbnModel& model, const CtbnPath& path);

struct CtbnValidationOptions {
  std::optional<double> eta;
  double r_max_cap = std::numeric_limits<double>::infinity();
  std::vector<bool> observed;  // empty: every node unobserved
};

ValidationReport ctbn_validate(const CtbnModel& model, const CtbnValidationOptions& opts = {});

// Fully observed nodes stay fixed; noisy observations of unobserved nodes are
// folded into the skeleton potentials.
struct CtbnEvidence {
  std::vector<bool> observed;
  std::map<std::size_t, Evidence> noisy;

  bool is_observed(std::size_t w) const { return w < observed.size() && observed[w]; }
};

// Skeleton conditional of node w given every other node, for event times
// `times` at w (times[0] == tmin).
SkeletonHmm node_full_conditional_hmm(const CtbnModel& model, const CtbnPath& path,
                                      std::size_t w, std::span<const double> times,
                                      const Evidence* noisy = nullptr);

// {tmin} ∪ J(X_w) ∪ V with V Poisson of rate R_w(t; X_w(t)) - Q_w(X_pa(w)(t); X_w(t)).
std::vector<double> resample_node_virtual(const CtbnModel& model, const CtbnPath& path,
                                          std::size_t w, Rng& rng);

// Auxiliary-variable update of node w targeting p(X_w | X_{-w}).
Trajectory node_update(const CtbnModel& model, const CtbnPath& path, std::size_t w,
                       const Evidence* noisy, Rng& rng);

// Random-scan Gibbs step: pick an unobserved node with probability
// proportional to scan_weights[w] (uniform when empty) and update it.
CtbnPath gibbs_step(const CtbnModel& model, const CtbnEvidence& evid, const CtbnPath& path,
                    std::span<const double> scan_weights, Rng& rng);

std::size_t total_jump_count(const CtbnPath& path, const CtbnEvidence& evid);

struct CtbnSweepRecord {
  std::size_t sweep = 0;
  std::size_t jump_count = 0;  // sum of |J(X_w)| over unobserved nodes
  double log_density = 0.0;
  std::vector<std::vector<State>> probe_states;  // [unobserved node][probe]
};

struct CtbnChainTrace {
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::vector<std::size_t> unobserved;
  std::vector<CtbnSweepRecord> records;

  std::vector<const CtbnSweepRecord*> retained() const;
};

// Unobserved nodes start constant at their most probable initial state.
// Observed nodes take their trajectory from `observed`.
CtbnPath default_initial_path(const CtbnModel& model,
                              const std::map<std::size_t, Trajectory>& observed);

CtbnChainTrace run_ctbn_chain(const CtbnModel& model, const CtbnEvidence& evid,
                              const CtbnPath& init, const ChainOptions& opts,
                              std::span<const double> scan_weights, Rng& rng);

std::vector<CtbnChainTrace> run_ctbn_chains(const CtbnModel& model, const CtbnEvidence& evid,
                                            const CtbnPath& init, const ChainOptions& opts,
                                            std::span<const double> scan_weights,
                                            std::uint64_t seed, std::size_t chains,
                                            std::size_t workers);

}  // namespace jumpchain

#endif
