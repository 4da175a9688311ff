#ifndef JUMPCHAIN_EVENT_SAMPLING_HPP
#define JUMPCHAIN_EVENT_SAMPLING_HPP

#include <optional>
#include <vector>

#include "jumpchain/common.hpp"

namespace jumpchain {

// Piecewise-constant nonnegative rate. Piece k covers [edges[k], edges[k+1]);
// the final piece extends to +infinity. A time equal to an interior edge
// belongs to the piece on its right.
class RateFunction {
 public:
  RateFunction(std::vector<double> edges, std::vector<double> values);
  static RateFunction constant(double start, double value);

  double start() const { return edges_.front(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t piece_count() const { return values_.size(); }

  std::size_t piece_at(double t) const;
  double operator()(double t) const { return values_[piece_at(t)]; }

  // Exact integral over [a, b]; a >= start().
  double integral(double a, double b) const;

 private:
  std::vector<double> edges_;   // size = values_.size()
  std::vector<double> values_;
};

// Time of the first point after u of a Poisson process with the given rate,
// by inversion of the cumulative hazard piece by piece. Returns nullopt when
// the first point lies beyond horizon (pass +infinity for no horizon).
std::optional<double> sample_holding_time(double u, const RateFunction& rate,
                                          double horizon, Rng& rng);

// log R(w) - integral_u^w R. Returns kLogZero when R(w) == 0.
double holding_log_density(double u, double w, const RateFunction& rate);

// Inhomogeneous Poisson process on [a, b]: per constant piece a Poisson count
// with uniform positions, returned sorted.
std::vector<double> sample_poisson_process(const RateFunction& rate, double a,
                                           double b, Rng& rng);

// Appends points of a homogeneous process on [a, b) to out (unsorted).
void append_poisson_points(double rate, double a, double b, Rng& rng,
                           std::vector<double>& out);

}  // namespace jumpchain

#endif
