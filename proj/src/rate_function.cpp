#include <algorithm>

#include "jumpchain/event_sampling.hpp"

namespace jumpchain {

RateFunction::RateFunction(std::vector<double> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
  if (values_.empty() || edges_.size() != values_.size())
    throw ModelError("rate function needs one start edge per piece");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || values_[k] < 0.0)
      throw ModelError("rate values must be finite and nonnegative");
    if (!std::isfinite(edges_[k]) || (k > 0 && !(edges_[k] > edges_[k - 1])))
      throw ModelError("rate edges must be finite and strictly increasing");
  }
}

RateFunction RateFunction::constant(double start, double value) {
  return RateFunction({start}, {value});
}

std::size_t RateFunction::piece_at(double t) const {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  if (it == edges_.begin()) return 0;
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

double RateFunction::integral(double a, double b) const {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  for (std::size_t k = piece_at(a); k < values_.size(); ++k) {
    const double lo = std::max(a, edges_[k]);
    const double hi = k + 1 < edges_.size() ? std::min(b, edges_[k + 1]) : b;
    if (hi > lo) total += values_[k] * (hi - lo);
    if (k + 1 >= edges_.size() || edges_[k + 1] >= b) break;
  }
  return total;
}

}  // namespace jumpchain
