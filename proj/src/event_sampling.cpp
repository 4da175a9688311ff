#include "jumpchain/event_sampling.hpp"

#include <algorithm>

namespace jumpchain {

std::optional<double> sample_holding_time(double u, const RateFunction& rate,
                                          double horizon, Rng& rng) {
  std::exponential_distribution<double> unit_exp(1.0);
  double remaining = unit_exp(rng);
  const auto& edges = rate.edges();
  const auto& values = rate.values();
  double pos = u;
  for (std::size_t k = rate.piece_at(u);; ++k) {
    const double end = k + 1 < edges.size() ? edges[k + 1]
                                            : std::numeric_limits<double>::infinity();
    const double cap = std::min(end, horizon);
    const double r = values[k];
    if (r > 0.0) {
      const double w = pos + remaining / r;
      if (w < cap) return w;
      remaining -= r * (cap - pos);
    } else if (std::isinf(cap)) {
      throw ModelError("holding time is infinite: zero rate with no horizon");
    }
    if (cap >= horizon) return std::nullopt;
    pos = cap;
  }
}

double holding_log_density(double u, double w, const RateFunction& rate) {
  const double r = rate(w);
  if (r <= 0.0) return kLogZero;
  return std::log(r) - rate.integral(u, w);
}

void append_poisson_points(double rate, double a, double b, Rng& rng,
                           std::vector<double>& out) {
  const double mean = rate * (b - a);
  if (!(mean > 0.0)) return;
  std::poisson_distribution<long> count_dist(mean);
  std::uniform_real_distribution<double> pos(a, b);
  for (long n = count_dist(rng); n > 0; --n) out.push_back(pos(rng));
}

std::vector<double> sample_poisson_process(const RateFunction& rate, double a,
                                           double b, Rng& rng) {
  std::vector<double> out;
  const auto& edges = rate.edges();
  for (std::size_t k = rate.piece_at(a); k < edges.size(); ++k) {
    const double lo = std::max(a, edges[k]);
    const double hi = k + 1 < edges.size() ? std::min(b, edges[k + 1]) : b;
    if (hi > lo) append_poisson_points(rate.values()[k], lo, hi, rng, out);
    if (k + 1 >= edges.size() || edges[k + 1] >= b) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace jumpchain
