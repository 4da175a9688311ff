#ifndef JUMPCHAIN_COMMON_HPP
#define JUMPCHAIN_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace jumpchain {

using State = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One stream per chain. Never share a stream between threads.
using Rng = std::mt19937_64;

Rng make_stream(std::uint64_t seed, std::uint64_t stream_id);

// Malformed input: wrong shapes, negative rates, unnormalized laws.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The evidence has zero probability under the model.
class ImpossibleEvidence : public ModelError {
 public:
  using ModelError::ModelError;
};

// Log-space helpers. Log-zero is -inf; it compares below every finite value
// and absorbs addition of finite values.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return x == kLogZero; }

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kLogZero; }

// Elementwise exp that maps log-zero to exactly 0. Eigen's vectorized exp
// clamps large negative inputs and returns ~1e-308 for -inf.
inline Vector exp_of(const Vector& v) {
  return v.unaryExpr([](double x) { return std::exp(x); });
}

// log(sum(exp(xs))), returns kLogZero for an empty or all-zero input.
double log_sum_exp(std::span<const double> xs);

// Relative tolerance below which two event times are treated as a tie.
inline constexpr double kTieTolerance = 1e-12;

}  // namespace jumpchain

#endif
