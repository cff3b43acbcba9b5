#ifndef MECHLAB_COMMON_HPP
#define MECHLAB_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace mechlab {

// Tolerance for welfare ties, participation checks and other value comparisons.
inline constexpr double kCompareEps = 1e-9;

// Pivot tolerance of the dense simplex solver.
inline constexpr double kPivotEps = 1e-9;

// Base feasibility tolerance; membership checks scale it by the constraint norm.
inline constexpr double kFeasEps = 1e-7;

// A prediction polytope with no feasible point.  The CLI maps this to its own
// exit code, so it must stay distinguishable from plain invalid-argument errors.
class InfeasiblePredictionError : public std::runtime_error {
 public:
  explicit InfeasiblePredictionError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed configuration input (unknown mechanism, bad key, empty range, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Smallest integer k with 2^k >= x (x > 0).  Computed with an explicit
// correction loop so exact powers of two never fall on the wrong side of the
// ceiling through floating-point log noise.
inline int ceil_log2(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("ceil_log2: argument must be positive");
  int k = static_cast<int>(std::ceil(std::log2(x)));
  while (std::ldexp(1.0, k) < x) ++k;
  while (k > 0 && std::ldexp(1.0, k - 1) >= x) --k;
  if (std::ldexp(1.0, k) < x) throw std::runtime_error("ceil_log2: correction failed");
  return k;
}

// ceil(log2^+): as above but clamped so arguments below 1 (including
// non-positive ones) map to 0.
inline int ceil_log2_plus(double x) {
  if (x < 1.0) return 0;
  return std::max(0, ceil_log2(x));
}

}  // namespace mechlab

#endif  // MECHLAB_COMMON_HPP
