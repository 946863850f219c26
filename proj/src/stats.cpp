#include "fpphe/stats.hpp"

#include <cmath>
#include <limits>

#include "fpphe/error.hpp"

namespace fpphe {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw InvalidParameter("Wilson interval needs at least one trial");
  if (successes > trials) throw InvalidParameter("successes exceed trials");
  if (!(z > 0.0)) throw InvalidParameter("z must be positive");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Interval ci{center - half, center + half};
  if (successes == 0) ci.low = 0.0;
  if (successes == trials) ci.high = 1.0;
  ci.low = std::max(0.0, std::min(ci.low, p));
  ci.high = std::min(1.0, std::max(ci.high, p));
  return ci;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("normal quantile needs p in (0, 1)");
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double two_proportion_z(std::uint64_t s1, std::uint64_t n1, std::uint64_t s2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) throw InvalidParameter("proportions need at least one trial");
  const double p1 = static_cast<double>(s1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(s2) / static_cast<double>(n2);
  const double var = p1 * (1.0 - p1) / static_cast<double>(n1) +
                     p2 * (1.0 - p2) / static_cast<double>(n2);
  if (var <= 0.0) {
    if (p1 == p2) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), p2 - p1);
  }
  return (p2 - p1) / std::sqrt(var);
}

}  // namespace fpphe
