#pragma once

#include <cstdint>

namespace fpphe {

struct Interval {
  double low;
  double high;
};

/// Wilson score interval for `successes` out of `trials`. The bounds are
/// exactly 0 (resp. 1) when no trial (resp. every trial) succeeded.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

/// Standard normal CDF and its inverse.
double normal_cdf(double x);
double normal_quantile(double p);

/// z statistic of p2 - p1 for two independent binomial proportions, using the
/// unpooled standard error; 0 when both variances vanish.
double two_proportion_z(std::uint64_t s1, std::uint64_t n1, std::uint64_t s2, std::uint64_t n2);

}  // namespace fpphe
