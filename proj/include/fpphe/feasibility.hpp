#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fpphe {

/// Typical-passage-time constants of the three tree families used by a tile
/// (the path, the binary tree and the D-ary tree): every c_in < 1 < c_out.
struct RateConstants {
  double cin1 = 0.5, cin2 = 0.5, cinD = 0.5;
  double cout1 = 2.0, cout2 = 2.0, coutD = 2.0;

  void validate() const;
};

struct FeasibilityProblem {
  double lambda = 0.01;
  RateConstants constants;
  double frak_c = 10.0;
  std::int64_t R = 100;
  /// Largest H tried before giving up.
  std::int64_t h_cap = 1'000'000'000;

  void validate() const;
};

struct FeasibilitySolution {
  std::int64_t H = 0;
  std::int64_t L = 0;
  bool feasible = false;
  /// Sides of (H+1)/cin2 + R/(lambda cin1) + c < (L+1)/coutD.
  double lhs1 = 0, rhs1 = 0;
  /// Sides of (H/2)/cout2 + (H/2+1)/(lambda cout2) + R/(lambda cout1) > 2c + (L+1)/cinD.
  double lhs2 = 0, rhs2 = 0;
  /// Coefficient of H in the combined sufficient condition.
  double h_coefficient = 0;
  std::optional<std::int64_t> l_low, l_high;
  std::string diagnostics;
};

/// Threshold below which the H-coefficient of the combined condition is
/// positive: cinD cin2 / (2 cout2 coutD - cinD cin2).
double lambda_zero(const RateConstants& c);

/// cinD/(2 cout2) (1 + 1/lambda) - coutD/cin2.
double h_coefficient(const RateConstants& c, double lambda);

/// Both inequalities evaluated by direct substitution.
bool red_infects_b(const FeasibilityProblem& p, std::int64_t H, std::int64_t L);
bool white_infects_b(const FeasibilityProblem& p, std::int64_t H, std::int64_t L);

/// Smallest even H satisfying the combined condition, then the smallest L in
/// the interval allowed by both inequalities; H grows by 2 while that
/// interval is empty.
FeasibilitySolution solve_hl(const FeasibilityProblem& p);

/// Graph family for rate-constant estimation: d = 1 is a path, d >= 2 the
/// d-ary tree (capped trees coincide with it up to the cap level).
struct RateEstimateRequest {
  int d = 1;
  double gamma = 1.0;
  int k_min = 1;
  int k_max = 20;
  int trials = 1000;
  /// Required decay exponent of both tails (c_0 and c_1).
  double target_exponent_in = 0.1;
  double target_exponent_out = 0.1;
  std::uint64_t master_seed = 0;
  double grid_step = 1e-3;
  double cout_max = 50.0;
};

struct RateEstimateRow {
  int k;
  double tail_in;   ///< P(slowest path of length k >= k / (gamma cin_hat))
  double tail_out;  ///< P(fastest path of length k <= k / (gamma cout_hat))
  std::optional<double> exponent_in;   ///< -ln(tail_in) / k
  std::optional<double> exponent_out;  ///< -ln(tail_out) / k
};

struct RateEstimate {
  std::optional<double> cin_hat;
  std::optional<double> cout_hat;
  std::vector<RateEstimateRow> rows;
  std::vector<std::string> warnings;
};

RateEstimate estimate_rate_constants(const RateEstimateRequest& request);

/// Per-k samples of the fastest and slowest path passage time from the root
/// to depth k, one sample per trial. Exposed for diagnostics and tests.
struct PathExtremes {
  std::vector<std::vector<double>> fastest;  ///< indexed [k - k_min][trial]
  std::vector<std::vector<double>> slowest;
};

PathExtremes sample_path_extremes(const RateEstimateRequest& request);

}  // namespace fpphe
