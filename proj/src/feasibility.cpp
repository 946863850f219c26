#include "fpphe/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpphe/error.hpp"
#include "fpphe/rng.hpp"

namespace fpphe {

void RateConstants::validate() const {
  for (double c : {cin1, cin2, cinD}) {
    if (!(c > 0.0 && c < 1.0)) throw InvalidParameter("every c_in must lie in (0, 1)");
  }
  for (double c : {cout1, cout2, coutD}) {
    if (!(c > 1.0) || !std::isfinite(c)) throw InvalidParameter("every c_out must exceed 1");
  }
}

void FeasibilityProblem::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be positive");
  constants.validate();
  if (!(frak_c >= 0.0) || !std::isfinite(frak_c)) {
    throw InvalidParameter("edge constant must be nonnegative");
  }
  if (R < 1) throw InvalidParameter("R must be >= 1");
  if (h_cap < 2) throw InvalidParameter("H cap must be >= 2");
}

double lambda_zero(const RateConstants& c) {
  c.validate();
  const double numerator = c.cinD * c.cin2;
  const double denominator = 2.0 * c.cout2 * c.coutD - numerator;
  if (!(denominator > 0.0)) throw Infeasible("lambda_0 denominator is nonpositive");
  return numerator / denominator;
}

double h_coefficient(const RateConstants& c, double lambda) {
  return c.cinD / (2.0 * c.cout2) * (1.0 + 1.0 / lambda) - c.coutD / c.cin2;
}

namespace {

double red_lhs(const FeasibilityProblem& p, std::int64_t H) {
  const auto& c = p.constants;
  return (static_cast<double>(H) + 1.0) / c.cin2 +
         static_cast<double>(p.R) / (p.lambda * c.cin1) + p.frak_c;
}

double red_rhs(const FeasibilityProblem& p, std::int64_t L) {
  return (static_cast<double>(L) + 1.0) / p.constants.coutD;
}

double white_lhs(const FeasibilityProblem& p, std::int64_t H) {
  const auto& c = p.constants;
  const double half = static_cast<double>(H) / 2.0;
  return half / c.cout2 + (half + 1.0) / (p.lambda * c.cout2) +
         static_cast<double>(p.R) / (p.lambda * c.cout1);
}

double white_rhs(const FeasibilityProblem& p, std::int64_t L) {
  return 2.0 * p.frak_c + (static_cast<double>(L) + 1.0) / p.constants.cinD;
}

}  // namespace

bool red_infects_b(const FeasibilityProblem& p, std::int64_t H, std::int64_t L) {
  return red_lhs(p, H) < red_rhs(p, L);
}

bool white_infects_b(const FeasibilityProblem& p, std::int64_t H, std::int64_t L) {
  return white_lhs(p, H) > white_rhs(p, L);
}

FeasibilitySolution solve_hl(const FeasibilityProblem& p) {
  p.validate();
  const auto& c = p.constants;
  FeasibilitySolution sol;
  sol.h_coefficient = h_coefficient(c, p.lambda);
  if (!(sol.h_coefficient > 0.0)) {
    std::ostringstream msg;
    msg << "coefficient of H is " << sol.h_coefficient
        << " <= 0; lambda must be below lambda_0 = " << lambda_zero(c);
    sol.diagnostics = msg.str();
    return sol;
  }

  // Everything in the combined condition that does not multiply H.
  const double rest = c.coutD / c.cin2 +
                      static_cast<double>(p.R) / p.lambda * (c.coutD / c.cin1 - c.cinD / c.cout1) +
                      2.0 * p.frak_c * (c.coutD + c.cinD) + 1.0;
  const double ratio = rest / sol.h_coefficient;
  if (!(ratio < static_cast<double>(p.h_cap))) {
    sol.diagnostics = "required H exceeds the cap of " + std::to_string(p.h_cap);
    return sol;
  }
  std::int64_t H = ratio < 0.0 ? 1 : static_cast<std::int64_t>(std::floor(ratio)) + 1;
  if (H % 2 != 0) ++H;
  while (!(sol.h_coefficient * static_cast<double>(H) > rest)) H += 2;

  constexpr int kMaxSteps = 1'000'000;
  for (int step = 0; step < kMaxSteps && H <= p.h_cap; ++step, H += 2) {
    // Smallest L >= 1 with (L+1)/coutD > lhs1.
    std::int64_t low = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(red_lhs(p, H) * c.coutD)) - 2);
    while (!red_infects_b(p, H, low)) ++low;
    // Largest L with 2c + (L+1)/cinD < lhs2.
    std::int64_t high =
        static_cast<std::int64_t>(std::ceil((white_lhs(p, H) - 2.0 * p.frak_c) * c.cinD)) + 1;
    while (high >= low && !white_infects_b(p, H, high)) --high;
    if (high < low) continue;

    sol.H = H;
    sol.L = low;
    sol.l_low = low;
    sol.l_high = high;
    sol.lhs1 = red_lhs(p, H);
    sol.rhs1 = red_rhs(p, low);
    sol.lhs2 = white_lhs(p, H);
    sol.rhs2 = white_rhs(p, low);
    sol.feasible = red_infects_b(p, H, low) && white_infects_b(p, H, low);
    if (!sol.feasible) sol.diagnostics = "post-check by substitution failed";
    return sol;
  }
  sol.diagnostics = "no admissible L found for H up to the cap";
  return sol;
}

PathExtremes sample_path_extremes(const RateEstimateRequest& q) {
  if (q.d < 1) throw InvalidParameter("family arity d must be >= 1");
  if (!(q.gamma > 0.0)) throw InvalidParameter("gamma must be positive");
  if (q.k_min < 1 || q.k_max < q.k_min) throw InvalidParameter("need 1 <= k_min <= k_max");
  if (q.trials < 1) throw InvalidParameter("trials must be positive");
  if (q.d >= 2 && q.k_max * std::log2(static_cast<double>(q.d)) > 24.0) {
    throw ResourceLimit("d^k_max exceeds 2^24 paths per trial");
  }
  const auto levels = static_cast<std::size_t>(q.k_max - q.k_min + 1);
  PathExtremes out;
  out.fastest.assign(levels, std::vector<double>(static_cast<std::size_t>(q.trials)));
  out.slowest.assign(levels, std::vector<double>(static_cast<std::size_t>(q.trials)));

  std::vector<double> level, next;
  for (int t = 0; t < q.trials; ++t) {
    Engine rng = trial_engine(q.master_seed, static_cast<std::uint64_t>(t), Stream::auxiliary);
    level.assign(1, 0.0);
    for (int k = 1; k <= q.k_max; ++k) {
      next.clear();
      next.reserve(level.size() * static_cast<std::size_t>(q.d));
      for (double parent : level) {
        for (int j = 0; j < q.d; ++j) next.push_back(parent + exponential(rng, q.gamma));
      }
      level.swap(next);
      if (k >= q.k_min) {
        auto [lo, hi] = std::minmax_element(level.begin(), level.end());
        const auto row = static_cast<std::size_t>(k - q.k_min);
        out.fastest[row][static_cast<std::size_t>(t)] = *lo;
        out.slowest[row][static_cast<std::size_t>(t)] = *hi;
      }
    }
  }
  return out;
}

RateEstimate estimate_rate_constants(const RateEstimateRequest& q) {
  if (q.trials < 1000) throw InvalidParameter("rate-constant estimation needs >= 1000 trials");
  if (!(q.target_exponent_in > 0.0) || !(q.target_exponent_out > 0.0)) {
    throw InvalidParameter("target exponents must be positive");
  }
  if (!(q.grid_step > 0.0 && q.grid_step < 1.0)) throw InvalidParameter("grid step must lie in (0, 1)");

  PathExtremes samples = sample_path_extremes(q);
  for (auto& v : samples.fastest) std::sort(v.begin(), v.end());
  for (auto& v : samples.slowest) std::sort(v.begin(), v.end());
  const double n = q.trials;

  auto tail_in = [&](double c, int k) {
    const auto& v = samples.slowest[static_cast<std::size_t>(k - q.k_min)];
    const double threshold = k / (q.gamma * c);
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), threshold)) / n;
  };
  auto tail_out = [&](double c, int k) {
    const auto& v = samples.fastest[static_cast<std::size_t>(k - q.k_min)];
    const double threshold = k / (q.gamma * c);
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), threshold) - v.begin()) / n;
  };
  auto admissible = [&](auto tail, double c, double exponent) {
    for (int k = q.k_min; k <= q.k_max; ++k) {
      if (tail(c, k) > std::exp(-exponent * k)) return false;
    }
    return true;
  };

  RateEstimate est;
  for (int i = 1;; ++i) {
    const double c = 1.0 - i * q.grid_step;
    if (c <= 0.0) break;
    if (admissible(tail_in, c, q.target_exponent_in)) {
      est.cin_hat = c;
      break;
    }
  }
  for (int i = 1;; ++i) {
    const double c = 1.0 + i * q.grid_step;
    if (c > q.cout_max) break;
    if (admissible(tail_out, c, q.target_exponent_out)) {
      est.cout_hat = c;
      break;
    }
  }
  if (!est.cin_hat) est.warnings.push_back("no admissible c_in on the grid");
  if (!est.cout_hat) est.warnings.push_back("no admissible c_out up to cout_max");

  const double smallest_target =
      std::exp(-std::max(q.target_exponent_in, q.target_exponent_out) * q.k_max);
  if (smallest_target * n < 1.0) {
    est.warnings.push_back(
        "estimate-unstable: target tail e^(-c k) drops below 1/trials within the k range");
  }

  for (int k = q.k_min; k <= q.k_max; ++k) {
    RateEstimateRow row{k, 0.0, 0.0, std::nullopt, std::nullopt};
    if (est.cin_hat) {
      row.tail_in = tail_in(*est.cin_hat, k);
      if (row.tail_in > 0.0) row.exponent_in = -std::log(row.tail_in) / k;
    }
    if (est.cout_hat) {
      row.tail_out = tail_out(*est.cout_hat, k);
      if (row.tail_out > 0.0) row.exponent_out = -std::log(row.tail_out) / k;
    }
    est.rows.push_back(row);
  }
  return est;
}

}  // namespace fpphe
