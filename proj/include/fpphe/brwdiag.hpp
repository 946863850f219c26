#pragma once

// Diagnostics for the branching random walk in continuous time that couples
// first passage percolation on trees: generation sizes of the non-seed
// Galton-Watson tree, birth times with Exp(gamma) increments, the quickest
// arrival at a level and concentration of that arrival.
//
// Conditioning on survival always means survival to the deepest level that
// the diagnostic looks at, enforced by rejection.

#include <cstdint>
#include <optional>
#include <vector>

#include "fpphe/analytics.hpp"

namespace fpphe {

inline constexpr std::size_t kDefaultIndividualCap = 50'000'000;

struct BrwSample {
  /// N_0 .. N_max_gen; zero after extinction.
  std::vector<std::uint64_t> generation_sizes;
  /// birth_times[j] lists the birth times of generation j (parent order).
  std::vector<std::vector<double>> birth_times;
  /// Deepest generation with at least one individual.
  int survived_to = 0;
};

std::vector<BrwSample> sample_brw(const GwSpec& spec, double gamma, int max_gen, int trials,
                                  std::uint64_t master_seed,
                                  std::size_t individual_cap = kDefaultIndividualCap);

struct MinPassageSamples {
  double gamma = 1.0;
  int level = 0;
  /// Quickest birth time at `level`, one per trial that reached it.
  std::vector<double> values;
  std::uint64_t discarded_extinct = 0;
};

/// Quickest arrival at generation n, found by growing the tree in birth-time
/// order and stopping at the first individual of generation n. Trials whose
/// tree dies out first are discarded and counted.
MinPassageSamples min_passage(const GwSpec& spec, double gamma, int n, int trials,
                              std::uint64_t master_seed,
                              std::size_t individual_cap = kDefaultIndividualCap);

struct ConcentrationOptions {
  /// Fit window in tail-probability terms: from the `start_tail` quantile of
  /// |M - mean| up to the point where only `exclude_top` of the mass remains.
  double start_tail = 0.10;
  double exclude_top = 0.01;
  std::size_t min_tail_count = 30;
  int grid_points = 64;
};

struct ConcentrationFit {
  double c_hat = 0.0;
  double delta_hat = 0.0;
  double alpha_from = 0.0;
  double alpha_to = 0.0;
  int points = 0;
};

/// Least-squares fit of ln P(|M - mean| > alpha) = ln C - delta alpha.
ConcentrationFit fit_concentration(const std::vector<double>& values,
                                   const ConcentrationOptions& options = {});

struct BirthRow {
  int generation;
  std::uint64_t conditioned;   ///< trials surviving to max_gen
  double p_all_born;           ///< P(every individual of generation j born by C1 j)
  double mean_born_in_time;    ///< E[K_j]
  double mean_size;            ///< E[N_j]
  double claimed_bound;        ///< 1 - (1/C1) e^(-j C1 / 2)
  bool k_le_n;                 ///< K_j <= N_j held in every sample
};

std::vector<BirthRow> generation_birth_stats(const GwSpec& spec, double c1, int max_gen,
                                             int trials, std::uint64_t master_seed);

struct InverseRateRow {
  int n;
  std::uint64_t surviving;
  double mean_inverse_size;
  double rate;  ///< (1/n) ln mean(1/N_n)
};

struct InverseRateReport {
  /// max{ln p_1, -ln(d(1 - mu))}
  double limit = 0.0;
  std::vector<InverseRateRow> rows;
};

InverseRateReport inverse_size_rate(const GwSpec& spec, int n_max, int trials,
                                    std::uint64_t master_seed);

struct SandwichRow {
  int generation;
  std::uint64_t conditioned;
  double lower;     ///< eps' m^((1 - eps1) j)
  double upper;     ///< (1/eps') m^((1 + eps1) j)
  double p_inside;
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  /// Fit of P(outside) ~ C2 e^(-c2 j) over generations with a violation.
  std::optional<double> c2_const;
  std::optional<double> c2_rate;
};

SandwichReport size_sandwich(const GwSpec& spec, double eps1, double eps_prime, int max_gen,
                             int trials, std::uint64_t master_seed);

}  // namespace fpphe
