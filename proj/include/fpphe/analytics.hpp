#pragma once

#include <cstdint>

namespace fpphe {

/// Galton-Watson law with Binomial(d, 1 - mu) offspring: the non-seed
/// children of a vertex in the d-ary tree.
struct GwSpec {
  int d = 2;
  double mu = 0.0;

  void validate() const;
  double mean_offspring() const noexcept { return d * (1.0 - mu); }
  bool supercritical() const noexcept { return mean_offspring() > 1.0; }
};

/// Smallest fixed point of q = (mu + (1 - mu) q)^d, i.e. the probability that
/// the non-seed cluster of the root is finite. Exactly 1 when d(1 - mu) <= 1.
double gw_extinction(const GwSpec& spec, double tol = 1e-12);

struct TechCondition {
  bool supercritical;   ///< d(1 - mu) > 1
  bool second_moment;   ///< d^2 (1 - mu)^2 mu^(d-1) < 1
  double second_moment_value;
};

TechCondition check_tech_cond(int d, double mu);

/// P(N_1 = 1) = d (1 - mu) mu^(d-1).
double p_one(const GwSpec& spec);

/// Smallest C with P(Exp(rate) < C) >= 1 - eps, i.e. -ln(eps) / rate.
double edge_quantile_const(double eps, double rate);

/// max{C(eps, 1), C(eps, lambda)}.
double uniform_edge_constant(double eps, double lambda);

/// Upper-tail bound for a sum of independent exponentials with minimal rate
/// a_star and the given mean: P(X >= (1 + delta) E X).
double janson_upper_tail(double a_star, double mean, double delta);

/// Lower-tail bound P(X <= (1 - delta) E X), 0 < delta < 1.
double janson_lower_tail(double a_star, double mean, double delta);

/// (1 - eta - f)(1 - mu2)^2, the success factor shared by the tile bounds.
double tile_success_factor(double mu2, double eta, double f);

/// Tile-tree branching number ceil(2 D^3 / (0.99 [(1 - eta - f)(1 - mu2)^2 - eps])).
std::int64_t phi_from_params(int D, double mu2, double eta, double f, double eps);

/// min{1/700, (1 - eta - f)(1 - mu2)^2}; may be nonpositive.
double epsilon_max(int D, double mu2, double eta, double f);

/// Critical open-probability of independent percolation on the phi-ary tree.
double tree_percolation_threshold(int phi);

}  // namespace fpphe
