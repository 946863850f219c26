#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <random>

#include "fpphe/analytics.hpp"
#include "fpphe/error.hpp"
#include "fpphe/rng.hpp"
#include "support/oracles.hpp"

using namespace fpphe;
using fpphe::testing::gamma_cdf;
using fpphe::testing::gamma_sf;

namespace {

double binomial_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
         std::pow(p, k) * std::pow(1.0 - p, n - k);
}

double pgf(int d, double mu, double q) { return std::pow(mu + (1.0 - mu) * q, d); }

// Galton-Watson run with Binomial(d, p) offspring: generation sizes until
// extinction, the population cap or the generation cap.
std::vector<long> gw_generations(Engine& rng, int d, double p, int generations, long cap) {
  std::vector<long> sizes{1};
  long z = 1;
  for (int g = 0; g < generations && z > 0 && z < cap; ++g) {
    std::binomial_distribution<long> offspring(static_cast<long>(d) * z, p);
    z = offspring(rng);
    sizes.push_back(z);
  }
  return sizes;
}

}  // namespace

TEST_CASE("extinction examples") {
  CHECK(gw_extinction({2, 0.6}) == 1.0);
  CHECK(gw_extinction({2, 0.5}) == 1.0);
  CHECK(gw_extinction({2, 0.25}) == doctest::Approx(1.0 / 9.0).epsilon(1e-10));
  CHECK(gw_extinction({3, 0.3}) == doctest::Approx(0.03393495863987713).epsilon(1e-10));
  CHECK(gw_extinction({10, 0.6}) == doctest::Approx(0.006305666714021159).epsilon(1e-10));
  CHECK(gw_extinction({2, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gw_extinction({1, 0.0}) == 1.0);
  CHECK_THROWS_AS(gw_extinction({0, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(gw_extinction({2, 1.5}), InvalidParameter);
  CHECK_THROWS_AS(gw_extinction({2, 0.2}, 0.0), InvalidParameter);
}

TEST_CASE("extinction is the smallest fixed point") {
  const double tol = 1e-12;
  for (int d = 2; d <= 12; ++d) {
    for (double mu = 0.0; mu < 1.0; mu += 0.05) {
      const GwSpec spec{d, mu};
      const double q = gw_extinction(spec, tol);
      REQUIRE(std::abs(pgf(d, mu, q) - q) <= 10 * tol);
      if (spec.supercritical() && q > 10 * tol) {
        const double below = q - 10 * tol;
        REQUIRE(pgf(d, mu, below) > below);
      }
    }
  }
}

TEST_CASE("extinction is nondecreasing in mu") {
  for (int d = 2; d <= 8; ++d) {
    double last = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double q = gw_extinction({d, i / 200.0});
      REQUIRE(q >= last - 1e-12);
      last = q;
    }
  }
}

TEST_CASE("extinction frequency of simulated trees") {
  const int trees = 100'000;
  Engine rng = trial_engine(41, 0, Stream::auxiliary);
  int extinct = 0;
  for (int i = 0; i < trees; ++i) {
    extinct += gw_generations(rng, 3, 0.7, 200, 2000).back() == 0;
  }
  CHECK(fpphe::testing::binomial_z(extinct, trees, gw_extinction({3, 0.3})) < 3.0);
}

TEST_CASE("technical condition examples") {
  const TechCondition a = check_tech_cond(2, 0.0);
  CHECK(a.supercritical);
  CHECK(a.second_moment);
  const TechCondition b = check_tech_cond(10, 0.6);
  CHECK(b.supercritical);
  CHECK(b.second_moment);
  CHECK(b.second_moment_value == doctest::Approx(0.161243136).epsilon(1e-9));
  CHECK_FALSE(check_tech_cond(2, 0.6).supercritical);
}

TEST_CASE("p_one examples and the binomial pmf") {
  CHECK(p_one({1, 0.0}) == 1.0);
  CHECK(p_one({3, 0.3}) == doctest::Approx(0.189).epsilon(1e-12));
  CHECK(p_one({2, 1.0}) == 0.0);
  for (int d = 1; d <= 10; ++d) {
    for (double mu = 0.0; mu <= 1.0; mu += 0.1) {
      const double p = p_one({d, mu});
      REQUIRE(p <= 1.0);
      REQUIRE(p == doctest::Approx(binomial_pmf(d, 1, 1.0 - mu)).epsilon(1e-10));
    }
  }
}

TEST_CASE("edge quantile constants") {
  CHECK(edge_quantile_const(std::exp(-1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(edge_quantile_const(0.01, 0.5) == doctest::Approx(9.210340371976182).epsilon(1e-12));
  CHECK(uniform_edge_constant(0.05, 0.1) == edge_quantile_const(0.05, 0.1));
  CHECK(uniform_edge_constant(0.05, 3.0) == edge_quantile_const(0.05, 1.0));
  CHECK_THROWS_AS(edge_quantile_const(0.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(edge_quantile_const(0.5, 0.0), InvalidParameter);
  // The constant is the (1 - eps) quantile of Exp(rate).
  for (double eps : {0.001, 0.1, 0.6}) {
    for (double rate : {0.2, 1.0, 7.0}) {
      const double c = edge_quantile_const(eps, rate);
      REQUIRE(1.0 - std::exp(-rate * c) == doctest::Approx(1.0 - eps).epsilon(1e-12));
    }
  }
}

TEST_CASE("Janson tail examples") {
  CHECK(janson_upper_tail(1, 10, 1) == doctest::Approx(0.02324476403839224).epsilon(1e-12));
  CHECK(janson_lower_tail(1, 10, 0.5) == doctest::Approx(0.14493472568610996).epsilon(1e-12));
  CHECK(janson_upper_tail(1, 10, 1e-9) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(janson_lower_tail(1, 10, 1e-9) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(janson_upper_tail(1e-6, 1e-6, 5) <= 1.0);
  CHECK_THROWS_AS(janson_lower_tail(1, 10, 1.0), InvalidParameter);
  CHECK_THROWS_AS(janson_upper_tail(0, 10, 1.0), InvalidParameter);
}

TEST_CASE("Janson bounds dominate the exact Gamma tails") {
  for (int n : {1, 2, 5, 10, 30, 100}) {
    for (double rate : {0.5, 1.0, 3.0}) {
      const double mean = n / rate;
      for (double delta : {0.05, 0.2, 0.5, 0.9}) {
        REQUIRE(janson_upper_tail(rate, mean, delta) >= gamma_sf(n, rate, (1 + delta) * mean));
        REQUIRE(janson_lower_tail(rate, mean, delta) >= gamma_cdf(n, rate, (1 - delta) * mean));
      }
      for (double delta : {1.0, 2.0, 5.0}) {
        REQUIRE(janson_upper_tail(rate, mean, delta) >= gamma_sf(n, rate, (1 + delta) * mean));
      }
    }
  }
}

TEST_CASE("Janson bounds dominate simulated Gamma(10, 1) tails") {
  Engine rng = trial_engine(42, 0, Stream::auxiliary);
  const int n = 100'000;
  int upper = 0, lower = 0;
  for (int i = 0; i < n; ++i) {
    double x = 0.0;
    for (int k = 0; k < 10; ++k) x += exponential(rng, 1.0);
    upper += x >= 20.0;
    lower += x <= 5.0;
  }
  CHECK(janson_upper_tail(1, 10, 1) >= static_cast<double>(upper) / n);
  CHECK(janson_lower_tail(1, 10, 0.5) >= static_cast<double>(lower) / n);
}

TEST_CASE("branching number of the tile tree") {
  CHECK(phi_from_params(2, 0.5, 0, 0, 0) == 65);
  const double f = gw_extinction({10, 0.6});
  CHECK(phi_from_params(10, 0.6, 0.01, f, 0.001) == 12918);
  CHECK_THROWS_AS(phi_from_params(2, 0.5, 0, 0, 0.25), Infeasible);
  CHECK_THROWS_AS(phi_from_params(2, 0.5, 0.6, 0.5, 0), Infeasible);
  CHECK_THROWS_AS(phi_from_params(2, 0.5, -0.1, 0, 0), InvalidParameter);
}

TEST_CASE("largest admissible epsilon") {
  CHECK(epsilon_max(2, 0.999, 0, 0) == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK(epsilon_max(2, 0.0, 0, 0) == doctest::Approx(1.0 / 700.0).epsilon(1e-15));
  CHECK(epsilon_max(2, 0.3, 0.7, 0.5) <= 0.0);
}

TEST_CASE("tree percolation threshold") {
  CHECK(tree_percolation_threshold(2) == 0.5);
  CHECK(tree_percolation_threshold(100) == 0.01);
  CHECK(tree_percolation_threshold(1) == 1.0);
  CHECK_THROWS_AS(tree_percolation_threshold(0), InvalidParameter);
}

TEST_CASE("percolation clusters on the 3-ary tree either side of the threshold") {
  const double pc = tree_percolation_threshold(3);
  const int runs = 20'000;
  for (double p : {0.2, 0.5}) {
    Engine rng = trial_engine(43, static_cast<std::uint64_t>(p * 10), Stream::auxiliary);
    std::vector<double> mean_size(13, 0.0);
    int reach_deep = 0;
    for (int i = 0; i < runs; ++i) {
      const auto sizes = gw_generations(rng, 3, p, 12, 1L << 40);
      for (std::size_t k = 0; k < sizes.size(); ++k) mean_size[k] += sizes[k];
      reach_deep += sizes.size() == 13 && sizes.back() > 0;
    }
    const double survive = 1.0 - gw_extinction({3, 1.0 - p});
    if (p > pc) {
      CHECK(mean_size[12] > mean_size[4]);
      CHECK(mean_size[4] > mean_size[1]);
      CHECK(static_cast<double>(reach_deep) / runs >= survive - 0.02);
    } else {
      CHECK(mean_size[12] < mean_size[4]);
      CHECK(mean_size[4] < mean_size[1]);
      CHECK(static_cast<double>(reach_deep) / runs < 0.01);
    }
  }
}
