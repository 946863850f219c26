#include "fpphe/analytics.hpp"

#include <cmath>
#include <string>

#include "fpphe/error.hpp"

namespace fpphe {

void GwSpec::validate() const {
  if (d < 1) throw InvalidParameter("offspring bound d must be >= 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidParameter("mu must lie in [0, 1]");
}

double gw_extinction(const GwSpec& spec, double tol) {
  spec.validate();
  if (!(tol > 0.0)) throw InvalidParameter("tolerance must be positive");
  if (!spec.supercritical()) return 1.0;

  const double mu = spec.mu;
  const int d = spec.d;
  auto g = [&](double q) { return std::pow(mu + (1.0 - mu) * q, d); };

  // Iterating the generating function from 0 increases monotonically to the
  // smallest fixed point.
  double q = 0.0;
  constexpr int kMaxIterations = 10'000;
  for (int i = 0; i < kMaxIterations; ++i) {
    const double next = g(q);
    if (std::abs(next - q) < tol / 10.0) return next;
    q = next;
  }
  // Near criticality the iteration is slow; h(q) = g(q) - q is convex and
  // positive left of the root, so Newton from q converges from below.
  for (int i = 0; i < 200; ++i) {
    const double h = g(q) - q;
    const double dh = d * (1.0 - mu) * std::pow(mu + (1.0 - mu) * q, d - 1) - 1.0;
    if (dh >= 0.0) break;
    const double step = h / dh;
    q -= step;
    if (std::abs(step) < tol / 10.0) break;
  }
  return q;
}

TechCondition check_tech_cond(int d, double mu) {
  GwSpec{d, mu}.validate();
  const double m = d * (1.0 - mu);
  const double second = m * m * std::pow(mu, d - 1);
  return {m > 1.0, second < 1.0, second};
}

double p_one(const GwSpec& spec) {
  spec.validate();
  return spec.d * (1.0 - spec.mu) * std::pow(spec.mu, spec.d - 1);
}

double edge_quantile_const(double eps, double rate) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
  if (!(rate > 0.0)) throw InvalidParameter("rate must be positive");
  return -std::log(eps) / rate;
}

double uniform_edge_constant(double eps, double lambda) {
  return std::max(edge_quantile_const(eps, 1.0), edge_quantile_const(eps, lambda));
}

namespace {

void check_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw InvalidParameter(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

double janson_upper_tail(double a_star, double mean, double delta) {
  check_positive(a_star, "a_star");
  check_positive(mean, "mean");
  check_positive(delta, "delta");
  const double bound =
      std::exp(-a_star * mean * (delta - std::log1p(delta))) / (1.0 + delta);
  return std::min(bound, 1.0);
}

double janson_lower_tail(double a_star, double mean, double delta) {
  check_positive(a_star, "a_star");
  check_positive(mean, "mean");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  const double bound = std::exp(-a_star * mean * (-delta - std::log1p(-delta)));
  return std::min(bound, 1.0);
}

double tile_success_factor(double mu2, double eta, double f) {
  return (1.0 - eta - f) * (1.0 - mu2) * (1.0 - mu2);
}

std::int64_t phi_from_params(int D, double mu2, double eta, double f, double eps) {
  if (D < 1) throw InvalidParameter("D must be >= 1");
  if (eta < 0.0) throw InvalidParameter("eta must be nonnegative");
  const double denominator = tile_success_factor(mu2, eta, f) - eps;
  if (!(denominator > 0.0)) {
    throw Infeasible("(1 - eta - f)(1 - mu2)^2 - eps must be positive, got " +
                     std::to_string(denominator));
  }
  const double d = D;
  return static_cast<std::int64_t>(std::ceil(2.0 * d * d * d / (0.99 * denominator)));
}

double epsilon_max(int /*D*/, double mu2, double eta, double f) {
  return std::min(1.0 / 700.0, tile_success_factor(mu2, eta, f));
}

double tree_percolation_threshold(int phi) {
  if (phi < 1) throw InvalidParameter("phi must be >= 1");
  return 1.0 / phi;
}

}  // namespace fpphe
