#include "fpphe/brwdiag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "fpphe/error.hpp"
#include "fpphe/rng.hpp"

namespace fpphe {

namespace {

void check_common(const GwSpec& spec, double gamma, int depth, int trials) {
  spec.validate();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be positive");
  if (depth < 1) throw InvalidParameter("generation depth must be >= 1");
  if (trials < 1) throw InvalidParameter("trials must be positive");
}

// Survival has positive probability: supercritical, or d = 1 without seeds.
bool can_survive(const GwSpec& spec) { return spec.supercritical() || spec.mu == 0.0; }

struct LineFit {
  double intercept;
  double slope;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace

std::vector<BrwSample> sample_brw(const GwSpec& spec, double gamma, int max_gen, int trials,
                                  std::uint64_t master_seed, std::size_t individual_cap) {
  check_common(spec, gamma, max_gen, trials);
  const double keep = 1.0 - spec.mu;
  std::vector<BrwSample> out;
  out.reserve(static_cast<std::size_t>(trials));
  std::size_t total = 0;
  for (int t = 0; t < trials; ++t) {
    Engine rng = trial_engine(master_seed, static_cast<std::uint64_t>(t), Stream::auxiliary);
    BrwSample s;
    s.generation_sizes.assign(static_cast<std::size_t>(max_gen) + 1, 0);
    s.birth_times.resize(static_cast<std::size_t>(max_gen) + 1);
    s.generation_sizes[0] = 1;
    s.birth_times[0] = {0.0};
    for (int j = 1; j <= max_gen; ++j) {
      const auto& parents = s.birth_times[static_cast<std::size_t>(j - 1)];
      auto& children = s.birth_times[static_cast<std::size_t>(j)];
      for (double born : parents) {
        for (int slot = 0; slot < spec.d; ++slot) {
          if (bernoulli(rng, keep)) children.push_back(born + exponential(rng, gamma));
        }
      }
      total += children.size();
      if (total > individual_cap) {
        throw ResourceLimit("branching random walk exceeded the individual cap of " +
                            std::to_string(individual_cap));
      }
      s.generation_sizes[static_cast<std::size_t>(j)] = children.size();
      if (children.empty()) break;
      s.survived_to = j;
    }
    out.push_back(std::move(s));
  }
  return out;
}

MinPassageSamples min_passage(const GwSpec& spec, double gamma, int n, int trials,
                              std::uint64_t master_seed, std::size_t individual_cap) {
  check_common(spec, gamma, n, trials);
  if (!can_survive(spec)) {
    throw InvalidParameter("minimum passage needs a supercritical spec (d(1 - mu) > 1)");
  }
  const double keep = 1.0 - spec.mu;
  MinPassageSamples out;
  out.gamma = gamma;
  out.level = n;

  struct Individual {
    double born;
    int generation;
    bool operator>(const Individual& o) const noexcept { return born > o.born; }
  };
  std::priority_queue<Individual, std::vector<Individual>, std::greater<>> frontier;

  for (int t = 0; t < trials; ++t) {
    Engine rng = trial_engine(master_seed, static_cast<std::uint64_t>(t), Stream::auxiliary);
    frontier = {};
    frontier.push({0.0, 0});
    std::size_t explored = 0;
    std::optional<double> arrival;
    while (!frontier.empty()) {
      const Individual u = frontier.top();
      frontier.pop();
      if (u.generation == n) {
        arrival = u.born;
        break;
      }
      if (++explored > individual_cap) {
        throw ResourceLimit("minimum-passage search exceeded the individual cap");
      }
      for (int slot = 0; slot < spec.d; ++slot) {
        if (bernoulli(rng, keep)) frontier.push({u.born + exponential(rng, gamma), u.generation + 1});
      }
    }
    if (arrival) {
      out.values.push_back(*arrival);
    } else {
      ++out.discarded_extinct;
    }
  }
  if (static_cast<double>(out.discarded_extinct) > 0.99 * trials) {
    throw Unstable("more than 99% of trials went extinct before level " + std::to_string(n));
  }
  return out;
}

ConcentrationFit fit_concentration(const std::vector<double>& values,
                                   const ConcentrationOptions& options) {
  if (values.size() < 1000) throw InvalidParameter("concentration fit needs >= 1000 samples");
  if (!(options.start_tail > options.exclude_top && options.exclude_top > 0.0 &&
        options.start_tail < 1.0)) {
    throw InvalidParameter("need 0 < exclude_top < start_tail < 1");
  }
  if (options.grid_points < 3) throw InvalidParameter("need at least 3 grid points");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::abs(v - mean));
  std::sort(dev.begin(), dev.end());

  auto quantile = [&](double q) {
    return dev[static_cast<std::size_t>(std::floor(q * (n - 1.0)))];
  };
  ConcentrationFit fit;
  fit.alpha_from = quantile(1.0 - options.start_tail);
  fit.alpha_to = quantile(1.0 - options.exclude_top);
  if (!(fit.alpha_to > fit.alpha_from)) {
    throw Unstable("fit-undefined: samples are degenerate on the fit window");
  }

  std::vector<double> xs, ys;
  for (int i = 0; i < options.grid_points; ++i) {
    const double alpha =
        fit.alpha_from + (fit.alpha_to - fit.alpha_from) * i / (options.grid_points - 1);
    const auto above = static_cast<std::size_t>(dev.end() - std::upper_bound(dev.begin(), dev.end(), alpha));
    if (above < options.min_tail_count || above == 0) continue;
    xs.push_back(alpha);
    ys.push_back(std::log(static_cast<double>(above) / n));
  }
  if (xs.size() < 3) throw Unstable("fit-undefined: fewer than 3 usable tail points");
  const LineFit line = least_squares(xs, ys);
  fit.c_hat = std::exp(line.intercept);
  fit.delta_hat = -line.slope;
  fit.points = static_cast<int>(xs.size());
  return fit;
}

std::vector<BirthRow> generation_birth_stats(const GwSpec& spec, double c1, int max_gen,
                                             int trials, std::uint64_t master_seed) {
  if (!(c1 > 0.0)) throw InvalidParameter("C1 must be positive");
  const auto samples = sample_brw(spec, 1.0, max_gen, trials, master_seed);

  std::vector<BirthRow> rows;
  std::uint64_t conditioned = 0;
  std::vector<std::uint64_t> all_born(static_cast<std::size_t>(max_gen) + 1, 0);
  std::vector<double> sum_k(all_born.size(), 0.0), sum_n(all_born.size(), 0.0);
  std::vector<bool> k_le_n(all_born.size(), true);
  for (const BrwSample& s : samples) {
    if (s.survived_to < max_gen) continue;
    ++conditioned;
    for (int j = 1; j <= max_gen; ++j) {
      const auto& born = s.birth_times[static_cast<std::size_t>(j)];
      const double limit = c1 * j;
      const auto k = static_cast<std::uint64_t>(
          std::count_if(born.begin(), born.end(), [limit](double t) { return t <= limit; }));
      const std::uint64_t nj = s.generation_sizes[static_cast<std::size_t>(j)];
      if (k == nj) ++all_born[static_cast<std::size_t>(j)];
      if (k > nj) k_le_n[static_cast<std::size_t>(j)] = false;
      sum_k[static_cast<std::size_t>(j)] += static_cast<double>(k);
      sum_n[static_cast<std::size_t>(j)] += static_cast<double>(nj);
    }
  }
  if (conditioned == 0) throw Unstable("no trial survived to generation " + std::to_string(max_gen));
  const double c = static_cast<double>(conditioned);
  for (int j = 1; j <= max_gen; ++j) {
    const auto i = static_cast<std::size_t>(j);
    rows.push_back(BirthRow{j, conditioned, static_cast<double>(all_born[i]) / c, sum_k[i] / c,
                            sum_n[i] / c, 1.0 - std::exp(-j * c1 / 2.0) / c1, k_le_n[i]});
  }
  return rows;
}

namespace {

// Generation sizes only: N_{j+1} ~ Binomial(d N_j, 1 - mu).
template <class Visit>
void grow_sizes(const GwSpec& spec, int max_gen, int trials, std::uint64_t master_seed,
                Visit&& visit) {
  std::vector<std::uint64_t> sizes(static_cast<std::size_t>(max_gen) + 1);
  for (int t = 0; t < trials; ++t) {
    Engine rng = trial_engine(master_seed, static_cast<std::uint64_t>(t), Stream::auxiliary);
    std::fill(sizes.begin(), sizes.end(), 0);
    sizes[0] = 1;
    int reached = 0;
    for (int j = 1; j <= max_gen; ++j) {
      const std::uint64_t slots =
          sizes[static_cast<std::size_t>(j - 1)] * static_cast<std::uint64_t>(spec.d);
      if (spec.mu == 0.0) {
        sizes[static_cast<std::size_t>(j)] = slots;
      } else if (spec.mu == 1.0) {
        sizes[static_cast<std::size_t>(j)] = 0;
      } else {
        std::binomial_distribution<std::uint64_t> offspring(slots, 1.0 - spec.mu);
        sizes[static_cast<std::size_t>(j)] = offspring(rng);
      }
      if (sizes[static_cast<std::size_t>(j)] == 0) break;
      reached = j;
    }
    visit(sizes, reached);
  }
}

}  // namespace

InverseRateReport inverse_size_rate(const GwSpec& spec, int n_max, int trials,
                                    std::uint64_t master_seed) {
  check_common(spec, 1.0, n_max, trials);
  const auto cond = check_tech_cond(spec.d, spec.mu);
  if (!cond.supercritical || !cond.second_moment) {
    throw InvalidParameter("inverse-size rate needs d(1-mu) > 1 and d^2(1-mu)^2 mu^(d-1) < 1");
  }
  InverseRateReport report;
  report.limit = std::max(std::log(p_one(spec)), -std::log(spec.mean_offspring()));

  std::vector<double> sum_inverse(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<std::uint64_t> surviving(sum_inverse.size(), 0);
  grow_sizes(spec, n_max, trials, master_seed, [&](const auto& sizes, int reached) {
    for (int n = 1; n <= reached; ++n) {
      sum_inverse[static_cast<std::size_t>(n)] += 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(n)]);
      ++surviving[static_cast<std::size_t>(n)];
    }
  });
  if (static_cast<double>(surviving.back()) < 0.01 * trials) {
    throw Unstable("fewer than 1% of trials survived to generation " + std::to_string(n_max));
  }
  for (int n = 1; n <= n_max; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double mean = sum_inverse[i] / static_cast<double>(surviving[i]);
    report.rows.push_back(InverseRateRow{n, surviving[i], mean, std::log(mean) / n});
  }
  return report;
}

SandwichReport size_sandwich(const GwSpec& spec, double eps1, double eps_prime, int max_gen,
                             int trials, std::uint64_t master_seed) {
  check_common(spec, 1.0, max_gen, trials);
  if (!spec.supercritical()) throw InvalidParameter("size sandwich needs a supercritical spec");
  if (!(eps1 > 0.0 && eps1 < 1.0) || !(eps_prime > 0.0 && eps_prime < 1.0)) {
    throw InvalidParameter("eps1 and eps' must lie in (0, 1)");
  }
  const double m = spec.mean_offspring();
  std::vector<std::uint64_t> inside(static_cast<std::size_t>(max_gen) + 1, 0);
  std::uint64_t conditioned = 0;
  grow_sizes(spec, max_gen, trials, master_seed, [&](const auto& sizes, int reached) {
    if (reached < max_gen) return;
    ++conditioned;
    for (int j = 1; j <= max_gen; ++j) {
      const double nj = static_cast<double>(sizes[static_cast<std::size_t>(j)]);
      const double lo = eps_prime * std::pow(m, (1.0 - eps1) * j);
      const double hi = std::pow(m, (1.0 + eps1) * j) / eps_prime;
      if (nj >= lo && nj <= hi) ++inside[static_cast<std::size_t>(j)];
    }
  });
  if (conditioned == 0) throw Unstable("no trial survived to generation " + std::to_string(max_gen));

  SandwichReport report;
  std::vector<double> xs, ys;
  for (int j = 1; j <= max_gen; ++j) {
    const double p = static_cast<double>(inside[static_cast<std::size_t>(j)]) /
                     static_cast<double>(conditioned);
    report.rows.push_back(SandwichRow{j, conditioned, eps_prime * std::pow(m, (1.0 - eps1) * j),
                                      std::pow(m, (1.0 + eps1) * j) / eps_prime, p});
    if (p < 1.0) {
      xs.push_back(j);
      ys.push_back(std::log(1.0 - p));
    }
  }
  if (xs.size() >= 2) {
    const LineFit line = least_squares(xs, ys);
    report.c2_const = std::exp(line.intercept);
    report.c2_rate = -line.slope;
  }
  return report;
}

}  // namespace fpphe
