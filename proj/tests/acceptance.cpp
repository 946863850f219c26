// Acceptance checks, one PASS/FAIL line per criterion.
//
// Usage: acceptance --cli <path-to-fpphe> [criterion ...]
// With no criteria listed, all eleven run. Exit status is nonzero iff a listed
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpphe/analytics.hpp"
#include "fpphe/brwdiag.hpp"
#include "fpphe/experiments.hpp"
#include "fpphe/feasibility.hpp"
#include "fpphe/graph.hpp"
#include "fpphe/rng.hpp"
#include "fpphe/seeding.hpp"
#include "fpphe/sim.hpp"
#include "support/oracles.hpp"

using namespace fpphe;
using fpphe::testing::gamma_cdf;
using fpphe::testing::gamma_sf;
using fpphe::testing::ks_one_sample;
using fpphe::testing::ks_two_sample;
using fpphe::testing::mean_of;
using Json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Graph make_graph(std::size_t n, std::vector<Edge> edges) {
  return Graph(n, std::move(edges), {}, std::vector<Role>(n, Role::generic),
               std::vector<std::uint32_t>(n, 0));
}

StopCondition stop_at(VertexId target) {
  StopCondition s;
  s.target = target;
  return s;
}

double binomial_z(std::uint64_t hits, std::uint64_t n, double p) {
  const double nn = static_cast<double>(n);
  return std::abs(static_cast<double>(hits) - nn * p) / std::sqrt(nn * p * (1.0 - p));
}

// --- 1 -----------------------------------------------------------------------

Verdict gw_extinction_check() {
  const auto start = Clock::now();
  // q = (mu + (1 - mu) q)^2 with mu = 1/4: 9 q^2 - 10 q + 1 = 0, roots 1/9 and 1.
  const double a = 9.0, b = -10.0, c = 1.0;
  const double root = (-b - std::sqrt(b * b - 4 * a * c)) / (2 * a);
  const double q = gw_extinction({2, 0.25});
  const bool analytic = std::abs(q - root) < 1e-10;

  // Binomial(2, 3/4) offspring; a population of 200 dies out with probability
  // (1/9)^200, so reaching it counts as survival.
  Engine rng = trial_engine(101, 0, Stream::auxiliary);
  const int trees = 100'000;
  std::uint64_t extinct = 0;
  for (int t = 0; t < trees; ++t) {
    long z = 1;
    while (z > 0 && z < 200) {
      std::binomial_distribution<long> offspring(2 * z, 0.75);
      z = offspring(rng);
    }
    extinct += z == 0;
  }
  const double zscore = binomial_z(extinct, trees, root);
  const double secs = seconds_since(start);
  return {analytic && zscore < 3.0 && secs < 10.0,
          fmt("q=%.15f vs root %.15f; MC %.5f over %d trees (z=%.2f); %.2fs", q, root,
              static_cast<double>(extinct) / trees, trees, zscore, secs)};
}

// --- 2 -----------------------------------------------------------------------

// P(the seed's cluster reaches B first) on the triangle O=0, seed 1, B=2, by
// midpoint quadrature of the integral over the O-1 and 1-B clocks of
// P(O-B clock exceeds their sum).
double triangle_lambda_win_quadrature(double lambda) {
  const int n = 2000;
  const double x_max = 40.0, t_max = 40.0 / lambda;
  const double hx = x_max / n, ht = t_max / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * hx;
    for (int j = 0; j < n; ++j) {
      const double t = (j + 0.5) * ht;
      sum += std::exp(-x) * lambda * std::exp(-lambda * t) * std::exp(-(x + t));
    }
  }
  return sum * hx * ht;
}

Verdict triangle_race() {
  const auto start = Clock::now();
  const Graph g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const VertexId seed[] = {1};
  const SeedConfig seeds = fixed_seeds(g, seed);
  const StopCondition stop = stop_at(2);
  Simulator sim(g);
  const int n = 1'000'000;
  bool pass = true;
  std::string detail;
  for (double lambda : {1.0, 0.2}) {
    const double p = 1.0 - lambda / (2.0 * (1.0 + lambda));
    const double quad = 1.0 - triangle_lambda_win_quadrature(lambda);
    std::uint64_t fpp1 = 0;
    for (int i = 0; i < n; ++i) {
      Engine rng = trial_engine(202, static_cast<std::uint64_t>(i), Stream::dynamics);
      fpp1 += sim.run(0, seeds, lambda, stop, rng).type[2] == ProcessType::fpp1;
    }
    const double z = binomial_z(fpp1, n, p);
    pass = pass && z < 3.0 && std::abs(quad - p) < 1e-4;
    detail += fmt("lambda=%g: p=%.6f (quadrature %.6f) p_hat=%.6f z=%.2f; ", lambda, p, quad,
                  static_cast<double>(fpp1) / n, z);
  }
  const double secs = seconds_since(start);
  return {pass && secs < 60.0, detail + fmt("%.1fs", secs)};
}

// --- 3 -----------------------------------------------------------------------

Graph random_multigraph(Engine& rng, std::size_t n, std::size_t extra) {
  std::vector<Edge> edges;
  // A random spanning tree keeps every vertex reachable.
  for (VertexId v = 1; v < n; ++v) edges.push_back({static_cast<VertexId>(rng() % v), v});
  for (std::size_t i = 0; i < extra; ++i) {
    const auto a = static_cast<VertexId>(rng() % n);
    auto b = static_cast<VertexId>(rng() % n);
    if (a == b) b = (b + 1) % static_cast<VertexId>(n);
    edges.push_back({a, b});
  }
  return make_graph(n, std::move(edges));
}

Verdict dual_implementation() {
  const auto start = Clock::now();
  Engine graph_rng = trial_engine(303, 0, Stream::auxiliary);
  const int n = 100'000;
  const double lambda = 0.4;
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 5; ++k) {
    const std::size_t vertices = 4 + graph_rng() % 5;  // 4..8
    const Graph g = random_multigraph(graph_rng, vertices, vertices + graph_rng() % vertices);
    const auto target = static_cast<VertexId>(vertices - 1);
    // One or two seeds strictly between the origin and the target.
    std::vector<VertexId> seed_list{static_cast<VertexId>(1 + graph_rng() % (vertices - 2))};
    if (graph_rng() % 2 == 0) seed_list.push_back(static_cast<VertexId>(1 + graph_rng() % (vertices - 2)));
    const SeedConfig seeds = fixed_seeds(g, seed_list);
    const StopCondition stop = stop_at(target);

    Simulator sim(g);
    std::uint64_t lazy_fpp1 = 0, clock_fpp1 = 0;
    std::vector<double> lazy_t, clock_t;
    lazy_t.reserve(n);
    clock_t.reserve(n);
    for (int i = 0; i < n; ++i) {
      Engine a = trial_engine(310 + 2 * k, static_cast<std::uint64_t>(i), Stream::dynamics);
      const SimOutcome& lazy = sim.run(0, seeds, lambda, stop, a);
      lazy_fpp1 += lazy.type[target] == ProcessType::fpp1;
      lazy_t.push_back(lazy.time[target]);
      Engine b = trial_engine(311 + 2 * k, static_cast<std::uint64_t>(i), Stream::dynamics);
      const SimOutcome literal = explicit_clock_simulate(g, 0, seeds, lambda, stop, b);
      clock_fpp1 += literal.type[target] == ProcessType::fpp1;
      clock_t.push_back(literal.time[target]);
    }
    const double p1 = static_cast<double>(lazy_fpp1) / n;
    const double p2 = static_cast<double>(clock_fpp1) / n;
    const double pooled = (p1 + p2) / 2.0;
    const double z =
        pooled > 0.0 && pooled < 1.0 ? std::abs(p1 - p2) / std::sqrt(pooled * (1 - pooled) * 2.0 / n)
                                     : (p1 == p2 ? 0.0 : INFINITY);
    const double ks_p = ks_two_sample(lazy_t, clock_t).p_value;
    pass = pass && z < 3.0 && ks_p > 0.01;
    detail += fmt("G%d(n=%zu,m=%zu): z=%.2f KS p=%.3f; ", k + 1, vertices, g.edge_count(), z, ks_p);
  }
  return {pass, detail + fmt("%.1fs", seconds_since(start))};
}

// --- 4 -----------------------------------------------------------------------

Verdict gamma_law() {
  const Graph p = build_path(20);
  const SeedConfig none = fixed_seeds(p, {});
  const StopCondition stop = stop_at(20);
  Simulator sim(p);
  const int n = 10'000;
  std::vector<double> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) {
    Engine rng = trial_engine(404, static_cast<std::uint64_t>(i), Stream::dynamics);
    t.push_back(sim.run(0, none, 0.5, stop, rng).time[20]);
  }
  const double mean = mean_of(t);
  const double tol = 3.0 * std::sqrt(20.0) / std::sqrt(static_cast<double>(n));
  const double ks_p = ks_one_sample(t, [](double x) { return gamma_cdf(20, 1.0, x); }).p_value;
  return {std::abs(mean - 20.0) < tol && ks_p > 0.01,
          fmt("mean %.4f (20 +- %.4f), KS p=%.3f", mean, tol, ks_p)};
}

// --- 5 -----------------------------------------------------------------------

Verdict feasibility_system() {
  const auto start = Clock::now();
  const RateConstants c{0.5, 0.5, 0.5, 2.0, 2.0, 2.0};
  const double l0 = lambda_zero(c);
  FeasibilityProblem p;
  p.lambda = 0.01;
  p.constants = c;
  p.frak_c = 10.0;
  p.R = 100;
  const FeasibilitySolution s = solve_hl(p);
  const bool red = s.feasible && red_infects_b(p, s.H, s.L);
  const bool white = s.feasible && white_infects_b(p, s.H, s.L);
  const double secs = seconds_since(start);
  return {l0 == 0.25 / 7.75 && s.feasible && red && white && secs < 1.0,
          fmt("lambda_0=%.17g (0.25/7.75=%.17g); H=%lld L=%lld feasible=%d, substitution "
              "red=%d white=%d; %.3fs",
              l0, 0.25 / 7.75, static_cast<long long>(s.H), static_cast<long long>(s.L),
              s.feasible, red, white, secs)};
}

// --- 6 -----------------------------------------------------------------------

Verdict tech_condition() {
  const TechCondition a = check_tech_cond(10, 0.6);
  const TechCondition b = check_tech_cond(2, 0.6);
  const double expected = 16.0 * std::pow(0.6, 9);
  return {a.supercritical && a.second_moment &&
              std::abs(a.second_moment_value - expected) < 1e-12 && !b.supercritical,
          fmt("(10, 0.6) -> (%d, %d) with value %.6f vs 16*0.6^9=%.6f; (2, 0.6) -> "
              "supercritical=%d",
              a.supercritical, a.second_moment, a.second_moment_value, expected,
              b.supercritical)};
}

// --- 7 -----------------------------------------------------------------------

Verdict janson_dominance() {
  bool pass = true;
  int cells = 0;
  double tightest = INFINITY;
  for (double mean : {5.0, 10.0, 20.0}) {
    for (double delta : {0.25, 0.5, 1.0}) {
      const double upper = janson_upper_tail(1.0, mean, delta);
      const double exact_upper = gamma_sf(mean, 1.0, (1 + delta) * mean);
      pass = pass && upper > exact_upper;
      tightest = std::min(tightest, upper / exact_upper);
      ++cells;
      // The lower tail at delta = 1 is P(X <= 0) = 0, outside the bound's domain.
      if (delta < 1.0) {
        const double lower = janson_lower_tail(1.0, mean, delta);
        const double exact_lower = gamma_cdf(mean, 1.0, (1 - delta) * mean);
        pass = pass && lower > exact_lower;
        tightest = std::min(tightest, lower / exact_lower);
        ++cells;
      }
    }
  }
  return {pass, fmt("%d tail cells strictly dominated; smallest bound/exact ratio %.3f", cells,
                    tightest)};
}

// --- 8 -----------------------------------------------------------------------

Verdict brw_rate() {
  const auto start = Clock::now();
  const InverseRateReport r = inverse_size_rate({3, 0.3}, 20, 12'000, 808);
  const InverseRateRow& last = r.rows.back();
  const double target = -std::log(2.1);
  const double secs = seconds_since(start);
  return {last.n == 20 && last.surviving >= 10'000 && std::abs(last.rate - target) < 0.15 &&
              secs < 300.0,
          fmt("rate at n=20: %.4f vs -ln 2.1=%.4f over %llu survivors; %.1fs", last.rate,
              target, static_cast<unsigned long long>(last.surviving), secs)};
}

// --- 9 and 11: through the command-line tool ---------------------------------

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " 2>/dev/null";
  return std::system(cmd.c_str()) == 0;
}

std::vector<Json> read_jsonl(const std::filesystem::path& p) {
  std::vector<Json> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(Json::parse(line));
  }
  return rows;
}

Verdict sweep_determinism(const std::string& cli, const std::filesystem::path& dir) {
  const std::string common =
      "sweep --tile D=3,L=2,H=3,R=4 --lambda 0.2 --mu-list 0,0.05,0.2,0.5 --trials 20000 "
      "--master-seed 909";
  const auto one = dir / "workers1.jsonl";
  const auto eight = dir / "workers8.jsonl";
  const bool ran = run_cli(cli, common + " --workers 1 --out \"" + one.string() + "\"") &&
                   run_cli(cli, common + " --workers 8 --out \"" + eight.string() + "\"");
  const std::string a = read_file(one), b = read_file(eight);
  return {ran && !a.empty() && a == b,
          fmt("workers 1 vs 8: %zu vs %zu bytes, %s", a.size(), b.size(),
              a == b ? "identical" : "different")};
}

Verdict sweep_demonstration(const std::string& cli, const std::filesystem::path& dir) {
  const auto start = Clock::now();
  const std::string grid = "0,0.01,0.02,0.05,0.1,0.2,0.3,0.5,0.8";
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  bool emitted = true;
  bool control_monotone = false;
  std::string detail;
  for (const char* lambda : {"1", "0.05"}) {
    const auto out = dir / (std::string("sweep_lambda_") + lambda + ".jsonl");
    const bool ran = run_cli(cli, "sweep --tile D=4,L=6,H=8,R=20 --lambda " + std::string(lambda) +
                                      " --mu-list " + grid + " --trials 100000 --master-seed 1111" +
                                      " --workers " + std::to_string(workers) + " --out \"" +
                                      out.string() + "\"");
    const std::vector<Json> rows = ran ? read_jsonl(out) : std::vector<Json>{};
    if (rows.size() != 10) {
      emitted = false;
      detail += fmt("lambda=%s: %zu records; ", lambda, rows.size());
      continue;
    }
    std::string p_hats;
    for (std::size_t i = 0; i < 9; ++i) {
      const Json& r = rows[i];
      emitted = emitted && r.contains("winner_side") && r.contains("seed_levels");
      p_hats += fmt("%s%.4f", i == 0 ? "" : ",", r.value("p_hat", -1.0));
    }
    const Json& mono = rows.back();
    emitted = emitted && mono.value("estimand", "") == "monotonicity";
    const bool nonincreasing = mono.value("nonincreasing", false);
    if (std::string(lambda) == "1") control_monotone = nonincreasing;
    detail += fmt("lambda=%s: p_hat=[%s] nonincreasing=%d witnesses=%s; ", lambda, p_hats.c_str(),
                  nonincreasing, mono.value("witnesses", Json::array()).dump().c_str());
  }
  const double secs = seconds_since(start);
  detail += fmt("%.0fs on %u worker(s); records in %s", secs, workers, dir.string().c_str());
  return {emitted && control_monotone && secs < 1800.0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string cli;
  std::vector<int> selected;
  app.add_option("--cli", cli, "Path to the fpphe command-line tool")->required();
  app.add_option("criteria", selected, "Criteria to run (default: all)")
      ->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int i = 1; i <= 11; ++i) selected.push_back(i);
  }

  const auto dir = std::filesystem::temp_directory_path() /
                   ("fpphe-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);

  const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria{
      {1, {"GW extinction", gw_extinction_check}},
      {2, {"simulator race oracle", triangle_race}},
      {3, {"dual-implementation equivalence", dual_implementation}},
      {4, {"Gamma law on a path", gamma_law}},
      {5, {"feasibility system", feasibility_system}},
      {6, {"tech condition", tech_condition}},
      {7, {"Janson bounds dominate exact tails", janson_dominance}},
      {8, {"BRW inverse-size rate", brw_rate}},
      {9, {"sweep determinism across workers", [&] { return sweep_determinism(cli, dir); }}},
      {10, {"CI machinery", [] {
              bool pass = true;
              std::string detail;
              for (double p : {0.05, 0.5}) {
                const CoverageReport r = ci_selftest(1000, 1000, p, 1010, 1.96, 1);
                pass = pass && r.coverage >= 0.94 && r.coverage <= 0.97;
                detail += fmt("p=%.2f coverage %.3f; ", p, r.coverage);
              }
              return Verdict{pass, detail};
            }}},
      {11, {"tile sweep demonstration", [&] { return sweep_demonstration(cli, dir); }}},
  };

  int failures = 0;
  for (int id : std::set<int>(selected.begin(), selected.end())) {
    const auto& [name, check] = criteria.at(id);
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name
              << "): " << v.detail << std::endl;
  }
  // Criterion 11 keeps its records for inspection; everything else is removed.
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().filename().string().rfind("sweep_lambda_", 0) != 0) {
      std::filesystem::remove(entry.path());
    }
  }
  if (std::filesystem::is_empty(dir)) std::filesystem::remove(dir);
  return failures == 0 ? 0 : 1;
}
