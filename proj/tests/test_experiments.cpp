#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <memory>
#include <numeric>

#include "fpphe/brwdiag.hpp"
#include "fpphe/error.hpp"
#include "fpphe/experiments.hpp"
#include "fpphe/graph.hpp"
#include "fpphe/rng.hpp"
#include "fpphe/seeding.hpp"
#include "fpphe/sim.hpp"

using namespace fpphe;

namespace {

std::shared_ptr<const Graph> shared(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

Graph triangle() {
  return Graph(3, {{0, 1}, {0, 2}, {1, 2}}, {{"O", 0}, {"a", 1}, {"B", 2}},
               {Role::origin, Role::generic, Role::tail}, {0, 1, 1});
}

const TileParams kSmallTile{2, 1, 2, 2};

double se(const EstimateResult& r) {
  return std::sqrt(std::max(r.p_hat * (1 - r.p_hat), 1e-12) / static_cast<double>(r.trials));
}

SweepRow row_with(std::uint64_t successes, std::uint64_t trials) {
  SweepRow r;
  r.estimate = make_estimate(successes, trials);
  return r;
}

}  // namespace

TEST_CASE("Wilson estimate through make_estimate") {
  const EstimateResult r = make_estimate(50, 100);
  CHECK(r.ci_low == doctest::Approx(0.40382982859014716).epsilon(1e-12));
  CHECK(r.ci_high == doctest::Approx(0.5961701714098528).epsilon(1e-12));
  CHECK_THROWS_AS(make_estimate(5, 4), InvalidParameter);
}

TEST_CASE("an event that always holds") {
  TrialPlan plan;
  plan.graph = shared(build_path(3));
  plan.origin = "root";
  plan.event = {EventKind::target_fpp1, "root"};
  plan.mu = 0.5;
  plan.trials = 200;
  plan.master_seed = 1;
  const EstimateResult r = estimate_event(plan);
  CHECK(r.successes == 200);
  CHECK(r.p_hat == 1.0);
  CHECK(r.ci_high == 1.0);
  CHECK(r.ci_low <= r.p_hat);
}

TEST_CASE("triangle race through estimate_event") {
  TrialPlan plan;
  plan.graph = shared(triangle());
  plan.fixed_seeds = std::vector<VertexId>{1};
  plan.lambda = 1.0;
  plan.trials = 200'000;
  plan.master_seed = 2;
  const EstimateResult r = estimate_event(plan);
  CHECK(r.ci_low - 3 * se(r) <= 0.75);
  CHECK(r.ci_high + 3 * se(r) >= 0.75);
  CHECK(std::abs(r.p_hat - 0.75) < 3 * std::sqrt(0.75 * 0.25 / 200'000));
}

TEST_CASE("estimates do not depend on the worker count") {
  TrialPlan plan;
  plan.graph = shared(build_tile({3, 2, 3, 3}));
  plan.mu = 0.2;
  plan.lambda = 0.4;
  plan.trials = 3001;
  plan.master_seed = 3;
  plan.audit = true;
  std::vector<EstimateResult> results;
  for (int workers : {1, 3, 8}) {
    plan.workers = workers;
    results.push_back(estimate_event(plan));
  }
  for (const EstimateResult& r : results) {
    CHECK(r.successes == results[0].successes);
    CHECK(r.trial_log == results[0].trial_log);
    CHECK(r.ci_low == results[0].ci_low);
  }
}

TEST_CASE("audit log re-verifies trial by trial") {
  const Graph tile = build_tile({3, 1, 2, 2});
  TrialPlan plan;
  plan.graph = shared(tile);
  plan.mu = 0.15;
  plan.lambda = 0.3;
  plan.trials = 300;
  plan.master_seed = 4;
  plan.audit = true;
  const EstimateResult r = estimate_event(plan);
  REQUIRE(r.trial_log.size() == 300);
  CHECK(std::accumulate(r.trial_log.begin(), r.trial_log.end(), std::uint64_t{0}) == r.successes);
  const VertexId o = tile.require_landmark("O");
  const VertexId b = tile.require_landmark("B");
  const std::vector<VertexId> excluded{o};
  StopCondition stop;
  stop.target = b;
  for (std::uint64_t i = 0; i < 300; ++i) {
    Engine seed_rng = trial_engine(4, i, Stream::seeds);
    const SeedConfig seeds = place_seeds(tile, 0.15, excluded, seed_rng);
    Engine rng = trial_engine(4, i, Stream::dynamics);
    const SimOutcome out = simulate(tile, o, seeds, 0.3, stop, rng);
    REQUIRE(r.trial_log[i] == (out.type[b] == ProcessType::fpp1 ? 1 : 0));
  }
}

TEST_CASE("estimate plan errors") {
  TrialPlan plan;
  plan.graph = shared(build_path(3));
  plan.trials = 10;
  CHECK_THROWS_AS(estimate_event(plan), InvalidParameter);  // no landmark B
  plan.event.target = "end";
  plan.trials = 0;
  CHECK_THROWS_AS(estimate_event(plan), InvalidParameter);
  plan.trials = 10;
  plan.mu = 1.5;
  CHECK_THROWS_AS(estimate_event(plan), InvalidParameter);
  plan.mu = 0.0;
  plan.lambda = 0.0;
  CHECK_THROWS_AS(estimate_event(plan), InvalidParameter);
  plan.lambda = 1.0;
  plan.event.target = "99";
  CHECK_THROWS_AS(estimate_event(plan), InvalidParameter);
  plan.event.target = "3";
  CHECK_NOTHROW(estimate_event(plan));
  CHECK_THROWS_AS(parse_event_kind("bogus"), InvalidParameter);
}

TEST_CASE("time events") {
  TrialPlan plan;
  plan.graph = shared(build_path(4));
  plan.event = {EventKind::target_time_le, "end", std::numeric_limits<double>::infinity()};
  plan.trials = 500;
  plan.master_seed = 5;
  CHECK(estimate_event(plan).p_hat == 1.0);
  plan.event = {EventKind::target_time_ge, "end", 0.0};
  CHECK(estimate_event(plan).p_hat == 1.0);
  // P(Gamma(4, 1) <= 4) = 0.56652987963...
  plan.event = {EventKind::target_time_le, "end", 4.0};
  plan.trials = 20'000;
  const EstimateResult r = estimate_event(plan);
  CHECK(std::abs(r.p_hat - 0.5665298796332909) < 3 * std::sqrt(0.25 / 20'000));
}

TEST_CASE("sweep extremes and bookkeeping") {
  SweepRequest q;
  q.tile = kSmallTile;
  q.lambda = 0.3;
  q.mu_list = {0.0, 0.3, 1.0};
  q.trials = 4000;
  q.master_seed = 6;
  const SweepReport rep = tile_sweep(q);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].estimate.p_hat == 1.0);
  CHECK(rep.rows[2].estimate.p_hat == 0.0);
  for (const SweepRow& row : rep.rows) {
    CHECK(row.side_violations == 0);
    CHECK(row.upper_fpp1 + row.lower_fpp1 == row.estimate.successes);
    CHECK(row.upper_fpp1 + row.lower_fpp1 + row.upper_lambda + row.lower_lambda == q.trials);
    std::uint64_t seeded = 0;
    for (const auto& [side, levels] : row.seed_levels) {
      for (const auto& [level, count] : levels) seeded += count;
    }
    CHECK(seeded == row.upper_lambda + row.lower_lambda);
  }
  CHECK(rep.rows[1].upper_fpp1 > 0);
  CHECK(rep.rows[1].lower_fpp1 > 0);
  CHECK_THROWS_AS(tile_sweep(SweepRequest{}), InvalidParameter);
}

TEST_CASE("sweep rows do not depend on the worker count") {
  SweepRequest q;
  q.tile = kSmallTile;
  q.lambda = 0.2;
  q.mu_list = {0.05, 0.2, 0.5};
  q.trials = 2000;
  q.master_seed = 7;
  q.workers = 1;
  const SweepReport one = tile_sweep(q);
  q.workers = 8;
  const SweepReport eight = tile_sweep(q);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].estimate.successes == eight.rows[i].estimate.successes);
    CHECK(one.rows[i].seed_levels == eight.rows[i].seed_levels);
    CHECK(one.rows[i].upper_lambda == eight.rows[i].upper_lambda);
  }
}

TEST_CASE("lambda = 1 control column is nonincreasing") {
  SweepRequest q;
  q.tile = kSmallTile;
  q.lambda = 1.0;
  q.mu_list = {0.0, 0.05, 0.1, 0.2, 0.4, 0.7};
  q.trials = 20'000;
  q.master_seed = 8;
  const SweepReport rep = tile_sweep(q);
  CHECK(rep.monotonicity.nonincreasing);
  CHECK_FALSE(rep.monotonicity.nonmonotone_witness);
  CHECK(rep.monotonicity.step_z.size() == 5);
  // Common random numbers make the coupling exact: every trial won by FPP1
  // at a larger mu is also won at every smaller mu.
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].estimate.successes >= rep.rows[i + 1].estimate.successes);
  }
}

TEST_CASE("lambda = 1 rows match one simulation per mu and trial") {
  // The sweep shares one run across mu when lambda = 1. Replaying each
  // (mu, trial) pair through the simulator must reproduce every row field.
  SweepRequest q;
  q.tile = TileParams{2, 2, 3, 3};
  q.lambda = 1.0;
  q.mu_list = {0.0, 0.1, 0.35, 1.0};
  q.trials = 400;
  q.master_seed = 21;
  q.workers = 3;
  const SweepReport rep = tile_sweep(q);

  const Graph g = build_tile(q.tile);
  const VertexId o = g.require_landmark("O");
  const VertexId b = g.require_landmark("B");
  const VertexId excluded[] = {o};
  StopCondition stop;
  stop.target = b;
  Simulator sim(g);
  REQUIRE(rep.rows.size() == q.mu_list.size());
  for (std::size_t k = 0; k < q.mu_list.size(); ++k) {
    SweepRow want;
    for (std::uint64_t i = 0; i < q.trials; ++i) {
      Engine seed_rng = trial_engine(q.master_seed, i, Stream::seeds);
      const SeedConfig seeds = place_seeds(g, q.mu_list[k], excluded, seed_rng);
      Engine dyn = trial_engine(q.master_seed, i, Stream::dynamics);
      const SimOutcome& out = sim.run(o, seeds, 1.0, stop, dyn);
      const bool upper = g.role(out.parent[b]) == Role::upper;
      if (out.type[b] == ProcessType::fpp1) {
        ++want.estimate.successes;
        ++(upper ? want.upper_fpp1 : want.lower_fpp1);
      } else {
        ++(upper ? want.upper_lambda : want.lower_lambda);
        ++want.seed_levels[std::string(to_string(g.role(*out.winning_seed)))]
                          [*out.winning_seed_level];
      }
    }
    const SweepRow& got = rep.rows[k];
    CHECK(got.estimate.successes == want.estimate.successes);
    CHECK(got.upper_fpp1 == want.upper_fpp1);
    CHECK(got.lower_fpp1 == want.lower_fpp1);
    CHECK(got.upper_lambda == want.upper_lambda);
    CHECK(got.lower_lambda == want.lower_lambda);
    CHECK(got.seed_levels == want.seed_levels);
  }
  CHECK(rep.rows.front().estimate.successes == q.trials);
  CHECK(rep.rows.back().estimate.successes == 0);
}

TEST_CASE("monotonicity report on synthetic rows") {
  const std::vector<SweepRow> up_down{row_with(5000, 10'000), row_with(3000, 10'000),
                                      row_with(5000, 10'000)};
  const MonotonicityReport a = monotonicity_report(up_down);
  CHECK(a.step_sign == std::vector<int>{-1, 1});
  CHECK(a.nonmonotone_witness);
  CHECK(a.witnesses.size() == 1);
  CHECK_FALSE(a.nonincreasing);

  const std::vector<SweepRow> flat{row_with(5000, 10'000), row_with(5010, 10'000),
                                   row_with(4990, 10'000)};
  const MonotonicityReport b = monotonicity_report(flat);
  CHECK(b.step_sign == std::vector<int>{0, 0});
  CHECK_FALSE(b.nonmonotone_witness);
  CHECK(b.nonincreasing);
  // Bonferroni over two comparisons raises the threshold above 3.
  CHECK(b.z_critical > 3.0);
  CHECK(b.z_critical == doctest::Approx(3.2052).epsilon(1e-3));
}

TEST_CASE("restricted events: trivial thresholds and the cap at mu = 0") {
  RestrictedRequest q;
  q.tile = kSmallTile;
  q.side = Side::upper;
  q.mu = 0.0;
  q.lambda = 0.3;
  q.thresholds = {{"forever", std::numeric_limits<double>::infinity(), true, false}};
  q.trials = 2000;
  q.master_seed = 9;
  const RestrictedReport r = restricted_events(q);
  REQUIRE(r.events.size() == 3);
  CHECK(r.events[0].first == "target_fpp1");
  CHECK(r.events[1].first == "cap_fpp1");
  CHECK(r.events[1].second.p_hat == 1.0);
  CHECK(r.events[2].first == "forever");
  CHECK(r.events[2].second.p_hat == 1.0);
  CHECK_FALSE(r.lemma_bound);
}

TEST_CASE("restricted lower side at mu = 0 matches the tree diagnostic") {
  const TileParams tile{2, 1, 4, 3};
  RestrictedRequest q;
  q.tile = tile;
  q.side = Side::lower;
  q.mu = 0.0;
  q.lambda = 0.5;
  q.trials = 20'000;
  q.master_seed = 10;
  const RestrictedReport r = restricted_events(q);
  // O -> O_low, quickest arrival at the cap one level below the binary tree,
  // then R edges to B.
  const MinPassageSamples m = min_passage({2, 0.0}, 1.0, tile.H + 1, 20'000, 11);
  const double m_mean = std::accumulate(m.values.begin(), m.values.end(), 0.0) / m.values.size();
  double m_ss = 0.0;
  for (double x : m.values) m_ss += (x - m_mean) * (x - m_mean);
  const double m_var = m_ss / (m.values.size() - 1);
  const double expected = 1.0 + m_mean + tile.R;
  const double sigma = std::sqrt(r.sd_passage * r.sd_passage / q.trials + m_var / m.values.size());
  CHECK(std::abs(r.mean_passage - expected) < 3 * sigma);
}

TEST_CASE("restricted lemma bound") {
  RestrictedRequest q;
  q.tile = kSmallTile;
  q.side = Side::lower;
  q.mu = 0.1;
  q.lambda = 0.3;
  q.trials = 500;
  q.master_seed = 12;
  q.lemma = LemmaInputs{0.0, 0.0};
  const RestrictedReport r = restricted_events(q);
  REQUIRE(r.lemma_bound);
  const double f = gw_extinction({2, 0.1});
  CHECK(*r.lemma_bound == doctest::Approx(std::pow(0.9, 2) * (1 - f) * std::pow(0.9, 2)));
}

TEST_CASE("survival proxy at mu = 0") {
  SurvivalRequest q;
  q.phi = 2;
  q.depth = 2;
  q.tile = kSmallTile;
  q.mu = 0.0;
  q.lambda = 0.5;
  q.trials = 300;
  q.master_seed = 13;
  const SurvivalReport r = survival_proxy(q);
  CHECK(r.direct.p_hat == 1.0);
  CHECK(r.tile.p_hat == 1.0);
  CHECK(r.approx == doctest::Approx(1.0));
}

TEST_CASE("survival proxy at depth 1 equals the independent-tile value") {
  SurvivalRequest q;
  q.phi = 3;
  q.depth = 1;
  q.tile = kSmallTile;
  q.mu = 0.25;
  q.lambda = 0.3;
  q.trials = 20'000;
  q.master_seed = 14;
  const SurvivalReport r = survival_proxy(q);
  const double p = r.tile.p_hat;
  const double predicted = 1.0 - std::pow(1.0 - p, q.phi);
  CHECK(r.approx == doctest::Approx(predicted).epsilon(1e-12));
  // Delta method for the prediction plus the direct estimate's own error.
  const double d_pred = q.phi * std::pow(1.0 - p, q.phi - 1) * se(r.tile);
  const double sigma = std::sqrt(d_pred * d_pred + se(r.direct) * se(r.direct));
  CHECK(std::abs(r.direct.p_hat - predicted) < 3 * sigma);
  CHECK(r.direct.p_hat >= predicted - 3 * sigma);
  CHECK(r.gap == doctest::Approx(r.direct.p_hat - r.approx));
}

TEST_CASE("independent-tile reach") {
  const auto sub = independent_tile_reach(2, 10, 0.3);
  for (std::size_t k = 1; k < sub.size(); ++k) CHECK(sub[k] < sub[k - 1]);
  CHECK(sub.back() < 0.1);
  const auto super = independent_tile_reach(3, 40, 0.6);
  // Converges to the survival probability of Bin(3, 0.6) branching.
  CHECK(super.back() == doctest::Approx(1.0 - gw_extinction({3, 0.4})).epsilon(1e-6));
  CHECK(independent_tile_reach(4, 1, 0.2)[0] == doctest::Approx(1 - std::pow(0.8, 4)));
  CHECK_THROWS_AS(independent_tile_reach(0, 1, 0.2), InvalidParameter);
}

TEST_CASE("confidence-interval self-test") {
  const CoverageReport zero = ci_selftest(200, 100, 0.0, 15);
  CHECK(zero.coverage == 1.0);
  const CoverageReport one = ci_selftest(200, 100, 1.0, 16);
  CHECK(one.coverage == 1.0);
  const CoverageReport half = ci_selftest(400, 1000, 0.5, 17, 1.96, 3);
  CHECK(half.coverage > 0.9);
  CHECK(ci_selftest(400, 1000, 0.5, 17, 1.96, 1).covered == half.covered);
  CHECK_THROWS_AS(ci_selftest(0, 10, 0.5, 1), InvalidParameter);
}
