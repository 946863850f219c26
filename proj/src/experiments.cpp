#include "fpphe/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>

#include "fpphe/analytics.hpp"
#include "fpphe/error.hpp"
#include "fpphe/parallel.hpp"
#include "fpphe/seeding.hpp"
#include "fpphe/stats.hpp"

namespace fpphe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_trials(std::uint64_t trials) {
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
}

void check_rates(double mu, double lambda) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidParameter("mu must lie in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be positive");
}

// Per-worker simulation state.
struct Worker {
  explicit Worker(const Graph& g) : sim(g) {}
  Simulator sim;
};

const SimOutcome& run_trial(Worker& w, const Graph& g, VertexId origin, double mu, double lambda,
                            const StopCondition& stop, std::uint64_t master, std::uint64_t i,
                            const SeedConfig* fixed) {
  const VertexId excluded[] = {origin};
  SeedConfig placed;
  if (fixed == nullptr) {
    Engine seed_rng = trial_engine(master, i, Stream::seeds);
    placed = place_seeds(g, mu, excluded, seed_rng);
  }
  Engine dyn_rng = trial_engine(master, i, Stream::dynamics);
  return w.sim.run(origin, fixed != nullptr ? *fixed : placed, lambda, stop, dyn_rng);
}

EstimateResult count_estimate(const std::vector<std::uint8_t>& hits, double z, bool keep_log,
                              Clock::time_point start) {
  const auto successes =
      static_cast<std::uint64_t>(std::count(hits.begin(), hits.end(), std::uint8_t{1}));
  EstimateResult r = make_estimate(successes, hits.size(), z);
  if (keep_log) r.trial_log = hits;
  r.wall_time_s = seconds_since(start);
  return r;
}

}  // namespace

EstimateResult make_estimate(std::uint64_t successes, std::uint64_t trials, double z) {
  check_trials(trials);
  if (successes > trials) throw InvalidParameter("successes exceed trials");
  EstimateResult r;
  r.successes = successes;
  r.trials = trials;
  r.z = z;
  r.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
  const Interval ci = wilson_interval(successes, trials, z);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  return r;
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::target_fpp1: return "target_fpp1";
    case EventKind::target_lambda: return "target_lambda";
    case EventKind::target_reached: return "target_reached";
    case EventKind::target_time_le: return "target_time_le";
    case EventKind::target_time_ge: return "target_time_ge";
  }
  return "target_fpp1";
}

EventKind parse_event_kind(std::string_view name) {
  for (EventKind k : {EventKind::target_fpp1, EventKind::target_lambda, EventKind::target_reached,
                      EventKind::target_time_le, EventKind::target_time_ge}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidParameter("unknown event kind '" + std::string(name) + "'");
}

VertexId resolve_vertex(const Graph& g, std::string_view name) {
  if (auto v = g.landmark(name)) return *v;
  VertexId id = 0;
  const char* end = name.data() + name.size();
  const auto [ptr, ec] = std::from_chars(name.data(), end, id);
  if (name.empty() || ec != std::errc() || ptr != end) {
    throw InvalidParameter("graph has no landmark '" + std::string(name) + "'");
  }
  if (!g.contains(id)) throw InvalidParameter("vertex " + std::string(name) + " not in graph");
  return id;
}

EstimateResult estimate_event(const TrialPlan& plan) {
  if (!plan.graph) throw InvalidParameter("trial plan has no graph");
  check_trials(plan.trials);
  check_rates(plan.mu, plan.lambda);
  const Graph& g = *plan.graph;
  const VertexId origin = plan.origin.empty() ? default_origin(g) : resolve_vertex(g, plan.origin);
  const VertexId target = resolve_vertex(g, plan.event.target);
  if ((plan.event.kind == EventKind::target_time_le ||
       plan.event.kind == EventKind::target_time_ge) &&
      std::isnan(plan.event.threshold)) {
    throw InvalidParameter("time event needs a threshold");
  }

  StopCondition stop = plan.stop;
  if (!stop.target) stop.target = target;
  stop.validate(g);

  std::optional<SeedConfig> fixed;
  if (plan.fixed_seeds) {
    fixed = fixed_seeds(g, *plan.fixed_seeds);
    if (fixed->seed(origin)) throw InvalidParameter("the origin must not host a seed");
  }

  const auto start = Clock::now();
  std::vector<std::uint8_t> hits(plan.trials, 0);
  const EventSpec ev = plan.event;
  parallel_trials(
      plan.trials, plan.workers, [&] { return Worker(g); },
      [&](Worker& w, std::uint64_t i) {
        const SimOutcome& out = run_trial(w, g, origin, plan.mu, plan.lambda, stop,
                                          plan.master_seed, i, fixed ? &*fixed : nullptr);
        const bool reached = out.infected(target);
        const double t = out.time[target];
        bool hit = false;
        switch (ev.kind) {
          case EventKind::target_fpp1: hit = reached && out.type[target] == ProcessType::fpp1; break;
          case EventKind::target_lambda:
            hit = reached && out.type[target] == ProcessType::fpp_lambda;
            break;
          case EventKind::target_reached: hit = reached; break;
          case EventKind::target_time_le: hit = reached && t <= ev.threshold; break;
          case EventKind::target_time_ge: hit = t >= ev.threshold; break;
        }
        hits[i] = hit ? 1 : 0;
      });
  return count_estimate(hits, plan.z, plan.audit, start);
}

MonotonicityReport monotonicity_report(const std::vector<SweepRow>& rows, double z_base) {
  MonotonicityReport rep;
  const std::size_t steps = rows.size() > 1 ? rows.size() - 1 : 0;
  const double alpha = 2.0 * (1.0 - normal_cdf(z_base));
  rep.z_critical = steps > 0 ? normal_quantile(1.0 - alpha / (2.0 * static_cast<double>(steps)))
                             : z_base;
  for (std::size_t i = 0; i < steps; ++i) {
    const EstimateResult& a = rows[i].estimate;
    const EstimateResult& b = rows[i + 1].estimate;
    const double z = two_proportion_z(a.successes, a.trials, b.successes, b.trials);
    rep.step_z.push_back(z);
    rep.step_sign.push_back(z > rep.z_critical ? 1 : (z < -rep.z_critical ? -1 : 0));
  }
  for (std::size_t i = 0; i < steps; ++i) {
    if (rep.step_sign[i] == 1) rep.nonincreasing = false;
    if (rep.step_sign[i] == 0) continue;
    for (std::size_t j = i + 1; j < steps; ++j) {
      if (rep.step_sign[j] == -rep.step_sign[i]) rep.witnesses.emplace_back(i, j);
    }
  }
  rep.nonmonotone_witness = !rep.witnesses.empty();
  return rep;
}

SweepReport tile_sweep(const SweepRequest& q) {
  if (q.mu_list.empty()) throw InvalidParameter("mu list must be nonempty");
  check_trials(q.trials);
  for (double mu : q.mu_list) check_rates(mu, q.lambda);
  q.tile.validate();
  const Graph g = build_tile(q.tile);
  const VertexId origin = g.require_landmark("O");
  const VertexId b = g.require_landmark("B");
  StopCondition stop;
  stop.target = b;

  struct TrialRecord {
    std::uint8_t fpp1 = 0;
    Role arrival = Role::generic;
    Role seed_side = Role::generic;
    std::uint32_t seed_level = 0;
    std::uint8_t violation = 0;
  };

  const std::size_t points = q.mu_list.size();
  std::vector<std::vector<TrialRecord>> records(points, std::vector<TrialRecord>(q.trials));
  // Fields that depend only on the path to B, not on which seed won.
  const auto record_path = [&](const SimOutcome& out, TrialRecord& r) {
    r.arrival = g.role(out.parent[b]);
    const Role other = r.arrival == Role::upper ? Role::lower : Role::upper;
    for (VertexId u = out.parent[b]; u != kNoVertex; u = out.parent[u]) {
      if (g.role(u) == other) r.violation = 1;
    }
  };

  std::vector<double> seconds(points);
  if (q.lambda == 1.0) {
    // Both types spread at rate 1, so the infection tree does not depend on
    // the seeds, and the dynamics stream is shared across mu. One run per
    // trial serves every mu: B is FPP_lambda iff some vertex on its chain is a
    // seed, and the first such vertex is the winning seed.
    const auto start = Clock::now();
    const SeedConfig none = fixed_seeds(g, {});
    parallel_trials(
        q.trials, q.workers, [&] { return Worker(g); },
        [&](Worker& w, std::uint64_t i) {
          const SimOutcome& out = run_trial(w, g, origin, 0.0, q.lambda, stop, q.master_seed, i,
                                            &none);
          Engine seed_rng = trial_engine(q.master_seed, i, Stream::seeds);
          const auto words = seed_words(g.vertex_count(), seed_rng);
          const auto chain = out.chain_to(b);
          TrialRecord path;
          record_path(out, path);
          for (std::size_t k = 0; k < points; ++k) {
            TrialRecord& r = records[k][i];
            r = path;
            r.fpp1 = 1;
            for (std::size_t j = 1; j < chain.size(); ++j) {
              if (!seeded(words[chain[j]], q.mu_list[k])) continue;
              r.fpp1 = 0;
              r.seed_side = g.role(chain[j]);
              r.seed_level = g.generation(chain[j]);
              break;
            }
          }
        });
    seconds.assign(points, seconds_since(start) / static_cast<double>(points));
  } else {
    for (std::size_t k = 0; k < points; ++k) {
      const auto start = Clock::now();
      parallel_trials(
          q.trials, q.workers, [&] { return Worker(g); },
          [&](Worker& w, std::uint64_t i) {
            const SimOutcome& out = run_trial(w, g, origin, q.mu_list[k], q.lambda, stop,
                                              q.master_seed, i, nullptr);
            TrialRecord& r = records[k][i];
            record_path(out, r);
            r.fpp1 = out.type[b] == ProcessType::fpp1 ? 1 : 0;
            if (out.winning_seed) {
              r.seed_side = g.role(*out.winning_seed);
              r.seed_level = *out.winning_seed_level;
            }
          });
      seconds[k] = seconds_since(start);
    }
  }

  SweepReport report;
  for (std::size_t k = 0; k < points; ++k) {
    SweepRow row;
    row.mu = q.mu_list[k];
    std::vector<std::uint8_t> hits(q.trials);
    for (std::uint64_t i = 0; i < q.trials; ++i) {
      const TrialRecord& r = records[k][i];
      hits[i] = r.fpp1;
      const bool upper = r.arrival == Role::upper;
      if (r.fpp1) {
        ++(upper ? row.upper_fpp1 : row.lower_fpp1);
      } else {
        ++(upper ? row.upper_lambda : row.lower_lambda);
        ++row.seed_levels[std::string(to_string(r.seed_side))][r.seed_level];
      }
      row.side_violations += r.violation;
    }
    row.estimate = count_estimate(hits, q.z, false, Clock::now());
    row.estimate.wall_time_s = seconds[k];
    report.rows.push_back(std::move(row));
  }
  report.monotonicity = monotonicity_report(report.rows);
  return report;
}

RestrictedReport restricted_events(const RestrictedRequest& q) {
  check_trials(q.trials);
  check_rates(q.mu, q.lambda);
  q.tile.validate();
  if (q.lemma) {
    if (!(q.lemma->eta >= 0.0) || !(q.lemma->eps >= 0.0 && q.lemma->eps < 1.0)) {
      throw InvalidParameter("lemma inputs need eta >= 0 and 0 <= eps < 1");
    }
  }
  for (const Threshold& t : q.thresholds) {
    if (std::isnan(t.value)) throw InvalidParameter("threshold '" + t.name + "' is not a number");
  }
  const Graph g = restrict_to_side(build_tile(q.tile), q.side);
  const VertexId origin = g.require_landmark("O");
  const VertexId b = g.require_landmark("B");
  const VertexId cap = g.require_landmark(q.side == Side::upper ? "W_up" : "W_low");
  StopCondition stop;
  stop.target = b;

  struct TrialRecord {
    double time = 0.0;
    std::uint8_t target_fpp1 = 0;
    std::uint8_t cap_fpp1 = 0;
  };
  const auto start = Clock::now();
  std::vector<TrialRecord> records(q.trials);
  parallel_trials(
      q.trials, q.workers, [&] { return Worker(g); },
      [&](Worker& w, std::uint64_t i) {
        const SimOutcome& out =
            run_trial(w, g, origin, q.mu, q.lambda, stop, q.master_seed, i, nullptr);
        TrialRecord& r = records[i];
        r.time = out.time[b];
        r.target_fpp1 = out.type[b] == ProcessType::fpp1 ? 1 : 0;
        r.cap_fpp1 = out.infected(cap) && out.type[cap] == ProcessType::fpp1 ? 1 : 0;
      });

  RestrictedReport rep;
  std::vector<std::uint8_t> hits(q.trials);
  auto add = [&](const std::string& name, auto predicate) {
    for (std::uint64_t i = 0; i < q.trials; ++i) hits[i] = predicate(records[i]) ? 1 : 0;
    rep.events.emplace_back(name, count_estimate(hits, q.z, false, start));
  };
  add("target_fpp1", [](const TrialRecord& r) { return r.target_fpp1 != 0; });
  add("cap_fpp1", [](const TrialRecord& r) { return r.cap_fpp1 != 0; });
  for (const Threshold& t : q.thresholds) {
    add(t.name, [&t](const TrialRecord& r) {
      const bool in_time = t.less_equal ? r.time <= t.value : r.time >= t.value;
      return in_time && (!t.require_cap_fpp1 || r.cap_fpp1 != 0);
    });
  }

  double sum = 0.0;
  for (const TrialRecord& r : records) sum += r.time;
  rep.mean_passage = sum / static_cast<double>(q.trials);
  double ss = 0.0;
  for (const TrialRecord& r : records) ss += (r.time - rep.mean_passage) * (r.time - rep.mean_passage);
  rep.sd_passage = q.trials > 1 ? std::sqrt(ss / static_cast<double>(q.trials - 1)) : 0.0;

  if (q.lemma) {
    const bool lower = q.side == Side::lower;
    const int d = lower ? 2 : q.tile.D;
    const double f = gw_extinction(GwSpec{d, q.mu});
    const double keep = (1.0 - q.mu) * (1.0 - q.mu);
    rep.lemma_bound = std::pow(1.0 - q.lemma->eps, lower ? 3 : 2) * keep *
                      ((1.0 - f - q.lemma->eta) * keep - q.lemma->eps);
  }
  return rep;
}

std::vector<double> independent_tile_reach(int phi, int depth, double p_tile) {
  if (phi < 1 || depth < 1) throw InvalidParameter("phi and depth must be >= 1");
  if (!(p_tile >= 0.0 && p_tile <= 1.0)) throw InvalidParameter("tile probability outside [0, 1]");
  std::vector<double> reach;
  double r = 1.0;
  for (int k = 1; k <= depth; ++k) {
    r = 1.0 - std::pow(1.0 - p_tile * r, phi);
    reach.push_back(r);
  }
  return reach;
}

SurvivalReport survival_proxy(const SurvivalRequest& q) {
  check_trials(q.trials);
  check_rates(q.mu, q.lambda);
  q.tile.validate();
  if (q.phi < 1 || q.depth < 1) throw InvalidParameter("phi and depth must be >= 1");
  const TileTree tree = build_tile_tree(q.phi, q.depth, q.tile);
  const Graph& g = tree.graph;
  const VertexId origin = g.require_landmark("o");
  StopCondition stop;
  stop.fpp1_targets = tree.junctions.back();
  stop.halt_when_fpp1_blocked = true;

  const auto start = Clock::now();
  std::vector<std::uint8_t> hits(q.trials, 0);
  parallel_trials(
      q.trials, q.workers, [&] { return Worker(g); },
      [&](Worker& w, std::uint64_t i) {
        const SimOutcome& out =
            run_trial(w, g, origin, q.mu, q.lambda, stop, q.master_seed, i, nullptr);
        hits[i] = out.stop_reason == StopReason::target_reached ? 1 : 0;
      });

  SurvivalReport rep;
  rep.direct = count_estimate(hits, q.z, false, start);

  TrialPlan tile_plan;
  tile_plan.graph = std::make_shared<const Graph>(build_tile(q.tile));
  tile_plan.mu = q.mu;
  tile_plan.lambda = q.lambda;
  tile_plan.trials = q.trials;
  tile_plan.master_seed = q.master_seed;
  tile_plan.z = q.z;
  tile_plan.workers = q.workers;
  rep.tile = estimate_event(tile_plan);

  rep.approx_reach = independent_tile_reach(q.phi, q.depth, rep.tile.p_hat);
  rep.approx = rep.approx_reach.back();
  rep.gap = rep.direct.p_hat - rep.approx;
  return rep;
}

CoverageReport ci_selftest(std::uint64_t outer, std::uint64_t inner, double p_true,
                           std::uint64_t master_seed, double z, int workers) {
  if (outer < 1 || inner < 1) throw InvalidParameter("outer and inner trials must be >= 1");
  if (!(p_true >= 0.0 && p_true <= 1.0)) throw InvalidParameter("p_true must lie in [0, 1]");
  if (!(z > 0.0)) throw InvalidParameter("z must be positive");
  std::vector<std::uint8_t> covered(outer, 0);
  parallel_trials(
      outer, workers, [] { return 0; },
      [&](int&, std::uint64_t i) {
        Engine rng = trial_engine(master_seed, i, Stream::auxiliary);
        std::uint64_t s = 0;
        for (std::uint64_t k = 0; k < inner; ++k) s += bernoulli(rng, p_true) ? 1 : 0;
        const Interval ci = wilson_interval(s, inner, z);
        covered[i] = ci.low <= p_true && p_true <= ci.high ? 1 : 0;
      });
  CoverageReport rep;
  rep.outer = outer;
  rep.inner = inner;
  rep.p_true = p_true;
  rep.z = z;
  rep.covered = static_cast<std::uint64_t>(std::count(covered.begin(), covered.end(), 1));
  rep.coverage = static_cast<double>(rep.covered) / static_cast<double>(outer);
  return rep;
}

}  // namespace fpphe
