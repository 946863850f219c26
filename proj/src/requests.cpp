#include "fpphe/requests.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "fpphe/analytics.hpp"
#include "fpphe/brwdiag.hpp"
#include "fpphe/error.hpp"
#include "fpphe/experiments.hpp"
#include "fpphe/feasibility.hpp"
#include "fpphe/io.hpp"
#include "fpphe/seeding.hpp"
#include "fpphe/sim.hpp"

namespace fpphe {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accepts numbers and the strings "inf", "+inf", "-inf", "infinity".
double real_of(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-infinity") return -kInf;
  }
  throw InvalidParameter("expected a number, got " + j.dump());
}

double real(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidParameter(std::string("missing field '") + key + "'");
  return real_of(j.at(key));
}

double real(const json& j, const char* key, double fallback) {
  return j.contains(key) ? real_of(j.at(key)) : fallback;
}

template <class T>
T integer(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidParameter(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw InvalidParameter(std::string("field '") + key + "' must be an integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
      throw InvalidParameter(std::string("field '") + key + "' is out of range");
    }
    return static_cast<T>(u);
  }
  const auto s = v.get<std::int64_t>();
  if constexpr (std::is_unsigned_v<T>) {
    if (s < 0) throw InvalidParameter(std::string("field '") + key + "' must be nonnegative");
  } else {
    if (s < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
        s > static_cast<std::int64_t>(std::numeric_limits<T>::max())) {
      throw InvalidParameter(std::string("field '") + key + "' is out of range");
    }
  }
  return static_cast<T>(s);
}

template <class T>
T integer(const json& j, const char* key, T fallback) {
  return j.contains(key) ? integer<T>(j, key) : fallback;
}

std::uint64_t master_seed(const json& j) {
  if (!j.contains("master_seed")) {
    throw InvalidParameter("randomized ops require an explicit master_seed");
  }
  return integer<std::uint64_t>(j, "master_seed");
}

int worker_count(const json& j, int override_workers) {
  const int w = override_workers > 0 ? override_workers : integer<int>(j, "workers", 1);
  if (w < 1) throw InvalidParameter("workers must be >= 1");
  return w;
}

// Request echo without the worker count, which never affects results.
json echo(const json& request) {
  json c = request;
  if (c.is_object()) c.erase("workers");
  return c;
}

json base_record(std::string_view op, const json& request) {
  json r;
  r["op"] = std::string(op);
  r["config"] = echo(request);
  if (request.contains("master_seed")) r["master_seed"] = request.at("master_seed");
  return r;
}

json one(json record) { return {{"records", json::array({std::move(record)})}}; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Infinite doubles are not representable in JSON.
json real_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

void put_estimate(json& r, const EstimateResult& e) {
  r["successes"] = e.successes;
  r["trials"] = e.trials;
  r["p_hat"] = e.p_hat;
  r["ci_low"] = e.ci_low;
  r["ci_high"] = e.ci_high;
  r["z"] = e.z;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

constexpr const char* kCsvHeader = "mu,lambda,estimand,p_hat,ci_low,ci_high,trials,successes,seed\n";

std::string csv_row(double mu, double lambda, const std::string& estimand, const EstimateResult& e,
                    std::uint64_t seed) {
  return fmt(mu) + "," + fmt(lambda) + "," + estimand + "," + fmt(e.p_hat) + "," + fmt(e.ci_low) +
         "," + fmt(e.ci_high) + "," + std::to_string(e.trials) + "," +
         std::to_string(e.successes) + "," + std::to_string(seed) + "\n";
}

GwSpec gw_from(const json& j) { return GwSpec{integer<int>(j, "d"), real(j, "mu")}; }

BuildOptions build_options(const json& j) {
  BuildOptions o;
  o.merge_parallel_edges = j.value("merge_parallel_edges", false);
  return o;
}

std::vector<VertexId> vertex_list(const Graph& g, const json& list) {
  std::vector<VertexId> out;
  if (!list.is_array()) throw InvalidParameter("vertex list must be an array");
  for (const json& v : list) {
    out.push_back(v.is_string() ? resolve_vertex(g, v.get<std::string>())
                                : resolve_vertex(g, std::to_string(v.get<std::uint64_t>())));
  }
  return out;
}

std::string vertex_name(const json& v) {
  return v.is_string() ? v.get<std::string>() : std::to_string(v.get<std::uint64_t>());
}

StopCondition stop_from(const Graph& g, const json& j) {
  StopCondition s;
  if (j.contains("target")) s.target = resolve_vertex(g, vertex_name(j.at("target")));
  if (j.contains("time_horizon")) s.time_horizon = real(j, "time_horizon");
  if (j.contains("max_infected")) s.max_infected = integer<std::size_t>(j, "max_infected");
  if (j.contains("fpp1_targets")) s.fpp1_targets = vertex_list(g, j.at("fpp1_targets"));
  s.halt_when_fpp1_blocked = j.value("halt_when_fpp1_blocked", false);
  s.run_to_exhaustion = j.value("run_to_exhaustion", false);
  return s;
}

// ---------------------------------------------------------------- graph ops

json op_graph(const json& q) {
  const Graph g = graph_from_spec(q.contains("graph") ? q.at("graph") : q);
  json r = base_record("graph", q);
  r["vertex_count"] = g.vertex_count();
  r["edge_count"] = g.edge_count();
  const std::string format = q.value("format", std::string("json"));
  if (format == "dot") {
    r["dot"] = export_dot(g);
  } else if (format == "json") {
    r["graph"] = graph_to_json(g);
  } else {
    throw InvalidParameter("graph format must be json or dot");
  }
  return one(std::move(r));
}

json op_simulate(const json& q) {
  const Graph g = graph_from_spec(q.at("graph"));
  const std::uint64_t seed = master_seed(q);
  const VertexId origin =
      q.contains("origin") ? resolve_vertex(g, vertex_name(q.at("origin"))) : default_origin(g);
  const double lambda = real(q, "lambda");
  StopCondition stop = q.contains("stop") ? stop_from(g, q.at("stop")) : StopCondition{};
  if (q.contains("target")) stop.target = resolve_vertex(g, vertex_name(q.at("target")));
  if (!stop.target && stop.fpp1_targets.empty() && !stop.time_horizon && !stop.max_infected &&
      !stop.halt_when_fpp1_blocked) {
    stop.run_to_exhaustion = true;
  }
  const std::uint64_t trial = integer<std::uint64_t>(q, "trial_index", 0);
  SeedConfig seeds;
  if (q.contains("fixed_seeds")) {
    seeds = fixed_seeds(g, vertex_list(g, q.at("fixed_seeds")));
  } else {
    const VertexId excluded[] = {origin};
    Engine seed_rng = trial_engine(seed, trial, Stream::seeds);
    seeds = place_seeds(g, real(q, "mu", 0.0), excluded, seed_rng);
  }
  Engine rng = trial_engine(seed, trial, Stream::dynamics);
  const SimOutcome out = simulate(g, origin, seeds, lambda, stop, rng);
  json r = base_record("simulate", q);
  r["seed_count"] = seeds.count();
  r["outcome"] = outcome_to_json(out);
  json res = one(std::move(r));
  if (q.value("trace", false)) res["trace"] = outcome_trace_jsonl(out);
  return res;
}

// ---------------------------------------------------------- experiment ops

json op_estimate(const json& q, int workers) {
  TrialPlan plan;
  plan.graph = std::make_shared<const Graph>(graph_from_spec(q.at("graph")));
  plan.master_seed = master_seed(q);
  plan.mu = real(q, "mu", 0.0);
  plan.lambda = real(q, "lambda");
  plan.trials = integer<std::uint64_t>(q, "trials");
  if (plan.trials < 1) throw InvalidParameter("trials must be >= 1");
  plan.z = real(q, "z", 1.96);
  plan.workers = worker_count(q, workers);
  plan.audit = q.value("audit", false);
  if (q.contains("origin")) plan.origin = vertex_name(q.at("origin"));
  if (q.contains("event")) {
    const json& e = q.at("event");
    plan.event.kind = parse_event_kind(e.value("kind", std::string("target_fpp1")));
    if (e.contains("target")) plan.event.target = vertex_name(e.at("target"));
    plan.event.threshold = real(e, "threshold", kInf);
  }
  if (q.contains("stop")) plan.stop = stop_from(*plan.graph, q.at("stop"));
  if (q.contains("fixed_seeds")) plan.fixed_seeds = vertex_list(*plan.graph, q.at("fixed_seeds"));

  const EstimateResult e = estimate_event(plan);
  json r = base_record("estimate", q);
  r["estimand"] = std::string(to_string(plan.event.kind));
  r["mu"] = plan.mu;
  r["lambda"] = plan.lambda;
  put_estimate(r, e);
  if (plan.audit) r["trial_log"] = e.trial_log;
  json res = one(std::move(r));
  res["csv"] = std::string(kCsvHeader) +
               csv_row(plan.mu, plan.lambda, std::string(to_string(plan.event.kind)), e,
                       plan.master_seed);
  res["timing"] = {{"wall_time_s", e.wall_time_s}};
  return res;
}

json op_sweep(const json& q, int workers) {
  SweepRequest s;
  s.tile = tile_from_json(q);
  s.lambda = real(q, "lambda");
  for (const json& mu : q.at("mu_list")) s.mu_list.push_back(real_of(mu));
  s.trials = integer<std::uint64_t>(q, "trials");
  s.master_seed = master_seed(q);
  s.workers = worker_count(q, workers);
  s.z = real(q, "z", 1.96);
  const SweepReport rep = tile_sweep(s);

  json records = json::array();
  std::string csv = kCsvHeader;
  json timing = json::array();
  for (const SweepRow& row : rep.rows) {
    json r = base_record("sweep", q);
    r["estimand"] = "B_fpp1";
    r["mu"] = row.mu;
    r["lambda"] = s.lambda;
    put_estimate(r, row.estimate);
    r["winner_side"] = {{"upper", {{"FPP1", row.upper_fpp1}, {"FPPLAMBDA", row.upper_lambda}}},
                        {"lower", {{"FPP1", row.lower_fpp1}, {"FPPLAMBDA", row.lower_lambda}}}};
    json levels = json::object();
    for (const auto& [side, hist] : row.seed_levels) {
      json h = json::object();
      for (const auto& [level, count] : hist) h[std::to_string(level)] = count;
      levels[side] = std::move(h);
    }
    r["seed_levels"] = std::move(levels);
    r["side_violations"] = row.side_violations;
    records.push_back(std::move(r));
    csv += csv_row(row.mu, s.lambda, "B_fpp1", row.estimate, s.master_seed);
    timing.push_back({{"mu", row.mu}, {"wall_time_s", row.estimate.wall_time_s}});
  }
  const MonotonicityReport& m = rep.monotonicity;
  json r = base_record("sweep", q);
  r["estimand"] = "monotonicity";
  r["lambda"] = s.lambda;
  r["z_critical"] = m.z_critical;
  json zs = json::array();
  for (double z : m.step_z) zs.push_back(real_json(z));
  r["step_z"] = std::move(zs);
  r["step_sign"] = m.step_sign;
  r["nonincreasing"] = m.nonincreasing;
  r["nonmonotone_witness"] = m.nonmonotone_witness;
  json w = json::array();
  for (const auto& [i, j] : m.witnesses) w.push_back({{"first_step", i}, {"second_step", j}});
  r["witnesses"] = std::move(w);
  records.push_back(std::move(r));
  return {{"records", std::move(records)}, {"csv", std::move(csv)}, {"timing", std::move(timing)}};
}

json op_restricted(const json& q, int workers) {
  RestrictedRequest s;
  s.tile = tile_from_json(q);
  s.side = parse_side(q.value("side", std::string("lower")));
  s.mu = real(q, "mu");
  s.lambda = real(q, "lambda");
  s.trials = integer<std::uint64_t>(q, "trials");
  s.master_seed = master_seed(q);
  s.workers = worker_count(q, workers);
  s.z = real(q, "z", 1.96);
  if (q.contains("thresholds")) {
    for (const json& t : q.at("thresholds")) {
      Threshold th;
      th.name = t.at("name").get<std::string>();
      th.value = real(t, "value");
      const std::string rel = t.value("relation", std::string("le"));
      if (rel != "le" && rel != "ge") throw InvalidParameter("relation must be le or ge");
      th.less_equal = rel == "le";
      th.require_cap_fpp1 = t.value("require_cap_fpp1", false);
      s.thresholds.push_back(std::move(th));
    }
  }
  if (q.contains("lemma")) {
    s.lemma = LemmaInputs{real(q.at("lemma"), "eta", 0.0), real(q.at("lemma"), "eps", 0.0)};
  }
  const RestrictedReport rep = restricted_events(s);
  json records = json::array();
  std::string csv = kCsvHeader;
  for (const auto& [name, e] : rep.events) {
    json r = base_record("restricted", q);
    r["estimand"] = name;
    r["side"] = std::string(to_string(s.side));
    r["mu"] = s.mu;
    r["lambda"] = s.lambda;
    put_estimate(r, e);
    records.push_back(std::move(r));
    csv += csv_row(s.mu, s.lambda, name, e, s.master_seed);
  }
  json r = base_record("restricted", q);
  r["estimand"] = "passage_time";
  r["side"] = std::string(to_string(s.side));
  r["mean"] = rep.mean_passage;
  r["sd"] = rep.sd_passage;
  r["trials"] = s.trials;
  r["lemma_bound"] = opt(rep.lemma_bound);
  if (rep.lemma_bound) r["lemma_note"] = "eta is a user-supplied input, not computed";
  records.push_back(std::move(r));
  return {{"records", std::move(records)}, {"csv", std::move(csv)}};
}

json op_survival(const json& q, int workers) {
  SurvivalRequest s;
  s.phi = integer<int>(q, "phi");
  s.depth = integer<int>(q, "depth");
  s.tile = tile_from_json(q);
  s.mu = real(q, "mu");
  s.lambda = real(q, "lambda");
  s.trials = integer<std::uint64_t>(q, "trials");
  s.master_seed = master_seed(q);
  s.workers = worker_count(q, workers);
  s.z = real(q, "z", 1.96);
  const SurvivalReport rep = survival_proxy(s);
  json direct = base_record("survival", q);
  direct["estimand"] = "reach_depth_fpp1";
  direct["mu"] = s.mu;
  direct["lambda"] = s.lambda;
  put_estimate(direct, rep.direct);
  json tile = base_record("survival", q);
  tile["estimand"] = "tile_B_fpp1";
  tile["mu"] = s.mu;
  tile["lambda"] = s.lambda;
  put_estimate(tile, rep.tile);
  json approx = base_record("survival", q);
  approx["estimand"] = "independent_tile_approx";
  approx["reach_by_depth"] = rep.approx_reach;
  approx["approx"] = rep.approx;
  approx["gap"] = rep.gap;
  std::string csv = kCsvHeader;
  csv += csv_row(s.mu, s.lambda, "reach_depth_fpp1", rep.direct, s.master_seed);
  csv += csv_row(s.mu, s.lambda, "tile_B_fpp1", rep.tile, s.master_seed);
  return {{"records", json::array({direct, tile, approx})},
          {"csv", std::move(csv)},
          {"timing", {{"direct_s", rep.direct.wall_time_s}, {"tile_s", rep.tile.wall_time_s}}}};
}

json op_selftest(const json& q, int workers) {
  const CoverageReport rep =
      ci_selftest(integer<std::uint64_t>(q, "outer", 1000), integer<std::uint64_t>(q, "inner", 1000),
                  real(q, "p_true"), master_seed(q), real(q, "z", 1.96), worker_count(q, workers));
  json r = base_record("selftest", q);
  r["outer"] = rep.outer;
  r["inner"] = rep.inner;
  r["p_true"] = rep.p_true;
  r["z"] = rep.z;
  r["covered"] = rep.covered;
  r["coverage"] = rep.coverage;
  return one(std::move(r));
}

// --------------------------------------------------------- feasibility ops

RateConstants constants_from(const json& j) {
  RateConstants c;
  c.cin1 = real(j, "cin1", c.cin1);
  c.cin2 = real(j, "cin2", c.cin2);
  c.cinD = real(j, "cinD", c.cinD);
  c.cout1 = real(j, "cout1", c.cout1);
  c.cout2 = real(j, "cout2", c.cout2);
  c.coutD = real(j, "coutD", c.coutD);
  return c;
}

json op_feasibility(const json& q) {
  FeasibilityProblem p;
  p.lambda = real(q, "lambda");
  p.constants = constants_from(q.contains("constants") ? q.at("constants") : json::object());
  if (q.contains("frak_c")) {
    p.frak_c = real(q, "frak_c");
  } else if (q.contains("eps")) {
    p.frak_c = uniform_edge_constant(real(q, "eps"), p.lambda);
  }
  p.R = integer<std::int64_t>(q, "R", p.R);
  p.h_cap = integer<std::int64_t>(q, "h_cap", p.h_cap);
  const FeasibilitySolution s = solve_hl(p);
  json r = base_record("feasibility", q);
  r["lambda_zero"] = lambda_zero(p.constants);
  r["frak_c"] = p.frak_c;
  r["feasible"] = s.feasible;
  r["H"] = s.H;
  r["L"] = s.L;
  r["lhs1"] = s.lhs1;
  r["rhs1"] = s.rhs1;
  r["lhs2"] = s.lhs2;
  r["rhs2"] = s.rhs2;
  r["h_coefficient"] = s.h_coefficient;
  r["l_interval"] = s.l_low ? json::array({*s.l_low, *s.l_high}) : json(nullptr);
  r["diagnostics"] = s.diagnostics;
  return one(std::move(r));
}

json op_estimate_constants(const json& q) {
  RateEstimateRequest e;
  e.d = integer<int>(q, "d", e.d);
  e.gamma = real(q, "gamma", e.gamma);
  e.k_min = integer<int>(q, "k_min", e.k_min);
  e.k_max = integer<int>(q, "k_max", e.k_max);
  e.trials = integer<int>(q, "trials", e.trials);
  e.target_exponent_in = real(q, "target_exponent_in", e.target_exponent_in);
  e.target_exponent_out = real(q, "target_exponent_out", e.target_exponent_out);
  e.grid_step = real(q, "grid_step", e.grid_step);
  e.cout_max = real(q, "cout_max", e.cout_max);
  e.master_seed = master_seed(q);
  const RateEstimate est = estimate_rate_constants(e);
  json r = base_record("estimate_constants", q);
  r["cin_hat"] = opt(est.cin_hat);
  r["cout_hat"] = opt(est.cout_hat);
  r["target_exponent_in"] = e.target_exponent_in;
  r["target_exponent_out"] = e.target_exponent_out;
  json rows = json::array();
  for (const RateEstimateRow& row : est.rows) {
    rows.push_back({{"k", row.k},
                    {"tail_in", row.tail_in},
                    {"tail_out", row.tail_out},
                    {"exponent_in", opt(row.exponent_in)},
                    {"exponent_out", opt(row.exponent_out)}});
  }
  r["rows"] = std::move(rows);
  r["warnings"] = est.warnings;
  return one(std::move(r));
}

// ---------------------------------------------------------- analytics ops

json analytics_record(std::string_view op, const json& q, const char* key, double value) {
  json r = base_record(op, q);
  r[key] = value;
  return one(std::move(r));
}

// f_D defaults to the extinction probability of Bin(D, 1 - mu2).
double f_or_default(const json& q, int D, double mu2) {
  return q.contains("f") ? real(q, "f") : gw_extinction(GwSpec{D, mu2});
}

json op_analytics(std::string_view name, const json& q) {
  const std::string op = "analytics." + std::string(name);
  if (name == "gw") {
    return analytics_record(op, q, "extinction", gw_extinction(gw_from(q), real(q, "tol", 1e-12)));
  }
  if (name == "tech") {
    const TechCondition t = check_tech_cond(integer<int>(q, "d"), real(q, "mu"));
    json r = base_record(op, q);
    r["cond1"] = t.supercritical;
    r["cond2"] = t.second_moment;
    r["second_moment_value"] = t.second_moment_value;
    return one(std::move(r));
  }
  if (name == "p_one") return analytics_record(op, q, "p_one", p_one(gw_from(q)));
  if (name == "quantile") {
    return analytics_record(op, q, "constant",
                            edge_quantile_const(real(q, "eps"), real(q, "gamma")));
  }
  if (name == "frak_c") {
    return analytics_record(op, q, "frak_c",
                            uniform_edge_constant(real(q, "eps"), real(q, "lambda")));
  }
  if (name == "janson_upper") {
    return analytics_record(op, q, "bound",
                            janson_upper_tail(real(q, "a_star"), real(q, "mean"), real(q, "delta")));
  }
  if (name == "janson_lower") {
    return analytics_record(op, q, "bound",
                            janson_lower_tail(real(q, "a_star"), real(q, "mean"), real(q, "delta")));
  }
  if (name == "phi" || name == "eps_max") {
    const int D = integer<int>(q, "D");
    const double mu2 = real(q, "mu2");
    const double eta = real(q, "eta", 0.0);
    const double f = f_or_default(q, D, mu2);
    json r = base_record(op, q);
    if (name == "phi") {
      r["phi"] = phi_from_params(D, mu2, eta, f, real(q, "eps"));
    } else {
      r["eps_max"] = epsilon_max(D, mu2, eta, f);
    }
    r["f"] = f;
    r["eta"] = eta;
    if (!q.contains("eta")) r["eta_note"] = "eta defaulted to 0; it is an existential constant";
    return one(std::move(r));
  }
  if (name == "perc_threshold") {
    return analytics_record(op, q, "threshold", tree_percolation_threshold(integer<int>(q, "phi")));
  }
  throw InvalidParameter("unknown analytics op '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- brw ops

json op_brw(std::string_view name, const json& q) {
  const std::string op = "brw." + std::string(name);
  const GwSpec spec = gw_from(q);
  const std::uint64_t seed = master_seed(q);
  const int trials = integer<int>(q, "trials");
  json r = base_record(op, q);
  r["caveat"] = "survival is conditioned to the deepest level examined, not forever";
  if (name == "sample") {
    const int max_gen = integer<int>(q, "max_gen");
    const auto samples = sample_brw(spec, real(q, "gamma", 1.0), max_gen, trials, seed);
    std::vector<double> mean(static_cast<std::size_t>(max_gen) + 1, 0.0);
    std::uint64_t survived = 0;
    for (const BrwSample& s : samples) {
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += static_cast<double>(s.generation_sizes[j]);
      if (s.survived_to == max_gen) ++survived;
    }
    for (double& m : mean) m /= trials;
    r["mean_generation_size"] = mean;
    r["survived_to_max_gen"] = survived;
    r["trials"] = trials;
  } else if (name == "min_passage") {
    const MinPassageSamples s =
        min_passage(spec, real(q, "gamma", 1.0), integer<int>(q, "n"), trials, seed);
    double sum = 0.0;
    for (double v : s.values) sum += v;
    const double mean = sum / static_cast<double>(s.values.size());
    double ss = 0.0;
    for (double v : s.values) ss += (v - mean) * (v - mean);
    r["kept"] = s.values.size();
    r["discarded_extinct"] = s.discarded_extinct;
    r["extinct_fraction"] = static_cast<double>(s.discarded_extinct) / trials;
    r["gw_extinction"] = gw_extinction(spec);
    r["mean"] = mean;
    r["sd"] = s.values.size() > 1 ? std::sqrt(ss / static_cast<double>(s.values.size() - 1)) : 0.0;
    if (q.value("fit", false)) {
      const ConcentrationFit fit = fit_concentration(s.values);
      r["fit"] = {{"c_hat", fit.c_hat},
                  {"delta_hat", fit.delta_hat},
                  {"alpha_from", fit.alpha_from},
                  {"alpha_to", fit.alpha_to},
                  {"points", fit.points}};
    }
  } else if (name == "birth") {
    json rows = json::array();
    for (const BirthRow& b : generation_birth_stats(spec, real(q, "c1"), integer<int>(q, "max_gen"),
                                                    trials, seed)) {
      rows.push_back({{"generation", b.generation},
                      {"conditioned", b.conditioned},
                      {"p_all_born", b.p_all_born},
                      {"mean_born_in_time", b.mean_born_in_time},
                      {"mean_size", b.mean_size},
                      {"claimed_bound", b.claimed_bound},
                      {"k_le_n", b.k_le_n}});
    }
    r["rows"] = std::move(rows);
  } else if (name == "inverse_rate") {
    const InverseRateReport rep = inverse_size_rate(spec, integer<int>(q, "n_max"), trials, seed);
    json rows = json::array();
    for (const InverseRateRow& row : rep.rows) {
      rows.push_back({{"n", row.n},
                      {"surviving", row.surviving},
                      {"mean_inverse_size", row.mean_inverse_size},
                      {"rate", row.rate}});
    }
    r["limit"] = rep.limit;
    r["rows"] = std::move(rows);
  } else if (name == "sandwich") {
    const SandwichReport rep = size_sandwich(spec, real(q, "eps1", 0.2), real(q, "eps_prime", 0.1),
                                             integer<int>(q, "max_gen", 15), trials, seed);
    json rows = json::array();
    for (const SandwichRow& row : rep.rows) {
      rows.push_back({{"generation", row.generation},
                      {"conditioned", row.conditioned},
                      {"lower", row.lower},
                      {"upper", row.upper},
                      {"p_inside", row.p_inside}});
    }
    r["rows"] = std::move(rows);
    r["c2_const"] = opt(rep.c2_const);
    r["c2_rate"] = opt(rep.c2_rate);
  } else {
    throw InvalidParameter("unknown brw op '" + std::string(name) + "'");
  }
  return one(std::move(r));
}

}  // namespace

TileParams tile_from_json(const json& j) {
  const json& t = j.contains("tile") ? j.at("tile") : j;
  TileParams p;
  p.D = integer<int>(t, "D");
  p.L = integer<int>(t, "L");
  p.H = integer<int>(t, "H");
  p.R = integer<int>(t, "R");
  p.validate();
  return p;
}

Graph graph_from_spec(const json& spec) {
  try {
    if (!spec.is_object()) throw InvalidParameter("graph spec must be an object");
    if (spec.contains("format")) return graph_from_json(spec);
    const std::string kind = spec.at("kind").get<std::string>();
    const BuildOptions options = build_options(spec);
    if (kind == "tile") return build_tile(tile_from_json(spec), options);
    if (kind == "restricted_tile") {
      return restrict_to_side(build_tile(tile_from_json(spec), options),
                              parse_side(spec.at("side").get<std::string>()));
    }
    if (kind == "complete_tree") {
      return build_complete_tree(integer<int>(spec, "d"), integer<int>(spec, "h"), options);
    }
    if (kind == "capped_tree") {
      return build_capped_tree(integer<int>(spec, "d"), integer<int>(spec, "h"), options);
    }
    if (kind == "path") return build_path(integer<int>(spec, "k"), options);
    if (kind == "tile_tree") {
      return build_tile_tree(integer<int>(spec, "phi"), integer<int>(spec, "depth"),
                             tile_from_json(spec), options)
          .graph;
    }
    if (kind == "inline") return graph_from_json(spec.at("graph"));
    throw InvalidParameter("unknown graph kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("malformed graph spec: ") + e.what());
  }
}

const std::vector<std::string>& request_ops() {
  static const std::vector<std::string> ops = {
      "graph", "simulate", "estimate", "sweep", "restricted", "survival", "selftest",
      "feasibility", "estimate_constants", "analytics.gw", "analytics.tech", "analytics.p_one",
      "analytics.quantile", "analytics.frak_c", "analytics.janson_upper", "analytics.janson_lower",
      "analytics.phi", "analytics.eps_max", "analytics.perc_threshold", "brw.sample",
      "brw.min_passage", "brw.birth", "brw.inverse_rate", "brw.sandwich"};
  return ops;
}

json run_request(std::string_view op, const json& request, int workers) {
  try {
    if (!request.is_object()) throw InvalidParameter("request must be a JSON object");
    if (op == "graph") return op_graph(request);
    if (op == "simulate") return op_simulate(request);
    if (op == "estimate") return op_estimate(request, workers);
    if (op == "sweep") return op_sweep(request, workers);
    if (op == "restricted") return op_restricted(request, workers);
    if (op == "survival") return op_survival(request, workers);
    if (op == "selftest") return op_selftest(request, workers);
    if (op == "feasibility") return op_feasibility(request);
    if (op == "estimate_constants") return op_estimate_constants(request);
    if (op.starts_with("analytics.")) return op_analytics(op.substr(10), request);
    if (op.starts_with("brw.")) return op_brw(op.substr(4), request);
    throw InvalidParameter("unknown op '" + std::string(op) + "'");
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("malformed request: ") + e.what());
  }
}

}  // namespace fpphe
