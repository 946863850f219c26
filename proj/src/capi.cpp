#include "fpphe/fpphe.h"

#include <cstring>
#include <new>
#include <string>

#include "fpphe/analytics.hpp"
#include "fpphe/error.hpp"
#include "fpphe/feasibility.hpp"
#include "fpphe/graph.hpp"
#include "fpphe/io.hpp"
#include "fpphe/requests.hpp"
#include "fpphe/seeding.hpp"
#include "fpphe/sim.hpp"

struct fpphe_graph {
  fpphe::Graph graph;
};

struct fpphe_seeds {
  fpphe::SeedConfig seeds;
};

struct fpphe_outcome {
  fpphe::SimOutcome outcome;
};

namespace {

thread_local std::string last_error;

fpphe_status status_of(fpphe::ErrorKind kind) {
  switch (kind) {
    case fpphe::ErrorKind::invalid_parameter: return FPPHE_INVALID;
    case fpphe::ErrorKind::infeasible: return FPPHE_INFEASIBLE;
    case fpphe::ErrorKind::unstable: return FPPHE_UNSTABLE;
    case fpphe::ErrorKind::resource_limit: return FPPHE_RESOURCE;
    case fpphe::ErrorKind::exhausted: return FPPHE_EXHAUSTED;
  }
  return FPPHE_INTERNAL;
}

fpphe_status fail(fpphe_status s, const char* what) {
  last_error = what;
  return s;
}

// Runs body, translating exceptions into status codes.
template <class Body>
fpphe_status guarded(Body&& body) {
  try {
    last_error.clear();
    body();
    return FPPHE_OK;
  } catch (const fpphe::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FPPHE_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(FPPHE_INTERNAL, e.what());
  } catch (...) {
    return fail(FPPHE_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw fpphe::InvalidParameter(std::string(name) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

fpphe_status make_graph(fpphe_graph** out, auto build) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new fpphe_graph{build()};
  });
}

fpphe::StopCondition stop_from(const fpphe_stop* stop) {
  fpphe::StopCondition s;
  if (stop == nullptr) {
    s.run_to_exhaustion = true;
    return s;
  }
  if (stop->has_target) s.target = stop->target;
  if (stop->time_horizon > 0.0) s.time_horizon = stop->time_horizon;
  if (stop->max_infected > 0) s.max_infected = stop->max_infected;
  if (!s.target && !s.time_horizon && !s.max_infected) s.run_to_exhaustion = true;
  return s;
}

fpphe::RateConstants constants_from(const fpphe_rate_constants* c) {
  require(c, "constants");
  fpphe::RateConstants r;
  r.cin1 = c->cin1;
  r.cin2 = c->cin2;
  r.cinD = c->cinD;
  r.cout1 = c->cout1;
  r.cout2 = c->cout2;
  r.coutD = c->coutD;
  return r;
}

template <class T, class F>
fpphe_status scalar(T* out, F&& compute) {
  return guarded([&] {
    require(out, "out");
    *out = compute();
  });
}

}  // namespace

extern "C" {

const char* fpphe_version(void) { return FPPHE_VERSION; }

const char* fpphe_last_error(void) { return last_error.c_str(); }

const char* fpphe_status_name(fpphe_status status) {
  switch (status) {
    case FPPHE_OK: return "ok";
    case FPPHE_INVALID: return "invalid-parameter";
    case FPPHE_INFEASIBLE: return "infeasible";
    case FPPHE_UNSTABLE: return "unstable";
    case FPPHE_RESOURCE: return "resource-limit";
    case FPPHE_EXHAUSTED: return "exhausted";
    case FPPHE_INTERNAL: return "internal";
  }
  return "unknown";
}

void fpphe_string_free(char* s) { delete[] s; }

fpphe_status fpphe_graph_complete_tree(int d, int h, fpphe_graph** out) {
  return make_graph(out, [&] { return fpphe::build_complete_tree(d, h); });
}

fpphe_status fpphe_graph_capped_tree(int d, int h, int merge, fpphe_graph** out) {
  return make_graph(out, [&] {
    fpphe::BuildOptions o;
    o.merge_parallel_edges = merge != 0;
    return fpphe::build_capped_tree(d, h, o);
  });
}

fpphe_status fpphe_graph_path(int k, fpphe_graph** out) {
  return make_graph(out, [&] { return fpphe::build_path(k); });
}

fpphe_status fpphe_graph_tile(int D, int L, int H, int R, fpphe_graph** out) {
  return make_graph(out, [&] { return fpphe::build_tile(fpphe::TileParams{D, L, H, R}); });
}

fpphe_status fpphe_graph_tile_tree(int phi, int depth, int D, int L, int H, int R,
                                   fpphe_graph** out) {
  return make_graph(out, [&] {
    return fpphe::build_tile_tree(phi, depth, fpphe::TileParams{D, L, H, R}).graph;
  });
}

fpphe_status fpphe_graph_restrict(const fpphe_graph* tile, const char* side, fpphe_graph** out) {
  return make_graph(out, [&] {
    require(tile, "tile");
    require(side, "side");
    return fpphe::restrict_to_side(tile->graph, fpphe::parse_side(side));
  });
}

fpphe_status fpphe_graph_from_edges(size_t vertex_count, const uint32_t* endpoints,
                                    size_t edge_count, fpphe_graph** out) {
  return make_graph(out, [&] {
    if (edge_count > 0) require(endpoints, "endpoints");
    std::vector<fpphe::Edge> edges;
    edges.reserve(edge_count);
    for (size_t i = 0; i < edge_count; ++i) edges.push_back({endpoints[2 * i], endpoints[2 * i + 1]});
    return fpphe::Graph(vertex_count, std::move(edges), {},
                        std::vector<fpphe::Role>(vertex_count, fpphe::Role::generic),
                        std::vector<std::uint32_t>(vertex_count, 0));
  });
}

fpphe_status fpphe_graph_from_json(const char* text, fpphe_graph** out) {
  return make_graph(out, [&] {
    require(text, "text");
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw fpphe::InvalidParameter("graph text is not valid JSON");
    return fpphe::graph_from_spec(j);
  });
}

void fpphe_graph_free(fpphe_graph* g) { delete g; }

size_t fpphe_graph_vertex_count(const fpphe_graph* g) { return g ? g->graph.vertex_count() : 0; }

size_t fpphe_graph_edge_count(const fpphe_graph* g) { return g ? g->graph.edge_count() : 0; }

fpphe_status fpphe_graph_landmark(const fpphe_graph* g, const char* name, uint32_t* out) {
  return scalar(out, [&] {
    require(g, "graph");
    require(name, "name");
    return g->graph.require_landmark(name);
  });
}

fpphe_status fpphe_graph_degree(const fpphe_graph* g, uint32_t v, size_t* out) {
  return scalar(out, [&] {
    require(g, "graph");
    if (!g->graph.contains(v)) throw fpphe::InvalidParameter("vertex not in graph");
    return g->graph.degree(v);
  });
}

fpphe_status fpphe_graph_edge(const fpphe_graph* g, uint32_t e, uint32_t* a, uint32_t* b) {
  return guarded([&] {
    require(g, "graph");
    require(a, "a");
    require(b, "b");
    if (e >= g->graph.edge_count()) throw fpphe::InvalidParameter("edge not in graph");
    *a = g->graph.edge(e).a;
    *b = g->graph.edge(e).b;
  });
}

fpphe_status fpphe_graph_generation(const fpphe_graph* g, uint32_t v, uint32_t* out) {
  return scalar(out, [&] {
    require(g, "graph");
    if (!g->graph.contains(v)) throw fpphe::InvalidParameter("vertex not in graph");
    return g->graph.generation(v);
  });
}

fpphe_status fpphe_graph_to_dot(const fpphe_graph* g, char** out) {
  return scalar(out, [&] {
    require(g, "graph");
    return copy_string(fpphe::export_dot(g->graph));
  });
}

fpphe_status fpphe_graph_to_json(const fpphe_graph* g, char** out) {
  return scalar(out, [&] {
    require(g, "graph");
    return copy_string(fpphe::graph_to_json(g->graph).dump());
  });
}

fpphe_status fpphe_seeds_place(const fpphe_graph* g, double mu, const uint32_t* excluded,
                               size_t excluded_count, uint64_t master_seed, uint64_t trial_index,
                               fpphe_seeds** out) {
  return guarded([&] {
    require(g, "graph");
    require(out, "out");
    if (excluded_count > 0) require(excluded, "excluded");
    *out = nullptr;
    fpphe::Engine rng = fpphe::trial_engine(master_seed, trial_index, fpphe::Stream::seeds);
    auto s = fpphe::place_seeds(g->graph, mu, {excluded, excluded_count}, rng);
    s.master_seed = master_seed;
    *out = new fpphe_seeds{std::move(s)};
  });
}

fpphe_status fpphe_seeds_fixed(const fpphe_graph* g, const uint32_t* seeds, size_t count,
                               fpphe_seeds** out) {
  return guarded([&] {
    require(g, "graph");
    require(out, "out");
    if (count > 0) require(seeds, "seeds");
    *out = nullptr;
    *out = new fpphe_seeds{fpphe::fixed_seeds(g->graph, {seeds, count})};
  });
}

void fpphe_seeds_free(fpphe_seeds* s) { delete s; }

size_t fpphe_seeds_count(const fpphe_seeds* s) { return s ? s->seeds.count() : 0; }

int fpphe_seeds_is_seed(const fpphe_seeds* s, uint32_t v) {
  return s != nullptr && v < s->seeds.size() && s->seeds.seed(v) ? 1 : 0;
}

fpphe_status fpphe_seeds_serialize(const fpphe_seeds* s, char** out, size_t* size) {
  return guarded([&] {
    require(s, "seeds");
    require(out, "out");
    require(size, "size");
    const std::string blob = fpphe::serialize_seeds(s->seeds);
    *out = copy_string(blob);
    *size = blob.size();
  });
}

fpphe_status fpphe_seeds_deserialize(const char* data, size_t size, fpphe_seeds** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    *out = nullptr;
    *out = new fpphe_seeds{fpphe::deserialize_seeds({data, size})};
  });
}

static fpphe_status run_simulation(bool explicit_clocks, const fpphe_graph* g, uint32_t origin,
                                   const fpphe_seeds* seeds, double lambda, const fpphe_stop* stop,
                                   uint64_t master_seed, uint64_t trial_index,
                                   fpphe_outcome** out) {
  return guarded([&] {
    require(g, "graph");
    require(seeds, "seeds");
    require(out, "out");
    *out = nullptr;
    fpphe::Engine rng = fpphe::trial_engine(master_seed, trial_index, fpphe::Stream::dynamics);
    const fpphe::StopCondition s = stop_from(stop);
    *out = new fpphe_outcome{
        explicit_clocks
            ? fpphe::explicit_clock_simulate(g->graph, origin, seeds->seeds, lambda, s, rng)
            : fpphe::simulate(g->graph, origin, seeds->seeds, lambda, s, rng)};
  });
}

fpphe_status fpphe_simulate(const fpphe_graph* g, uint32_t origin, const fpphe_seeds* seeds,
                            double lambda, const fpphe_stop* stop, uint64_t master_seed,
                            uint64_t trial_index, fpphe_outcome** out) {
  return run_simulation(false, g, origin, seeds, lambda, stop, master_seed, trial_index, out);
}

fpphe_status fpphe_simulate_explicit(const fpphe_graph* g, uint32_t origin,
                                     const fpphe_seeds* seeds, double lambda,
                                     const fpphe_stop* stop, uint64_t master_seed,
                                     uint64_t trial_index, fpphe_outcome** out) {
  return run_simulation(true, g, origin, seeds, lambda, stop, master_seed, trial_index, out);
}

void fpphe_outcome_free(fpphe_outcome* o) { delete o; }

const char* fpphe_outcome_stop_reason(const fpphe_outcome* o) {
  return o ? fpphe::to_string(o->outcome.stop_reason).data() : "";
}

size_t fpphe_outcome_infected_count(const fpphe_outcome* o) {
  return o ? o->outcome.order.size() : 0;
}

fpphe_status fpphe_outcome_vertex(const fpphe_outcome* o, uint32_t v, int* infected, double* time,
                                  int* type, uint32_t* parent) {
  return guarded([&] {
    require(o, "outcome");
    const fpphe::SimOutcome& s = o->outcome;
    if (v >= s.time.size()) throw fpphe::InvalidParameter("vertex not in graph");
    if (infected) *infected = s.infected(v) ? 1 : 0;
    if (time) *time = s.time[v];
    if (type) *type = s.type[v] == fpphe::ProcessType::fpp1 ? FPPHE_FPP1 : FPPHE_FPPLAMBDA;
    if (parent) *parent = s.parent[v];
  });
}

fpphe_status fpphe_outcome_target(const fpphe_outcome* o, uint32_t* vertex, int* type,
                                  double* time) {
  return guarded([&] {
    require(o, "outcome");
    const auto& t = o->outcome.target_verdict;
    if (!t) throw fpphe::Exhausted("the stop target was not reached");
    if (vertex) *vertex = t->vertex;
    if (type) *type = t->type == fpphe::ProcessType::fpp1 ? FPPHE_FPP1 : FPPHE_FPPLAMBDA;
    if (time) *time = t->time;
  });
}

fpphe_status fpphe_outcome_winning_seed(const fpphe_outcome* o, uint32_t* vertex,
                                        uint32_t* level) {
  return guarded([&] {
    require(o, "outcome");
    if (!o->outcome.winning_seed) throw fpphe::Exhausted("no winning seed");
    if (vertex) *vertex = *o->outcome.winning_seed;
    if (level) *level = *o->outcome.winning_seed_level;
  });
}

fpphe_status fpphe_outcome_to_json(const fpphe_outcome* o, char** out) {
  return scalar(out, [&] {
    require(o, "outcome");
    return copy_string(fpphe::outcome_to_json(o->outcome).dump());
  });
}

fpphe_status fpphe_gw_extinction(int d, double mu, double tol, double* out) {
  return scalar(out, [&] {
    if (!(tol > 0.0)) throw fpphe::InvalidParameter("tolerance must be positive");
    return fpphe::gw_extinction(fpphe::GwSpec{d, mu}, tol);
  });
}

fpphe_status fpphe_tech_cond(int d, double mu, int* cond1, int* cond2, double* value) {
  return guarded([&] {
    const fpphe::TechCondition t = fpphe::check_tech_cond(d, mu);
    if (cond1) *cond1 = t.supercritical ? 1 : 0;
    if (cond2) *cond2 = t.second_moment ? 1 : 0;
    if (value) *value = t.second_moment_value;
  });
}

fpphe_status fpphe_p_one(int d, double mu, double* out) {
  return scalar(out, [&] { return fpphe::p_one(fpphe::GwSpec{d, mu}); });
}

fpphe_status fpphe_edge_quantile_const(double eps, double gamma, double* out) {
  return scalar(out, [&] { return fpphe::edge_quantile_const(eps, gamma); });
}

fpphe_status fpphe_uniform_edge_constant(double eps, double lambda, double* out) {
  return scalar(out, [&] { return fpphe::uniform_edge_constant(eps, lambda); });
}

fpphe_status fpphe_janson_upper_tail(double a_star, double mean, double delta, double* out) {
  return scalar(out, [&] { return fpphe::janson_upper_tail(a_star, mean, delta); });
}

fpphe_status fpphe_janson_lower_tail(double a_star, double mean, double delta, double* out) {
  return scalar(out, [&] { return fpphe::janson_lower_tail(a_star, mean, delta); });
}

fpphe_status fpphe_phi_from_params(int D, double mu2, double eta, double f, double eps,
                                   int64_t* out) {
  return scalar(out, [&] { return fpphe::phi_from_params(D, mu2, eta, f, eps); });
}

fpphe_status fpphe_epsilon_max(int D, double mu2, double eta, double f, double* out) {
  return scalar(out, [&] { return fpphe::epsilon_max(D, mu2, eta, f); });
}

fpphe_status fpphe_tree_percolation_threshold(int phi, double* out) {
  return scalar(out, [&] { return fpphe::tree_percolation_threshold(phi); });
}

fpphe_status fpphe_lambda_zero(const fpphe_rate_constants* c, double* out) {
  return scalar(out, [&] { return fpphe::lambda_zero(constants_from(c)); });
}

fpphe_status fpphe_solve_hl(double lambda, const fpphe_rate_constants* c, double frak_c, int64_t R,
                            fpphe_feasibility* out) {
  return guarded([&] {
    require(out, "out");
    fpphe::FeasibilityProblem p;
    p.lambda = lambda;
    p.constants = constants_from(c);
    p.frak_c = frak_c;
    p.R = R;
    const fpphe::FeasibilitySolution s = fpphe::solve_hl(p);
    out->H = s.H;
    out->L = s.L;
    out->feasible = s.feasible ? 1 : 0;
    out->lhs1 = s.lhs1;
    out->rhs1 = s.rhs1;
    out->lhs2 = s.lhs2;
    out->rhs2 = s.rhs2;
    out->h_coefficient = s.h_coefficient;
    if (!s.feasible) last_error = s.diagnostics;
  });
}

fpphe_status fpphe_run_json(const char* op, const char* request, int workers, char** out) {
  return scalar(out, [&] {
    require(op, "op");
    require(request, "request");
    const auto j = nlohmann::json::parse(request, nullptr, false);
    if (j.is_discarded()) throw fpphe::InvalidParameter("request is not valid JSON");
    return copy_string(fpphe::run_request(op, j, workers).dump());
  });
}

}  // extern "C"
