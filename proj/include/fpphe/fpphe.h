#ifndef FPPHE_FPPHE_H
#define FPPHE_FPPHE_H

/* C interface of the fpphe shared library.
 *
 * Every fallible call returns an fpphe_status; on failure the message is
 * available from fpphe_last_error() on the same thread until the next call.
 * Objects are opaque and owned by the caller once returned; release them with
 * the matching *_free function. Strings returned through char** are released
 * with fpphe_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FPPHE_API
#elif defined(FPPHE_BUILDING_LIBRARY)
#define FPPHE_API __attribute__((visibility("default")))
#else
#define FPPHE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpphe_status {
  FPPHE_OK = 0,
  FPPHE_INVALID = 1,
  FPPHE_INFEASIBLE = 2,
  FPPHE_UNSTABLE = 3,
  FPPHE_RESOURCE = 4,
  FPPHE_EXHAUSTED = 5,
  FPPHE_INTERNAL = 6
} fpphe_status;

typedef enum fpphe_type { FPPHE_FPP1 = 0, FPPHE_FPPLAMBDA = 1 } fpphe_type;

typedef struct fpphe_graph fpphe_graph;
typedef struct fpphe_seeds fpphe_seeds;
typedef struct fpphe_outcome fpphe_outcome;

FPPHE_API const char* fpphe_version(void);
FPPHE_API const char* fpphe_last_error(void);
FPPHE_API const char* fpphe_status_name(fpphe_status status);
FPPHE_API void fpphe_string_free(char* s);

/* ------------------------------------------------------------ graphs */

FPPHE_API fpphe_status fpphe_graph_complete_tree(int d, int h, fpphe_graph** out);
/* merge != 0 collapses the parallel edges into the cap. */
FPPHE_API fpphe_status fpphe_graph_capped_tree(int d, int h, int merge, fpphe_graph** out);
FPPHE_API fpphe_status fpphe_graph_path(int k, fpphe_graph** out);
FPPHE_API fpphe_status fpphe_graph_tile(int D, int L, int H, int R, fpphe_graph** out);
FPPHE_API fpphe_status fpphe_graph_tile_tree(int phi, int depth, int D, int L, int H, int R,
                                             fpphe_graph** out);
/* side is "upper" or "lower". */
FPPHE_API fpphe_status fpphe_graph_restrict(const fpphe_graph* tile, const char* side,
                                            fpphe_graph** out);
/* endpoints holds 2 * edge_count vertex ids; edge i joins endpoints[2i] and
 * endpoints[2i + 1]. */
FPPHE_API fpphe_status fpphe_graph_from_edges(size_t vertex_count, const uint32_t* endpoints,
                                              size_t edge_count, fpphe_graph** out);
/* A graph dump ("FPPHE-GRAPH-v1") or a builder spec such as
 * {"kind": "tile", "D": 3, "L": 1, "H": 1, "R": 2}. */
FPPHE_API fpphe_status fpphe_graph_from_json(const char* text, fpphe_graph** out);
FPPHE_API void fpphe_graph_free(fpphe_graph* g);

FPPHE_API size_t fpphe_graph_vertex_count(const fpphe_graph* g);
FPPHE_API size_t fpphe_graph_edge_count(const fpphe_graph* g);
FPPHE_API fpphe_status fpphe_graph_landmark(const fpphe_graph* g, const char* name, uint32_t* out);
FPPHE_API fpphe_status fpphe_graph_degree(const fpphe_graph* g, uint32_t v, size_t* out);
FPPHE_API fpphe_status fpphe_graph_edge(const fpphe_graph* g, uint32_t e, uint32_t* a, uint32_t* b);
FPPHE_API fpphe_status fpphe_graph_generation(const fpphe_graph* g, uint32_t v, uint32_t* out);
FPPHE_API fpphe_status fpphe_graph_to_dot(const fpphe_graph* g, char** out);
FPPHE_API fpphe_status fpphe_graph_to_json(const fpphe_graph* g, char** out);

/* ------------------------------------------------------------- seeds */

/* Bernoulli(mu) seeds from the seed stream of trial `trial_index`. */
FPPHE_API fpphe_status fpphe_seeds_place(const fpphe_graph* g, double mu, const uint32_t* excluded,
                                         size_t excluded_count, uint64_t master_seed,
                                         uint64_t trial_index, fpphe_seeds** out);
FPPHE_API fpphe_status fpphe_seeds_fixed(const fpphe_graph* g, const uint32_t* seeds, size_t count,
                                         fpphe_seeds** out);
FPPHE_API void fpphe_seeds_free(fpphe_seeds* s);
FPPHE_API size_t fpphe_seeds_count(const fpphe_seeds* s);
FPPHE_API int fpphe_seeds_is_seed(const fpphe_seeds* s, uint32_t v);
/* Binary blob; *out is released with fpphe_string_free. */
FPPHE_API fpphe_status fpphe_seeds_serialize(const fpphe_seeds* s, char** out, size_t* size);
FPPHE_API fpphe_status fpphe_seeds_deserialize(const char* data, size_t size, fpphe_seeds** out);

/* -------------------------------------------------------- simulation */

typedef struct fpphe_stop {
  int has_target;
  uint32_t target;
  /* <= 0 for none. */
  double time_horizon;
  /* 0 for none. */
  size_t max_infected;
} fpphe_stop;

/* Dynamics come from the dynamics stream of trial `trial_index`. A NULL stop
 * runs until no infection attempt is pending. */
FPPHE_API fpphe_status fpphe_simulate(const fpphe_graph* g, uint32_t origin, const fpphe_seeds* seeds,
                                      double lambda, const fpphe_stop* stop, uint64_t master_seed,
                                      uint64_t trial_index, fpphe_outcome** out);
/* Same contract, literal per-edge clocks; meant for small graphs. */
FPPHE_API fpphe_status fpphe_simulate_explicit(const fpphe_graph* g, uint32_t origin,
                                               const fpphe_seeds* seeds, double lambda,
                                               const fpphe_stop* stop, uint64_t master_seed,
                                               uint64_t trial_index, fpphe_outcome** out);
FPPHE_API void fpphe_outcome_free(fpphe_outcome* o);
FPPHE_API const char* fpphe_outcome_stop_reason(const fpphe_outcome* o);
FPPHE_API size_t fpphe_outcome_infected_count(const fpphe_outcome* o);
/* parent is UINT32_MAX for the origin and for uninfected vertices. */
FPPHE_API fpphe_status fpphe_outcome_vertex(const fpphe_outcome* o, uint32_t v, int* infected,
                                            double* time, int* type, uint32_t* parent);
/* FPPHE_EXHAUSTED when the stop target was not reached. */
FPPHE_API fpphe_status fpphe_outcome_target(const fpphe_outcome* o, uint32_t* vertex, int* type,
                                            double* time);
/* FPPHE_EXHAUSTED when no seed started the cluster reaching the target. */
FPPHE_API fpphe_status fpphe_outcome_winning_seed(const fpphe_outcome* o, uint32_t* vertex,
                                                  uint32_t* level);
FPPHE_API fpphe_status fpphe_outcome_to_json(const fpphe_outcome* o, char** out);

/* --------------------------------------------------------- analytics */

FPPHE_API fpphe_status fpphe_gw_extinction(int d, double mu, double tol, double* out);
FPPHE_API fpphe_status fpphe_tech_cond(int d, double mu, int* cond1, int* cond2, double* value);
FPPHE_API fpphe_status fpphe_p_one(int d, double mu, double* out);
FPPHE_API fpphe_status fpphe_edge_quantile_const(double eps, double gamma, double* out);
FPPHE_API fpphe_status fpphe_uniform_edge_constant(double eps, double lambda, double* out);
FPPHE_API fpphe_status fpphe_janson_upper_tail(double a_star, double mean, double delta, double* out);
FPPHE_API fpphe_status fpphe_janson_lower_tail(double a_star, double mean, double delta, double* out);
FPPHE_API fpphe_status fpphe_phi_from_params(int D, double mu2, double eta, double f, double eps,
                                             int64_t* out);
FPPHE_API fpphe_status fpphe_epsilon_max(int D, double mu2, double eta, double f, double* out);
FPPHE_API fpphe_status fpphe_tree_percolation_threshold(int phi, double* out);

typedef struct fpphe_rate_constants {
  double cin1, cin2, cinD;
  double cout1, cout2, coutD;
} fpphe_rate_constants;

typedef struct fpphe_feasibility {
  int64_t H;
  int64_t L;
  int feasible;
  double lhs1, rhs1, lhs2, rhs2;
  double h_coefficient;
} fpphe_feasibility;

FPPHE_API fpphe_status fpphe_lambda_zero(const fpphe_rate_constants* c, double* out);
FPPHE_API fpphe_status fpphe_solve_hl(double lambda, const fpphe_rate_constants* c, double frak_c,
                                      int64_t R, fpphe_feasibility* out);

/* -------------------------------------------------------- JSON requests */

/* Runs a named op ("estimate", "sweep", "analytics.gw", ...) on a JSON
 * request. workers > 0 overrides the request's worker count. *out receives
 * the JSON response. */
FPPHE_API fpphe_status fpphe_run_json(const char* op, const char* request, int workers, char** out);

#ifdef __cplusplus
}
#endif

#endif /* FPPHE_FPPHE_H */
