#pragma once

// Monte Carlo estimation over independent trials. Trial i draws its seeds
// from stream `seeds` and its dynamics from stream `dynamics` of the engine
// keyed by (master_seed, i), so results do not depend on the worker count and
// runs at different mu share their uniforms (common random numbers).

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpphe/graph.hpp"
#include "fpphe/sim.hpp"

namespace fpphe {

struct EstimateResult {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double z = 1.96;
  double wall_time_s = 0.0;
  /// Per-trial 0/1 outcomes, filled only in audit mode.
  std::vector<std::uint8_t> trial_log;
};

EstimateResult make_estimate(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

enum class EventKind {
  target_fpp1,     ///< target infected by FPP1
  target_lambda,   ///< target infected by FPP_lambda
  target_reached,  ///< target infected at all before the stop
  target_time_le,  ///< target infected no later than the threshold
  target_time_ge,  ///< target not infected before the threshold
};

std::string_view to_string(EventKind kind) noexcept;
EventKind parse_event_kind(std::string_view name);

struct EventSpec {
  EventKind kind = EventKind::target_fpp1;
  /// Landmark name or decimal vertex id.
  std::string target = "B";
  double threshold = std::numeric_limits<double>::infinity();
};

/// Landmark lookup, falling back to a decimal vertex id.
VertexId resolve_vertex(const Graph& g, std::string_view name);

struct TrialPlan {
  std::shared_ptr<const Graph> graph;
  /// Landmark or id; empty selects O, else root.
  std::string origin;
  double mu = 0.0;
  double lambda = 1.0;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  /// The event target is used when no stop field is set.
  StopCondition stop;
  EventSpec event;
  /// Same seeds in every trial instead of Bernoulli(mu) placement.
  std::optional<std::vector<VertexId>> fixed_seeds;
  double z = 1.96;
  int workers = 1;
  bool audit = false;
};

EstimateResult estimate_event(const TrialPlan& plan);

struct SweepRequest {
  TileParams tile;
  double lambda = 1.0;
  std::vector<double> mu_list;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  double z = 1.96;
};

struct SweepRow {
  double mu = 0.0;
  /// P(B infected by FPP1).
  EstimateResult estimate;
  /// Side of the parent of B, split by the type that reached B.
  std::uint64_t upper_fpp1 = 0, lower_fpp1 = 0;
  std::uint64_t upper_lambda = 0, lower_lambda = 0;
  /// Winning-seed histogram for FPP_lambda arrivals: side ("upper", "lower",
  /// "tail") to generation to count.
  std::map<std::string, std::map<std::uint32_t, std::uint64_t>> seed_levels;
  /// Trials whose parent chain of B visits the other side; always 0.
  std::uint64_t side_violations = 0;
};

struct MonotonicityReport {
  /// Per-comparison threshold after the Bonferroni correction of a
  /// two-sided z > base test over all adjacent pairs.
  double z_critical = 0.0;
  /// z of p[i+1] - p[i] for each adjacent pair.
  std::vector<double> step_z;
  /// +1 significant increase, -1 significant decrease, 0 otherwise.
  std::vector<int> step_sign;
  /// Significant steps in opposite directions exist.
  bool nonmonotone_witness = false;
  /// (i, j): a significant step at i followed by one of opposite sign at j.
  std::vector<std::pair<std::size_t, std::size_t>> witnesses;
  /// No significant increase anywhere.
  bool nonincreasing = true;
};

MonotonicityReport monotonicity_report(const std::vector<SweepRow>& rows, double z_base = 3.0);

struct SweepReport {
  std::vector<SweepRow> rows;
  MonotonicityReport monotonicity;
};

SweepReport tile_sweep(const SweepRequest& request);

struct Threshold {
  std::string name;
  /// May be +infinity.
  double value = std::numeric_limits<double>::infinity();
  /// true: passage time <= value; false: passage time >= value.
  bool less_equal = true;
  /// Also require the cap of the side to be infected by FPP1.
  bool require_cap_fpp1 = false;
};

struct LemmaInputs {
  double eta = 0.0;
  double eps = 0.0;
};

struct RestrictedRequest {
  TileParams tile;
  Side side = Side::lower;
  double mu = 0.0;
  double lambda = 1.0;
  std::vector<Threshold> thresholds;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  double z = 1.96;
  std::optional<LemmaInputs> lemma;
};

struct RestrictedReport {
  /// "target_fpp1", "cap_fpp1", then one entry per threshold.
  std::vector<std::pair<std::string, EstimateResult>> events;
  double mean_passage = 0.0;
  double sd_passage = 0.0;
  /// (1 - eps)^k (1 - mu)^2 [(1 - f_d(mu) - eta)(1 - mu)^2 - eps] with
  /// (k, d) = (3, 2) on the lower side and (2, D) on the upper side.
  std::optional<double> lemma_bound;
};

RestrictedReport restricted_events(const RestrictedRequest& request);

struct SurvivalRequest {
  int phi = 1;
  int depth = 1;
  TileParams tile;
  double mu = 0.0;
  double lambda = 1.0;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  double z = 1.96;
};

struct SurvivalReport {
  /// P(FPP1 infects a junction at the final depth of the tile tree).
  EstimateResult direct;
  /// P(B infected by FPP1) on a standalone tile.
  EstimateResult tile;
  /// Reach probabilities r_1..r_depth of the independent-tile model.
  std::vector<double> approx_reach;
  double approx = 0.0;
  /// direct.p_hat - approx.
  double gap = 0.0;
};

/// r_1 = 1 - (1 - p)^phi, r_k = 1 - (1 - p r_{k-1})^phi.
std::vector<double> independent_tile_reach(int phi, int depth, double p_tile);

SurvivalReport survival_proxy(const SurvivalRequest& request);

struct CoverageReport {
  std::uint64_t outer = 0;
  std::uint64_t inner = 0;
  double p_true = 0.0;
  double z = 1.96;
  std::uint64_t covered = 0;
  double coverage = 0.0;
};

CoverageReport ci_selftest(std::uint64_t outer, std::uint64_t inner, double p_true,
                           std::uint64_t master_seed, double z = 1.96, int workers = 1);

}  // namespace fpphe
