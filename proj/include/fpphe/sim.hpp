#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string_view>
#include <vector>

#include "fpphe/graph.hpp"
#include "fpphe/rng.hpp"
#include "fpphe/seeding.hpp"

namespace fpphe {

enum class ProcessType : std::uint8_t { fpp1, fpp_lambda };

std::string_view to_string(ProcessType type) noexcept;

struct InfectionRecord {
  VertexId vertex = kNoVertex;
  double time = 0.0;
  ProcessType type = ProcessType::fpp1;
  std::optional<EdgeId> via_edge;
  std::optional<VertexId> parent;
};

enum class StopReason : std::uint8_t {
  target_reached,
  horizon,
  exhausted,
  budget,
  /// No pending infection attempt originates from an FPP1 vertex.
  fpp1_blocked,
};

std::string_view to_string(StopReason reason) noexcept;

struct StopCondition {
  std::optional<VertexId> target;
  std::optional<double> time_horizon;
  std::optional<std::size_t> max_infected;
  /// Halt as soon as any of these vertices is infected by FPP1.
  std::vector<VertexId> fpp1_targets;
  /// Halt once FPP1 can no longer spread.
  bool halt_when_fpp1_blocked = false;
  /// Run until no infection attempt is pending.
  bool run_to_exhaustion = false;

  void validate(const Graph& g) const;
};

struct TargetVerdict {
  VertexId vertex;
  ProcessType type;
  double time;
};

/// Per-vertex infection state after a run, stored as parallel arrays.
struct SimOutcome {
  static constexpr double kUninfected = std::numeric_limits<double>::infinity();

  std::vector<double> time;
  std::vector<ProcessType> type;
  std::vector<VertexId> parent;
  std::vector<EdgeId> via_edge;
  /// Infected vertices in infection order.
  std::vector<VertexId> order;

  StopReason stop_reason = StopReason::exhausted;
  std::optional<TargetVerdict> target_verdict;
  std::optional<VertexId> winning_seed;
  std::optional<std::uint32_t> winning_seed_level;

  bool infected(VertexId v) const { return time.at(v) != kUninfected; }
  std::optional<InfectionRecord> record(VertexId v) const;
  /// Parent chain from the origin to v inclusive; empty if v is uninfected.
  std::vector<VertexId> chain_to(VertexId v) const;
};

using InfectionObserver = std::function<void(const InfectionRecord&)>;

/// Event-driven FPPHE simulator with reusable buffers.
///
/// When a vertex is infected with type g, each incident edge to a still
/// uninfected vertex proposes an infection at t + Exp(rate of g); the earliest
/// proposal per vertex wins. Equal times resolve to the lower vertex id, then
/// the lower edge id.
///
/// Parallel edges to one neighbor are drawn as a group: the minimum of k
/// Exp(r) clocks is Exp(k r), and the winning edge is uniform among the k and
/// independent of that minimum, so it is drawn only if the proposal can win.
class Simulator {
 public:
  explicit Simulator(const Graph& g);

  const SimOutcome& run(VertexId origin, const SeedConfig& seeds, double lambda,
                        const StopCondition& stop, Engine& rng,
                        const InfectionObserver* observer = nullptr);

  const SimOutcome& outcome() const noexcept { return out_; }

 private:
  // Queue entries carry only the ordering key. The edge and parent of the
  // proposal are those of best_*_[vertex]; entries that no longer match the
  // vertex's best time are stale and skipped.
  struct Event {
    double time;
    VertexId vertex;
  };
  // Radix heap: popped times never decrease and every push is at or after the
  // last pop, so entries are bucketed by the highest bit in which their time's
  // bit pattern differs from the last popped one. Equal times pop in vertex
  // order.
  class MonotoneQueue {
   public:
    void clear();
    bool empty() const noexcept { return size_ == 0; }
    void push(const Event& e);
    Event pop();

   private:
    std::size_t bucket_of(std::uint64_t key) const noexcept;

    // Times are non-negative, so the sign bit never differs and 64 buckets
    // suffice. Bit i of occupied_ is set iff bucket i is nonempty.
    std::array<std::vector<Event>, 64> buckets_;
    std::uint64_t occupied_ = 0;
    std::uint64_t last_ = 0;
    std::size_t size_ = 0;
  };

  struct EdgeGroup {
    VertexId neighbor;
    std::uint32_t first;  // index into group_edges_
    std::uint32_t count;
  };

  void reset();

  const Graph* graph_;
  std::vector<std::size_t> group_offset_;  // per vertex, into groups_
  std::vector<EdgeGroup> groups_;
  std::vector<EdgeId> group_edges_;
  SimOutcome out_;
  std::vector<std::uint8_t> is_fpp1_target_;
  MonotoneQueue queue_;
  // Best pending proposal per vertex. A proposal that does not beat it can
  // never win, so it is drawn (keeping the random stream fixed) but not queued.
  std::vector<double> best_time_;
  std::vector<EdgeId> best_edge_;
  std::vector<VertexId> best_from_;
  std::vector<std::uint8_t> best_from_fpp1_;
};

SimOutcome simulate(const Graph& g, VertexId origin, const SeedConfig& seeds, double lambda,
                    const StopCondition& stop, Engine& rng,
                    const InfectionObserver* observer = nullptr);

/// Literal continuous-time simulation: every live (infected -> uninfected)
/// edge instance carries a clock, the next ring is drawn from the total rate
/// and the ringing clock is chosen in proportion to its rate. Meant as an
/// independent check of `simulate` on small graphs.
SimOutcome explicit_clock_simulate(const Graph& g, VertexId origin, const SeedConfig& seeds,
                                   double lambda, const StopCondition& stop, Engine& rng);

struct PassageResult {
  double time;
  ProcessType type;
};

/// Infection time and type of `target`; throws Exhausted if it is unreachable.
PassageResult first_passage_time(const Graph& g, VertexId origin, VertexId target,
                                 const SeedConfig& seeds, double lambda, Engine& rng);

}  // namespace fpphe
