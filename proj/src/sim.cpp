#include "fpphe/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fpphe/error.hpp"

namespace fpphe {

std::string_view to_string(ProcessType type) noexcept {
  return type == ProcessType::fpp1 ? "FPP1" : "FPPLAMBDA";
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::target_reached: return "target-reached";
    case StopReason::horizon: return "horizon";
    case StopReason::exhausted: return "exhausted";
    case StopReason::budget: return "budget";
    case StopReason::fpp1_blocked: return "fpp1-blocked";
  }
  return "exhausted";
}

void StopCondition::validate(const Graph& g) const {
  const bool any = target || time_horizon || max_infected || !fpp1_targets.empty() ||
                   halt_when_fpp1_blocked || run_to_exhaustion;
  if (!any) throw InvalidParameter("stop condition must set at least one field");
  if (target && !g.contains(*target)) throw InvalidParameter("stop target not in graph");
  if (time_horizon && !(*time_horizon > 0.0)) {
    throw InvalidParameter("time horizon must be positive");
  }
  if (max_infected && *max_infected == 0) throw InvalidParameter("max_infected must be positive");
  for (VertexId v : fpp1_targets) {
    if (!g.contains(v)) throw InvalidParameter("fpp1 target not in graph");
  }
}

std::optional<InfectionRecord> SimOutcome::record(VertexId v) const {
  if (!infected(v)) return std::nullopt;
  InfectionRecord r;
  r.vertex = v;
  r.time = time[v];
  r.type = type[v];
  if (via_edge[v] != kNoEdge) r.via_edge = via_edge[v];
  if (parent[v] != kNoVertex) r.parent = parent[v];
  return r;
}

std::vector<VertexId> SimOutcome::chain_to(VertexId v) const {
  std::vector<VertexId> chain;
  if (!infected(v)) return chain;
  for (VertexId u = v; u != kNoVertex; u = parent[u]) chain.push_back(u);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

namespace {

void check_inputs(const Graph& g, VertexId origin, const SeedConfig& seeds, double lambda,
                  const StopCondition& stop) {
  if (!g.contains(origin)) throw InvalidParameter("origin not in graph");
  if (seeds.size() != g.vertex_count()) {
    throw InvalidParameter("seed configuration does not match the graph");
  }
  if (seeds.seed(origin)) throw InvalidParameter("the origin must not host a seed");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be positive");
  stop.validate(g);
}

void reset_outcome(SimOutcome& out, std::size_t n) {
  out.time.assign(n, SimOutcome::kUninfected);
  out.type.assign(n, ProcessType::fpp1);
  out.parent.assign(n, kNoVertex);
  out.via_edge.assign(n, kNoEdge);
  out.order.clear();
  out.stop_reason = StopReason::exhausted;
  out.target_verdict.reset();
  out.winning_seed.reset();
  out.winning_seed_level.reset();
}

ProcessType infection_type(VertexId v, VertexId origin, VertexId from, const SeedConfig& seeds,
                           const SimOutcome& out) {
  if (v == origin) return ProcessType::fpp1;
  if (seeds.is_seed[v] != 0) return ProcessType::fpp_lambda;  // sizes checked on entry
  return out.type[from];
}

// Returns true when the run must halt after infecting v.
bool halts_after(const SimOutcome& out, VertexId v, const StopCondition& stop,
                 const std::vector<std::uint8_t>& fpp1_target, StopReason& reason) {
  if (stop.target && *stop.target == v) {
    reason = StopReason::target_reached;
    return true;
  }
  if (!fpp1_target.empty() && fpp1_target[v] && out.type[v] == ProcessType::fpp1) {
    reason = StopReason::target_reached;
    return true;
  }
  if (stop.max_infected && out.order.size() >= *stop.max_infected) {
    reason = StopReason::budget;
    return true;
  }
  return false;
}

void finalize(SimOutcome& out, const Graph& g, const StopCondition& stop) {
  if (!stop.target || !out.infected(*stop.target)) return;
  const VertexId t = *stop.target;
  out.target_verdict = TargetVerdict{t, out.type[t], out.time[t]};
  if (out.type[t] != ProcessType::fpp_lambda) return;
  // The first FPP_lambda vertex on the chain is the seed that started the
  // cluster reaching the target.
  for (VertexId u : out.chain_to(t)) {
    if (out.type[u] == ProcessType::fpp_lambda) {
      out.winning_seed = u;
      out.winning_seed_level = g.generation(u);
      return;
    }
  }
}

std::vector<std::uint8_t> target_mask(const Graph& g, const StopCondition& stop) {
  std::vector<std::uint8_t> mask;
  if (stop.fpp1_targets.empty()) return mask;
  mask.assign(g.vertex_count(), 0);
  for (VertexId v : stop.fpp1_targets) mask[v] = 1;
  return mask;
}

}  // namespace

Simulator::Simulator(const Graph& g) : graph_(&g) {
  group_offset_.reserve(g.vertex_count() + 1);
  std::vector<Incidence> sorted;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    group_offset_.push_back(groups_.size());
    const auto inc = g.incident(v);
    sorted.assign(inc.begin(), inc.end());
    std::sort(sorted.begin(), sorted.end(), [](const Incidence& a, const Incidence& b) {
      return a.neighbor != b.neighbor ? a.neighbor < b.neighbor : a.edge < b.edge;
    });
    for (const Incidence& i : sorted) {
      if (groups_.size() == group_offset_.back() || groups_.back().neighbor != i.neighbor) {
        groups_.push_back(EdgeGroup{i.neighbor, static_cast<std::uint32_t>(group_edges_.size()), 0});
      }
      group_edges_.push_back(i.edge);
      ++groups_.back().count;
    }
  }
  group_offset_.push_back(groups_.size());
}

namespace {

std::uint64_t key_bits(double t) noexcept { return std::bit_cast<std::uint64_t>(t); }

}  // namespace

void Simulator::MonotoneQueue::clear() {
  for (auto& b : buckets_) b.clear();
  occupied_ = 0;
  last_ = 0;
  size_ = 0;
}

std::size_t Simulator::MonotoneQueue::bucket_of(std::uint64_t k) const noexcept {
  return k == last_ ? 0 : static_cast<std::size_t>(64 - std::countl_zero(k ^ last_));
}

// Non-negative doubles order like their bit patterns.
void Simulator::MonotoneQueue::push(const Event& e) {
  const std::size_t index = bucket_of(key_bits(e.time));
  buckets_[index].push_back(e);
  occupied_ |= std::uint64_t{1} << index;
  ++size_;
}

Simulator::Event Simulator::MonotoneQueue::pop() {
  auto& front = buckets_[0];
  if (front.empty()) {
    const auto i = static_cast<std::size_t>(std::countr_zero(occupied_));
    auto& source = buckets_[i];
    std::uint64_t lowest = key_bits(source.front().time);
    for (const Event& e : source) lowest = std::min(lowest, key_bits(e.time));
    last_ = lowest;
    for (const Event& e : source) {
      const std::size_t index = bucket_of(key_bits(e.time));
      buckets_[index].push_back(e);
      occupied_ |= std::uint64_t{1} << index;
    }
    source.clear();
    occupied_ &= ~(std::uint64_t{1} << i);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < front.size(); ++j) {
    if (front[j].vertex < front[best].vertex) best = j;
  }
  const Event top = front[best];
  front[best] = front.back();
  front.pop_back();
  if (front.empty()) occupied_ &= ~std::uint64_t{1};
  --size_;
  return top;
}

void Simulator::reset() { reset_outcome(out_, graph_->vertex_count()); }

const SimOutcome& Simulator::run(VertexId origin, const SeedConfig& seeds, double lambda,
                                 const StopCondition& stop, Engine& rng,
                                 const InfectionObserver* observer) {
  const Graph& g = *graph_;
  check_inputs(g, origin, seeds, lambda, stop);
  reset();
  is_fpp1_target_ = target_mask(g, stop);
  queue_.clear();

  best_time_.assign(g.vertex_count(), std::numeric_limits<double>::infinity());
  best_edge_.assign(g.vertex_count(), kNoEdge);
  best_from_.assign(g.vertex_count(), kNoVertex);
  best_from_fpp1_.assign(g.vertex_count(), 0);
  queue_.push(Event{0.0, origin});
  best_time_[origin] = 0.0;
  best_from_fpp1_[origin] = 1;
  // Uninfected vertices whose best proposal comes from FPP1. Once it is zero,
  // no FPP1 proposal can win any vertex.
  std::size_t pending_from_fpp1 = 1;
  double clock = 0.0;

  for (;;) {
    if (stop.halt_when_fpp1_blocked && pending_from_fpp1 == 0) {
      out_.stop_reason = StopReason::fpp1_blocked;
      break;
    }
    if (queue_.empty()) {
      out_.stop_reason = StopReason::exhausted;
      break;
    }
    const Event ev = queue_.pop();
    const VertexId v = ev.vertex;
    // Superseded proposals stay queued and are skipped here.
    if (out_.time[v] != SimOutcome::kUninfected || ev.time != best_time_[v]) continue;
    if (stop.time_horizon && ev.time > *stop.time_horizon) {
      out_.stop_reason = StopReason::horizon;
      break;
    }
    if (ev.time < clock) throw std::logic_error("event popped out of time order");
    clock = ev.time;
    if (best_from_fpp1_[v]) --pending_from_fpp1;

    out_.time[v] = ev.time;
    out_.type[v] = infection_type(v, origin, best_from_[v], seeds, out_);
    out_.parent[v] = best_from_[v];
    out_.via_edge[v] = best_edge_[v];
    out_.order.push_back(v);
    if (observer != nullptr && *observer) (*observer)(*out_.record(v));

    StopReason reason{};
    if (halts_after(out_, v, stop, is_fpp1_target_, reason)) {
      out_.stop_reason = reason;
      break;
    }

    const double target_bound =
        stop.target ? best_time_[*stop.target] : std::numeric_limits<double>::infinity();
    const bool spreads_fpp1 = out_.type[v] == ProcessType::fpp1;
    const double rate = spreads_fpp1 ? 1.0 : lambda;
    for (std::size_t gi = group_offset_[v]; gi < group_offset_[v + 1]; ++gi) {
      const EdgeGroup& grp = groups_[gi];
      const VertexId w = grp.neighbor;
      if (out_.time[w] != SimOutcome::kUninfected) continue;
      const double t = ev.time + exponential(rng, rate * grp.count);
      const double queued = best_time_[w];
      if (t > queued) continue;
      EdgeId edge = group_edges_[grp.first];
      if (grp.count > 1) {
        const auto pick = static_cast<std::uint32_t>(uniform01(rng) * grp.count);
        edge = group_edges_[grp.first + std::min(pick, grp.count - 1)];
      }
      if (t == best_time_[w] && edge > best_edge_[w]) continue;
      if (best_from_fpp1_[w] != static_cast<std::uint8_t>(spreads_fpp1)) {
        // A set flag implies an earlier FPP1 proposal, so the count is positive.
        spreads_fpp1 ? ++pending_from_fpp1 : --pending_from_fpp1;
      }
      best_time_[w] = t;
      best_edge_[w] = edge;
      best_from_[w] = v;
      best_from_fpp1_[w] = spreads_fpp1;
      // An equal-time improvement already has a queued entry with this key.
      // Entries later than the target's tentative time never pop before the
      // run stops; the target's own entry keeps the queue nonempty.
      if (t != queued && t <= target_bound) queue_.push(Event{t, w});
    }
  }
  finalize(out_, g, stop);
  return out_;
}

SimOutcome simulate(const Graph& g, VertexId origin, const SeedConfig& seeds, double lambda,
                    const StopCondition& stop, Engine& rng, const InfectionObserver* observer) {
  Simulator sim(g);
  return sim.run(origin, seeds, lambda, stop, rng, observer);
}

SimOutcome explicit_clock_simulate(const Graph& g, VertexId origin, const SeedConfig& seeds,
                                   double lambda, const StopCondition& stop, Engine& rng) {
  check_inputs(g, origin, seeds, lambda, stop);
  SimOutcome out;
  reset_outcome(out, g.vertex_count());
  const auto fpp1_target = target_mask(g, stop);

  struct Clock {
    VertexId from;
    VertexId to;
    EdgeId edge;
    double rate;
  };
  std::vector<Clock> clocks;

  auto infect = [&](VertexId v, VertexId from, EdgeId edge, double t) {
    out.time[v] = t;
    out.type[v] = infection_type(v, origin, from, seeds, out);
    out.parent[v] = from;
    out.via_edge[v] = edge;
    out.order.push_back(v);
    std::erase_if(clocks, [v](const Clock& c) { return c.to == v; });
    const double rate = out.type[v] == ProcessType::fpp1 ? 1.0 : lambda;
    for (const Incidence& inc : g.incident(v)) {
      if (!out.infected(inc.neighbor)) clocks.push_back(Clock{v, inc.neighbor, inc.edge, rate});
    }
  };

  double now = 0.0;
  infect(origin, kNoVertex, kNoEdge, 0.0);
  StopReason reason{};
  if (halts_after(out, origin, stop, fpp1_target, reason)) {
    out.stop_reason = reason;
    finalize(out, g, stop);
    return out;
  }
  for (;;) {
    if (stop.halt_when_fpp1_blocked &&
        std::none_of(clocks.begin(), clocks.end(), [&](const Clock& c) {
          return out.type[c.from] == ProcessType::fpp1;
        })) {
      out.stop_reason = StopReason::fpp1_blocked;
      break;
    }
    if (clocks.empty()) {
      out.stop_reason = StopReason::exhausted;
      break;
    }
    double total = 0.0;
    for (const Clock& c : clocks) total += c.rate;
    now += exponential(rng, total);
    if (stop.time_horizon && now > *stop.time_horizon) {
      out.stop_reason = StopReason::horizon;
      break;
    }
    double pick = uniform01(rng) * total;
    std::size_t chosen = clocks.size() - 1;
    for (std::size_t i = 0; i < clocks.size(); ++i) {
      pick -= clocks[i].rate;
      if (pick < 0.0) {
        chosen = i;
        break;
      }
    }
    const Clock ring = clocks[chosen];
    infect(ring.to, ring.from, ring.edge, now);
    if (halts_after(out, ring.to, stop, fpp1_target, reason)) {
      out.stop_reason = reason;
      break;
    }
  }
  finalize(out, g, stop);
  return out;
}

PassageResult first_passage_time(const Graph& g, VertexId origin, VertexId target,
                                 const SeedConfig& seeds, double lambda, Engine& rng) {
  StopCondition stop;
  stop.target = target;
  const SimOutcome out = simulate(g, origin, seeds, lambda, stop, rng);
  if (!out.target_verdict) {
    throw Exhausted("target " + std::to_string(target) + " is unreachable from the origin");
  }
  return {out.target_verdict->time, out.target_verdict->type};
}

}  // namespace fpphe
