#pragma once

// JSON forms of graphs and simulation outcomes.

#include <string>
#include <string_view>

#include <json.hpp>

#include "fpphe/graph.hpp"
#include "fpphe/sim.hpp"

namespace fpphe {

inline constexpr std::string_view kGraphMagic = "FPPHE-GRAPH-v1";

/// {"format": "FPPHE-GRAPH-v1", "vertex_count", "edges": [[a, b, id], ...],
///  "landmarks": {name: id}, "roles": [...], "generation": [...]}
nlohmann::json graph_to_json(const Graph& g);
/// Rejects a missing or different format tag and out-of-order edge ids.
Graph graph_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const InfectionRecord& r);

/// Stop reason, target verdict, winning seed and one record per infected
/// vertex in infection order.
nlohmann::json outcome_to_json(const SimOutcome& out);

/// One JSON line per infected vertex, in infection order.
std::string outcome_trace_jsonl(const SimOutcome& out);

}  // namespace fpphe
