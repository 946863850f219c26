#pragma once

// JSON request layer shared by the C API and the command line. Every op takes
// one JSON object and returns {"records": [...]} plus, for some ops, "csv"
// and "timing". Records echo the request (minus the worker count) so that
// any output line can be replayed.

#include <string_view>

#include <json.hpp>

#include "fpphe/graph.hpp"

namespace fpphe {

/// Graph from a spec object: {"kind": "tile" | "restricted_tile" |
/// "complete_tree" | "capped_tree" | "path" | "tile_tree" | "inline", ...}.
Graph graph_from_spec(const nlohmann::json& spec);

/// {"D", "L", "H", "R"}, read from `j` or from j["tile"] when present.
TileParams tile_from_json(const nlohmann::json& j);

/// Runs `op` on `request`. A positive `workers` overrides the request's own
/// worker count. Throws fpphe::Error on invalid input or failed runs.
nlohmann::json run_request(std::string_view op, const nlohmann::json& request, int workers);

/// Names accepted by run_request.
const std::vector<std::string>& request_ops();

}  // namespace fpphe
