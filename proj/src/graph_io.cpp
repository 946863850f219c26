#include "fpphe/io.hpp"

#include "fpphe/error.hpp"

namespace fpphe {

using nlohmann::json;

json graph_to_json(const Graph& g) {
  json edges = json::array();
  EdgeId id = 0;
  for (const Edge& e : g.edges()) edges.push_back({e.a, e.b, id++});
  json roles = json::array();
  for (Role r : g.roles()) roles.push_back(std::string(to_string(r)));
  json landmarks = json::object();
  for (const auto& [name, v] : g.landmarks()) landmarks[name] = v;
  return {{"format", std::string(kGraphMagic)},
          {"vertex_count", g.vertex_count()},
          {"edges", std::move(edges)},
          {"landmarks", std::move(landmarks)},
          {"roles", std::move(roles)},
          {"generation", std::vector<std::uint32_t>(g.generations().begin(),
                                                    g.generations().end())}};
}

Graph graph_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string()) != kGraphMagic) {
      throw InvalidParameter("graph dump lacks the " + std::string(kGraphMagic) + " format tag");
    }
    const auto n = j.at("vertex_count").get<std::size_t>();
    std::vector<Edge> edges;
    for (const json& e : j.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) {
        throw InvalidParameter("edge entries must be [a, b] or [a, b, id]");
      }
      if (e.size() == 3 && e[2].get<std::size_t>() != edges.size()) {
        throw InvalidParameter("edge ids must be listed in increasing order from 0");
      }
      edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>()});
    }
    std::map<std::string, VertexId> landmarks;
    if (j.contains("landmarks")) {
      for (const auto& [name, v] : j.at("landmarks").items()) landmarks[name] = v.get<VertexId>();
    }
    std::vector<Role> roles(n, Role::generic);
    if (j.contains("roles")) {
      const json& r = j.at("roles");
      if (r.size() != n) throw InvalidParameter("roles must list one tag per vertex");
      for (std::size_t i = 0; i < n; ++i) roles[i] = parse_role(r[i].get<std::string>());
    }
    std::vector<std::uint32_t> generation(n, 0);
    if (j.contains("generation")) {
      generation = j.at("generation").get<std::vector<std::uint32_t>>();
      if (generation.size() != n) {
        throw InvalidParameter("generation must list one value per vertex");
      }
    }
    return Graph(n, std::move(edges), std::move(landmarks), std::move(roles),
                 std::move(generation));
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("malformed graph JSON: ") + e.what());
  }
}

json record_to_json(const InfectionRecord& r) {
  json j = {{"vertex", r.vertex}, {"time", r.time}, {"type", std::string(to_string(r.type))}};
  j["parent"] = r.parent ? json(*r.parent) : json(nullptr);
  j["via_edge"] = r.via_edge ? json(*r.via_edge) : json(nullptr);
  return j;
}

json outcome_to_json(const SimOutcome& out) {
  json j;
  j["stop_reason"] = std::string(to_string(out.stop_reason));
  if (out.target_verdict) {
    j["target_verdict"] = {{"vertex", out.target_verdict->vertex},
                           {"type", std::string(to_string(out.target_verdict->type))},
                           {"time", out.target_verdict->time}};
  } else {
    j["target_verdict"] = nullptr;
  }
  j["winning_seed"] = out.winning_seed ? json(*out.winning_seed) : json(nullptr);
  j["winning_seed_level"] =
      out.winning_seed_level ? json(*out.winning_seed_level) : json(nullptr);
  j["infected_count"] = out.order.size();
  json records = json::array();
  for (VertexId v : out.order) records.push_back(record_to_json(*out.record(v)));
  j["records"] = std::move(records);
  return j;
}

std::string outcome_trace_jsonl(const SimOutcome& out) {
  std::string text;
  for (VertexId v : out.order) {
    text += record_to_json(*out.record(v)).dump();
    text += '\n';
  }
  return text;
}

}  // namespace fpphe
