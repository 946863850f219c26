#include "fpphe/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <deque>
#include <sstream>

#include "fpphe/error.hpp"

namespace fpphe {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::generic: return "generic";
    case Role::origin: return "origin";
    case Role::upper: return "upper";
    case Role::lower: return "lower";
    case Role::tail: return "tail";
    case Role::cap: return "cap";
  }
  return "generic";
}

Role parse_role(std::string_view name) {
  for (Role r : {Role::generic, Role::origin, Role::upper, Role::lower, Role::tail, Role::cap}) {
    if (to_string(r) == name) return r;
  }
  throw InvalidParameter("unknown role '" + std::string(name) + "'");
}

std::string_view to_string(Side side) noexcept {
  return side == Side::upper ? "upper" : "lower";
}

Side parse_side(std::string_view name) {
  if (name == "upper") return Side::upper;
  if (name == "lower") return Side::lower;
  throw InvalidParameter("side must be 'upper' or 'lower', got '" + std::string(name) + "'");
}

Graph::Graph(std::size_t vertex_count, std::vector<Edge> edges,
             std::map<std::string, VertexId> landmarks, std::vector<Role> roles,
             std::vector<std::uint32_t> generation)
    : edges_(std::move(edges)),
      landmarks_(std::move(landmarks)),
      roles_(std::move(roles)),
      generation_(std::move(generation)) {
  if (vertex_count >= kNoVertex) throw InvalidParameter("vertex count exceeds id range");
  if (roles_.empty()) roles_.assign(vertex_count, Role::generic);
  if (generation_.empty()) generation_.assign(vertex_count, 0);
  if (roles_.size() != vertex_count || generation_.size() != vertex_count) {
    throw InvalidParameter("per-vertex tag arrays must match the vertex count");
  }
  if (edges_.size() >= kNoEdge) throw InvalidParameter("edge count exceeds id range");
  for (const Edge& e : edges_) {
    if (e.a >= vertex_count || e.b >= vertex_count) {
      throw InvalidParameter("edge endpoint out of range");
    }
    if (e.a == e.b) throw InvalidParameter("self-loops are not allowed");
  }
  for (const auto& [name, v] : landmarks_) {
    if (name.empty()) throw InvalidParameter("empty landmark name");
    if (v >= vertex_count) throw InvalidParameter("landmark '" + name + "' out of range");
  }

  offsets_.assign(vertex_count + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.a + 1];
    ++offsets_[e.b + 1];
  }
  for (std::size_t v = 0; v < vertex_count; ++v) offsets_[v + 1] += offsets_[v];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    const Edge& e = edges_[id];
    adjacency_[cursor[e.a]++] = Incidence{e.b, id};
    adjacency_[cursor[e.b]++] = Incidence{e.a, id};
  }
}

std::optional<VertexId> Graph::landmark(std::string_view name) const {
  auto it = landmarks_.find(std::string(name));
  if (it == landmarks_.end()) return std::nullopt;
  return it->second;
}

VertexId Graph::require_landmark(std::string_view name) const {
  if (auto v = landmark(name)) return *v;
  throw InvalidParameter("graph has no landmark '" + std::string(name) + "'");
}

bool Graph::is_tile() const noexcept {
  const auto origins = std::count(roles_.begin(), roles_.end(), Role::origin);
  const auto tails = std::count(roles_.begin(), roles_.end(), Role::tail);
  if (origins != 1 || tails != 1) return false;
  auto o = landmark("O");
  auto b = landmark("B");
  return o && b && roles_[*o] == Role::origin && roles_[*b] == Role::tail;
}

bool operator==(const Graph& x, const Graph& y) {
  if (x.vertex_count() != y.vertex_count() || x.edge_count() != y.edge_count()) return false;
  for (std::size_t i = 0; i < x.edges_.size(); ++i) {
    if (x.edges_[i].a != y.edges_[i].a || x.edges_[i].b != y.edges_[i].b) return false;
  }
  return x.landmarks_ == y.landmarks_ && x.roles_ == y.roles_ && x.generation_ == y.generation_;
}

void TileParams::validate() const {
  if (D < 2) throw InvalidParameter("tile parameter D must be >= 2");
  if (L < 1 || H < 1 || R < 1) throw InvalidParameter("tile parameters L, H, R must be >= 1");
}

std::size_t BuildOptions::default_vertex_cap() {
  constexpr std::size_t kDefault = 50'000'000;
  const char* env = std::getenv("FPPHE_VERTEX_CAP");
  if (env == nullptr || *env == '\0') return kDefault;
  std::size_t value = 0;
  const char* end = env + std::char_traits<char>::length(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end || value == 0) {
    throw InvalidParameter("FPPHE_VERTEX_CAP must be a positive integer");
  }
  return value;
}

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t sat_add(std::size_t a, std::size_t b) {
  return a > kSaturated - b ? kSaturated : a + b;
}

std::size_t sat_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::size_t sat_pow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r = sat_mul(r, base);
  return r;
}

// |T_d^h|
std::size_t complete_tree_size(int d, int h) {
  std::size_t total = 0;
  std::size_t level = 1;
  for (int k = 0; k <= h; ++k) {
    total = sat_add(total, level);
    level = sat_mul(level, static_cast<std::size_t>(d));
  }
  return total;
}

void check_cap(std::size_t count, const BuildOptions& options) {
  if (count > options.vertex_cap) {
    throw ResourceLimit("graph would have " +
                        (count == kSaturated ? std::string("more than 2^64")
                                             : std::to_string(count)) +
                        " vertices, above the cap of " + std::to_string(options.vertex_cap));
  }
}

struct Builder {
  std::vector<Edge> edges;
  std::map<std::string, VertexId> landmarks;
  std::vector<Role> roles;

  VertexId add_vertex(Role role) {
    roles.push_back(role);
    return static_cast<VertexId>(roles.size() - 1);
  }
  void add_edge(VertexId a, VertexId b) { edges.push_back(Edge{a, b}); }

  Graph finish(VertexId root) && {
    const std::size_t n = roles.size();
    Graph provisional(n, edges, {}, roles, {});
    auto levels = bfs_levels(provisional, root);
    return Graph(n, std::move(edges), std::move(landmarks), std::move(roles), std::move(levels));
  }
};

// Grows T_d^h below an existing root, breadth-first. Returns the ids of the
// generation-h vertices.
std::vector<VertexId> append_tree(Builder& b, VertexId root, int d, int h, Role role) {
  std::vector<VertexId> level{root};
  for (int k = 0; k < h; ++k) {
    std::vector<VertexId> next;
    next.reserve(level.size() * static_cast<std::size_t>(d));
    for (VertexId parent : level) {
      for (int j = 0; j < d; ++j) {
        const VertexId child = b.add_vertex(role);
        b.add_edge(parent, child);
        next.push_back(child);
      }
    }
    level = std::move(next);
  }
  return level;
}

// Grows the capped tree below `root` and returns the merged vertex W.
VertexId append_capped_tree(Builder& b, VertexId root, int d, int h, Role role, Role cap_role,
                            bool merge_parallel) {
  const auto last = append_tree(b, root, d, h, role);
  const VertexId w = b.add_vertex(cap_role);
  const int multiplicity = merge_parallel ? 1 : d;
  for (VertexId v : last) {
    for (int j = 0; j < multiplicity; ++j) b.add_edge(v, w);
  }
  return w;
}

void check_tree_args(int d, int h) {
  if (d < 1) throw InvalidParameter("tree arity d must be >= 1");
  if (h < 0) throw InvalidParameter("tree height h must be >= 0");
}

}  // namespace

Graph build_complete_tree(int d, int h, const BuildOptions& options) {
  check_tree_args(d, h);
  check_cap(complete_tree_size(d, h), options);
  Builder b;
  const VertexId root = b.add_vertex(Role::origin);
  b.landmarks["root"] = root;
  append_tree(b, root, d, h, Role::generic);
  return std::move(b).finish(root);
}

Graph build_capped_tree(int d, int h, const BuildOptions& options) {
  check_tree_args(d, h);
  check_cap(sat_add(complete_tree_size(d, h), 1), options);
  Builder b;
  const VertexId root = b.add_vertex(Role::origin);
  b.landmarks["root"] = root;
  b.landmarks["W"] =
      append_capped_tree(b, root, d, h, Role::generic, Role::cap, options.merge_parallel_edges);
  return std::move(b).finish(root);
}

Graph build_path(int k, const BuildOptions& options) {
  if (k < 1) throw InvalidParameter("path length must be >= 1");
  Graph tree = build_complete_tree(1, k, options);
  auto landmarks = tree.landmarks();
  landmarks["end"] = static_cast<VertexId>(k);
  std::vector<Edge> edges(tree.edges().begin(), tree.edges().end());
  std::vector<Role> roles(tree.roles().begin(), tree.roles().end());
  std::vector<std::uint32_t> gens(tree.generations().begin(), tree.generations().end());
  return Graph(tree.vertex_count(), std::move(edges), std::move(landmarks), std::move(roles),
               std::move(gens));
}

std::size_t tile_vertex_count(const TileParams& params, bool /*merge_parallel_edges*/) {
  // O + capped D-ary tree + capped binary tree + path interior + B.
  std::size_t n = 1;
  n = sat_add(n, sat_add(complete_tree_size(params.D, params.L), 1));
  n = sat_add(n, sat_add(complete_tree_size(2, params.H), 1));
  n = sat_add(n, static_cast<std::size_t>(params.R - 1));
  return sat_add(n, 1);
}

Graph build_tile(const TileParams& params, const BuildOptions& options) {
  params.validate();
  check_cap(tile_vertex_count(params), options);
  Builder b;
  const VertexId o = b.add_vertex(Role::origin);
  const VertexId o_up = b.add_vertex(Role::upper);
  const VertexId o_low = b.add_vertex(Role::lower);
  b.add_edge(o, o_up);
  b.add_edge(o, o_low);
  const VertexId w_up = append_capped_tree(b, o_up, params.D, params.L, Role::upper, Role::upper,
                                           options.merge_parallel_edges);
  const VertexId w_low = append_capped_tree(b, o_low, 2, params.H, Role::lower, Role::lower,
                                            options.merge_parallel_edges);
  std::vector<VertexId> path{w_low};
  for (int i = 1; i < params.R; ++i) path.push_back(b.add_vertex(Role::lower));
  const VertexId tail = b.add_vertex(Role::tail);
  path.push_back(tail);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) b.add_edge(path[i], path[i + 1]);
  b.add_edge(w_up, tail);

  b.landmarks["O"] = o;
  b.landmarks["O_up"] = o_up;
  b.landmarks["O_low"] = o_low;
  b.landmarks["W_up"] = w_up;
  b.landmarks["W_low"] = w_low;
  b.landmarks["B"] = tail;
  return std::move(b).finish(o);
}

TileTree build_tile_tree(int phi, int depth, const TileParams& params,
                         const BuildOptions& options) {
  if (phi < 1) throw InvalidParameter("tile-tree branching phi must be >= 1");
  if (depth < 1) throw InvalidParameter("tile-tree depth must be >= 1");
  params.validate();

  std::size_t tiles = 0;
  for (int k = 1; k <= depth; ++k) tiles = sat_add(tiles, sat_pow(static_cast<std::size_t>(phi), k));
  const std::size_t per_tile = tile_vertex_count(params);
  check_cap(sat_add(1, sat_mul(tiles, per_tile - 1)), options);

  const Graph tile = build_tile(params, options);
  const VertexId tile_o = tile.require_landmark("O");
  const VertexId tile_b = tile.require_landmark("B");

  Builder b;
  const VertexId root = b.add_vertex(Role::origin);
  b.landmarks["root"] = root;
  b.landmarks["o"] = root;

  TileTree out;
  out.phi = phi;
  out.depth = depth;
  out.tile_count = tiles;
  out.junctions.push_back({root});

  std::vector<VertexId> map(tile.vertex_count(), kNoVertex);
  for (int k = 1; k <= depth; ++k) {
    std::vector<VertexId> next;
    for (VertexId junction : out.junctions.back()) {
      for (int i = 0; i < phi; ++i) {
        const VertexId child = b.add_vertex(Role::tail);
        next.push_back(child);
        for (VertexId v = 0; v < tile.vertex_count(); ++v) {
          if (v == tile_o) {
            map[v] = junction;
          } else if (v == tile_b) {
            map[v] = child;
          } else {
            map[v] = b.add_vertex(tile.role(v));
          }
        }
        for (const Edge& e : tile.edges()) b.add_edge(map[e.a], map[e.b]);
      }
    }
    out.junctions.push_back(std::move(next));
  }
  out.graph = std::move(b).finish(root);
  return out;
}

Graph induced_subgraph(const Graph& g, const std::vector<bool>& keep) {
  if (keep.size() != g.vertex_count()) {
    throw InvalidParameter("keep mask must match the vertex count");
  }
  std::vector<VertexId> remap(g.vertex_count(), kNoVertex);
  std::vector<Role> roles;
  std::vector<std::uint32_t> gens;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!keep[v]) continue;
    remap[v] = static_cast<VertexId>(roles.size());
    roles.push_back(g.role(v));
    gens.push_back(g.generation(v));
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (keep[e.a] && keep[e.b]) edges.push_back(Edge{remap[e.a], remap[e.b]});
  }
  std::map<std::string, VertexId> landmarks;
  for (const auto& [name, v] : g.landmarks()) {
    if (keep[v]) landmarks[name] = remap[v];
  }
  const std::size_t n = roles.size();
  return Graph(n, std::move(edges), std::move(landmarks), std::move(roles), std::move(gens));
}

Graph restrict_to_side(const Graph& tile, Side side) {
  if (!tile.is_tile()) throw InvalidParameter("restrict_to_side needs a tile with role tags");
  const Role wanted = side == Side::upper ? Role::upper : Role::lower;
  std::vector<bool> keep(tile.vertex_count());
  for (VertexId v = 0; v < tile.vertex_count(); ++v) {
    const Role r = tile.role(v);
    keep[v] = r == Role::origin || r == Role::tail || r == wanted;
  }
  return induced_subgraph(tile, keep);
}

std::vector<std::uint32_t> bfs_levels(const Graph& g, VertexId source) {
  constexpr auto kUnreached = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> level(g.vertex_count(), kUnreached);
  if (!g.contains(source)) return level;
  std::deque<VertexId> queue{source};
  level[source] = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (const Incidence& inc : g.incident(v)) {
      if (level[inc.neighbor] == kUnreached) {
        level[inc.neighbor] = level[v] + 1;
        queue.push_back(inc.neighbor);
      }
    }
  }
  return level;
}

VertexId default_origin(const Graph& g) {
  if (auto o = g.landmark("O")) return *o;
  if (auto r = g.landmark("root")) return *r;
  throw InvalidParameter("graph has neither an 'O' nor a 'root' landmark");
}

std::string export_dot(const Graph& g) {
  std::map<VertexId, std::string> labels;
  for (const auto& [name, v] : g.landmarks()) {
    auto& label = labels[v];
    if (!label.empty()) label += ",";
    label += name;
  }
  std::ostringstream out;
  out << "graph G {\n";
  // Every vertex is declared so isolated ones survive the export.
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    out << "  " << v;
    if (const auto it = labels.find(v); it != labels.end()) out << " [label=\"" << it->second << "\"]";
    out << ";\n";
  }
  for (const Edge& e : g.edges()) out << "  " << e.a << " -- " << e.b << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace fpphe
