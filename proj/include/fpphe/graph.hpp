#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fpphe {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

enum class Role : std::uint8_t { generic, origin, upper, lower, tail, cap };

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view name);

struct Edge {
  VertexId a;
  VertexId b;
};

struct Incidence {
  VertexId neighbor;
  EdgeId edge;
};

/// Immutable finite multigraph with named landmark vertices.
///
/// Edge ids are positions in the edge list. Parallel edges are distinct
/// records; self-loops are rejected. Adjacency is stored in CSR form with
/// incidences of each vertex in increasing edge-id order.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t vertex_count, std::vector<Edge> edges,
        std::map<std::string, VertexId> landmarks, std::vector<Role> roles,
        std::vector<std::uint32_t> generation);

  std::size_t vertex_count() const noexcept { return roles_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  std::span<const Incidence> incident(VertexId v) const noexcept {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  const std::map<std::string, VertexId>& landmarks() const noexcept { return landmarks_; }
  std::optional<VertexId> landmark(std::string_view name) const;
  /// Throws InvalidParameter when absent.
  VertexId require_landmark(std::string_view name) const;

  Role role(VertexId v) const { return roles_.at(v); }
  std::span<const Role> roles() const noexcept { return roles_; }
  std::uint32_t generation(VertexId v) const { return generation_.at(v); }
  std::span<const std::uint32_t> generations() const noexcept { return generation_; }

  /// Exactly one origin-tagged and one tail-tagged vertex, carried by the
  /// landmarks O and B.
  bool is_tile() const noexcept;

  bool contains(VertexId v) const noexcept { return v < vertex_count(); }

  friend bool operator==(const Graph& x, const Graph& y);

 private:
  std::vector<Edge> edges_;
  std::map<std::string, VertexId> landmarks_;
  std::vector<Role> roles_;
  std::vector<std::uint32_t> generation_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> adjacency_;
};

struct TileParams {
  int D = 2;
  int L = 1;
  int H = 1;
  int R = 1;

  void validate() const;
};

struct BuildOptions {
  /// Collapse the parallel edges into a capped vertex to a single edge.
  bool merge_parallel_edges = false;
  /// Hard limit on the number of vertices a builder may create.
  std::size_t vertex_cap = default_vertex_cap();

  /// 50 million unless FPPHE_VERTEX_CAP is set.
  static std::size_t default_vertex_cap();
};

/// T_d^h: every vertex above generation h has d children.
Graph build_complete_tree(int d, int h, const BuildOptions& options = {});

/// T_d^{h+1} with generation h+1 merged into the landmark W.
Graph build_capped_tree(int d, int h, const BuildOptions& options = {});

/// Path with k edges from landmark "root" to landmark "end".
Graph build_path(int k, const BuildOptions& options = {});

/// The tile: O joined to the capped D-ary tree of height L (upper part, ending
/// in W_up and one edge to B) and to the capped binary tree of height H (lower
/// part, ending in W_low and a path of R edges to B).
Graph build_tile(const TileParams& params, const BuildOptions& options = {});

/// Depth-truncated forward tile tree. Junction vertices are shared between a
/// tile's tail and the origins of its phi children.
struct TileTree {
  Graph graph;
  int phi = 0;
  int depth = 0;
  std::size_t tile_count = 0;
  /// junctions[k] lists the junction vertices at tile depth k; junctions[0]
  /// holds only the global origin.
  std::vector<std::vector<VertexId>> junctions;
};

TileTree build_tile_tree(int phi, int depth, const TileParams& params,
                         const BuildOptions& options = {});

/// Vertex count of build_tile without building it.
std::size_t tile_vertex_count(const TileParams& params, bool merge_parallel_edges = false);

enum class Side { upper, lower };

std::string_view to_string(Side side) noexcept;
Side parse_side(std::string_view name);

/// Induced subgraph on O, B and the vertices tagged with `side`.
Graph restrict_to_side(const Graph& tile, Side side);

/// Induced subgraph on the kept vertices; ids are compacted preserving order
/// and landmarks on dropped vertices are removed.
Graph induced_subgraph(const Graph& g, const std::vector<bool>& keep);

/// Breadth-first distances from `source`; unreachable vertices get UINT32_MAX.
std::vector<std::uint32_t> bfs_levels(const Graph& g, VertexId source);

/// The conventional start vertex: landmark O when present, else root.
VertexId default_origin(const Graph& g);

/// Graphviz text; landmark vertices carry a label attribute.
std::string export_dot(const Graph& g);

}  // namespace fpphe
