#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpphe/graph.hpp"
#include "fpphe/rng.hpp"

namespace fpphe {

/// Which vertices host a dormant seed.
struct SeedConfig {
  std::vector<std::uint8_t> is_seed;
  double mu = 0.0;
  std::vector<VertexId> excluded;
  /// Provenance recorded in the serialized blob, when known.
  std::optional<std::uint64_t> master_seed;

  std::size_t size() const noexcept { return is_seed.size(); }
  bool seed(VertexId v) const { return is_seed.at(v) != 0; }
  std::size_t count() const noexcept;
};

/// Each non-excluded vertex independently hosts a seed with probability mu.
/// Vertex v uses 32-bit word v of the stream (two words per draw), whether or
/// not it is excluded, so seed sets are nested in mu under a fixed stream.
SeedConfig place_seeds(const Graph& g, double mu, std::span<const VertexId> excluded,
                       Engine& rng);

/// The per-vertex words place_seeds draws from a fresh stream, for evaluating
/// several densities against one draw.
std::vector<std::uint32_t> seed_words(std::size_t n, Engine& rng);

/// Whether a vertex whose word is u hosts a seed at density mu.
inline bool seeded(std::uint32_t u, double mu) noexcept {
  return static_cast<double>(u) < mu * 0x1.0p32;
}

/// Exactly the listed vertices are seeds.
SeedConfig fixed_seeds(const Graph& g, std::span<const VertexId> seeds);

/// Blob layout (little-endian): "FPPHE-SEEDS-v1", u64 vertex count, f64 mu,
/// u8 has-master-seed, u64 master seed, u64 excluded count, u32 excluded ids,
/// then the seed bits packed LSB-first.
std::string serialize_seeds(const SeedConfig& seeds);
SeedConfig deserialize_seeds(std::string_view blob);

inline constexpr std::string_view kSeedsMagic = "FPPHE-SEEDS-v1";

}  // namespace fpphe
