#include "fpphe/seeding.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>

#include "fpphe/error.hpp"

namespace fpphe {

std::size_t SeedConfig::count() const noexcept {
  return static_cast<std::size_t>(std::count(is_seed.begin(), is_seed.end(), std::uint8_t{1}));
}

namespace {

std::vector<std::uint8_t> exclusion_mask(const Graph& g, std::span<const VertexId> excluded) {
  std::vector<std::uint8_t> mask(g.vertex_count(), 0);
  for (VertexId v : excluded) {
    if (!g.contains(v)) throw InvalidParameter("excluded vertex " + std::to_string(v) + " not in graph");
    mask[v] = 1;
  }
  return mask;
}

}  // namespace

SeedConfig place_seeds(const Graph& g, double mu, std::span<const VertexId> excluded,
                       Engine& rng) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidParameter("mu must lie in [0, 1]");
  const auto mask = exclusion_mask(g, excluded);
  SeedConfig out;
  out.mu = mu;
  out.excluded.assign(excluded.begin(), excluded.end());
  std::sort(out.excluded.begin(), out.excluded.end());
  out.excluded.erase(std::unique(out.excluded.begin(), out.excluded.end()), out.excluded.end());
  out.is_seed.assign(g.vertex_count(), 0);
  std::uint64_t word = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (v % 2 == 0) word = rng();
    const auto u = static_cast<std::uint32_t>(v % 2 == 0 ? word : word >> 32);
    if (!mask[v] && seeded(u, mu)) out.is_seed[v] = 1;
  }
  return out;
}

std::vector<std::uint32_t> seed_words(std::size_t n, Engine& rng) {
  std::vector<std::uint32_t> words(n);
  for (std::size_t v = 0; v < n; v += 2) {
    const std::uint64_t word = rng();
    words[v] = static_cast<std::uint32_t>(word);
    if (v + 1 < n) words[v + 1] = static_cast<std::uint32_t>(word >> 32);
  }
  return words;
}

SeedConfig fixed_seeds(const Graph& g, std::span<const VertexId> seeds) {
  SeedConfig out;
  out.is_seed.assign(g.vertex_count(), 0);
  for (VertexId v : seeds) {
    if (!g.contains(v)) throw InvalidParameter("seed vertex " + std::to_string(v) + " not in graph");
    out.is_seed[v] = 1;
  }
  out.mu = g.vertex_count() == 0 ? 0.0
                                 : static_cast<double>(out.count()) /
                                       static_cast<double>(g.vertex_count());
  return out;
}

namespace {

template <class T>
void put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;

  template <class T>
  T get() {
    if (pos + sizeof(T) > data.size()) throw InvalidParameter("truncated seed blob");
    T value;
    std::memcpy(&value, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
  }
};

}  // namespace

std::string serialize_seeds(const SeedConfig& seeds) {
  std::string out(kSeedsMagic);
  put<std::uint64_t>(out, seeds.size());
  put<double>(out, seeds.mu);
  put<std::uint8_t>(out, seeds.master_seed ? 1 : 0);
  put<std::uint64_t>(out, seeds.master_seed.value_or(0));
  put<std::uint64_t>(out, seeds.excluded.size());
  for (VertexId v : seeds.excluded) put<std::uint32_t>(out, v);
  std::string bits((seeds.size() + 7) / 8, '\0');
  for (std::size_t v = 0; v < seeds.size(); ++v) {
    if (seeds.is_seed[v]) bits[v / 8] = static_cast<char>(bits[v / 8] | (1 << (v % 8)));
  }
  return out + bits;
}

SeedConfig deserialize_seeds(std::string_view blob) {
  if (blob.substr(0, kSeedsMagic.size()) != kSeedsMagic) {
    throw InvalidParameter("seed blob lacks the FPPHE-SEEDS-v1 header");
  }
  Reader r{blob, kSeedsMagic.size()};
  SeedConfig out;
  const auto n = r.get<std::uint64_t>();
  out.mu = r.get<double>();
  const bool has_master = r.get<std::uint8_t>() != 0;
  const auto master = r.get<std::uint64_t>();
  if (has_master) out.master_seed = master;
  const auto n_excluded = r.get<std::uint64_t>();
  if (n_excluded > n) throw InvalidParameter("seed blob excluded count exceeds vertex count");
  for (std::uint64_t i = 0; i < n_excluded; ++i) out.excluded.push_back(r.get<std::uint32_t>());
  const std::size_t bytes = (n + 7) / 8;
  if (blob.size() - r.pos != bytes) throw InvalidParameter("seed blob has the wrong bitset length");
  out.is_seed.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    out.is_seed[v] = (static_cast<unsigned char>(blob[r.pos + v / 8]) >> (v % 8)) & 1U;
  }
  for (VertexId v : out.excluded) {
    if (v >= n) throw InvalidParameter("seed blob excluded id out of range");
    if (out.is_seed[v]) throw InvalidParameter("seed blob marks an excluded vertex as seed");
  }
  return out;
}

}  // namespace fpphe
