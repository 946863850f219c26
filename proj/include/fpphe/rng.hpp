#pragma once

// Counter-based random streams for reproducible Monte Carlo.
//
// Every trial owns a private Philox4x32-10 stream keyed by a 64-bit trial key,
// which is derived from (master_seed, trial_index) only. Outcomes therefore do
// not depend on how trials are scheduled across workers.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace fpphe {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Key of the private stream of trial `trial_index` under `master_seed`.
constexpr std::uint64_t trial_key(std::uint64_t master_seed,
                                  std::uint64_t trial_index) noexcept {
  return mix64(master_seed + (trial_index + 1) * kGoldenGamma);
}

/// Philox4x32 with 10 rounds (Salmon et al. 2011). The 128-bit counter is
/// split into a 64-bit block index (low half) and a 64-bit stream id (high
/// half), so one key carries independent sub-streams.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (next_ == out_.size()) refill();
    return out_[next_++];
  }

  /// The raw keyed bijection on one 128-bit counter block.
  static constexpr Block bijection(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9U;
        key[1] += 0xBB67AE85U;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53U} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57U} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = Block{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  // Blocks are generated kBatch at a time, four per SIMD lane group where
  // available. The output sequence is the same as one block at a time.
  static constexpr std::size_t kBatch = 8;

  void refill() noexcept {
    alignas(16) std::array<std::uint32_t, kBatch> c0, c1, c2, c3;
    for (std::size_t j = 0; j < kBatch; ++j) {
      c0[j] = static_cast<std::uint32_t>(block_ + j);
      c1[j] = static_cast<std::uint32_t>((block_ + j) >> 32);
      c2[j] = static_cast<std::uint32_t>(stream_);
      c3[j] = static_cast<std::uint32_t>(stream_ >> 32);
    }
#if defined(__SSE2__)
    for (std::size_t j = 0; j < kBatch; j += 4) {
      __m128i x0 = _mm_load_si128(reinterpret_cast<const __m128i*>(&c0[j]));
      __m128i x1 = _mm_load_si128(reinterpret_cast<const __m128i*>(&c1[j]));
      __m128i x2 = _mm_load_si128(reinterpret_cast<const __m128i*>(&c2[j]));
      __m128i x3 = _mm_load_si128(reinterpret_cast<const __m128i*>(&c3[j]));
      __m128i k0 = _mm_set1_epi32(static_cast<int>(key_[0]));
      __m128i k1 = _mm_set1_epi32(static_cast<int>(key_[1]));
      const __m128i m0 = _mm_set1_epi32(static_cast<int>(0xD2511F53U));
      const __m128i m1 = _mm_set1_epi32(static_cast<int>(0xCD9E8D57U));
      const __m128i w0 = _mm_set1_epi32(static_cast<int>(0x9E3779B9U));
      const __m128i w1 = _mm_set1_epi32(static_cast<int>(0xBB67AE85U));
      for (int round = 0; round < 10; ++round) {
        __m128i hi0, lo0, hi1, lo1;
        mul_hi_lo(x0, m0, hi0, lo0);
        mul_hi_lo(x2, m1, hi1, lo1);
        x0 = _mm_xor_si128(_mm_xor_si128(hi1, x1), k0);
        x1 = lo1;
        x2 = _mm_xor_si128(_mm_xor_si128(hi0, x3), k1);
        x3 = lo0;
        k0 = _mm_add_epi32(k0, w0);
        k1 = _mm_add_epi32(k1, w1);
      }
      _mm_store_si128(reinterpret_cast<__m128i*>(&c0[j]), x0);
      _mm_store_si128(reinterpret_cast<__m128i*>(&c1[j]), x1);
      _mm_store_si128(reinterpret_cast<__m128i*>(&c2[j]), x2);
      _mm_store_si128(reinterpret_cast<__m128i*>(&c3[j]), x3);
    }
#else
    for (std::size_t j = 0; j < kBatch; ++j) {
      const Block b = bijection(Block{c0[j], c1[j], c2[j], c3[j]}, key_);
      c0[j] = b[0];
      c1[j] = b[1];
      c2[j] = b[2];
      c3[j] = b[3];
    }
#endif
    for (std::size_t j = 0; j < kBatch; ++j) {
      out_[2 * j] = (std::uint64_t{c1[j]} << 32) | c0[j];
      out_[2 * j + 1] = (std::uint64_t{c3[j]} << 32) | c2[j];
    }
    block_ += kBatch;
    next_ = 0;
  }

#if defined(__SSE2__)
  // Full 32x32->64 products of four lanes, split into high and low words.
  static void mul_hi_lo(__m128i a, __m128i m, __m128i& hi, __m128i& lo) noexcept {
    const __m128i even = _mm_mul_epu32(a, m);
    const __m128i odd = _mm_mul_epu32(_mm_srli_epi64(a, 32), _mm_srli_epi64(m, 32));
    const __m128i low_mask = _mm_set_epi32(0, -1, 0, -1);
    lo = _mm_or_si128(_mm_and_si128(even, low_mask), _mm_slli_epi64(odd, 32));
    hi = _mm_or_si128(_mm_srli_epi64(even, 32), _mm_andnot_si128(low_mask, odd));
  }
#endif

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<result_type, 2 * kBatch> out_{};
  std::size_t next_ = 2 * kBatch;
};

using Engine = Philox4x32;

/// Sub-stream ids used inside one trial.
enum class Stream : std::uint64_t { seeds = 0, dynamics = 1, auxiliary = 2 };

inline Engine trial_engine(std::uint64_t master_seed, std::uint64_t trial_index,
                           Stream stream) noexcept {
  return Engine(trial_key(master_seed, trial_index), static_cast<std::uint64_t>(stream));
}

/// Uniform on [0, 1) with 53 random bits.
template <class Gen>
double uniform01(Gen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Exp(rate) by inversion. u has 53 bits, so 1 - u is exact and lies in
/// (0, 1]; the result is finite.
template <class Gen>
double exponential(Gen& gen, double rate) {
  return -std::log(1.0 - uniform01(gen)) / rate;
}

template <class Gen>
bool bernoulli(Gen& gen, double p) {
  return uniform01(gen) < p;
}

}  // namespace fpphe
