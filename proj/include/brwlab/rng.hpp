// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace brw {

/// One-shot 64-bit finalizer (splitmix64 output function).
inline constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream-seeded generator for bulk sampling (xoshiro256++ core).
/// Every stream is derived from explicit integer keys, never from global
/// state, so results are independent of scheduling order.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    // Expand the seed through splitmix64, the recommended seeding chain.
    uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, n). n must be > 0.
  uint32_t uniform_below(uint32_t n) {
    // Lemire's multiply-shift with rejection.
    uint64_t x = next_u64() & 0xffffffffULL;
    uint64_t m = x * n;
    uint32_t l = static_cast<uint32_t>(m);
    if (l < n) {
      const uint32_t t = (0u - n) % n;
      while (l < t) {
        x = next_u64() & 0xffffffffULL;
        m = x * n;
        l = static_cast<uint32_t>(m);
      }
    }
    return static_cast<uint32_t>(m >> 32);
  }

 private:
  static constexpr uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t s_[4];
};

/// Counter-based draw stream addressed by a 64-bit key. A node of a random
/// tree gets its randomness from its own key, so two runs that visit the
/// same node (even inside differently shaped trees) read identical draws.
struct KeyStream {
  uint64_t state;
  uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

/// Purpose tags keeping the draw streams of one node disjoint.
namespace rng_tag {
inline constexpr uint64_t offspring = 0x6f66667370726e67ULL;
inline constexpr uint64_t step = 0x737465700a0a0a0aULL;
inline constexpr uint64_t thin = 0x7468696e0b0b0b0bULL;
inline constexpr uint64_t priority = 0x7072696f72697479ULL;
inline constexpr uint64_t mark = 0x6d61726b0c0c0c0cULL;
inline constexpr uint64_t invasive = 0x696e766173697665ULL;
inline constexpr uint64_t noninvasive = 0x6e6f6e696e766173ULL;
inline constexpr uint64_t seeded_copy = 0x7365656465646370ULL;
}  // namespace rng_tag

inline uint64_t derive_key(uint64_t key, uint64_t tag) { return mix64(key ^ mix64(tag)); }

/// Key of child number `slot` of the node with key `parent`.
inline uint64_t child_key(uint64_t parent, uint32_t slot) {
  return mix64(parent ^ (0xd1342543de82ef95ULL * (static_cast<uint64_t>(slot) + 1)));
}

inline KeyStream key_stream(uint64_t node_key, uint64_t tag) {
  return KeyStream{derive_key(node_key, tag)};
}

/// Root key for one replica of one experiment cell. The whole replica is a
/// pure function of this key, which makes sweeps schedule-independent.
inline uint64_t replica_key(uint64_t master_seed, uint64_t cell, uint64_t replica) {
  uint64_t h = mix64(master_seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ 0x13198a2e03707344ULL * (cell + 1));
  h = mix64(h ^ 0xa4093822299f31d0ULL * (replica + 1));
  return h;
}

}  // namespace brw
