#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so any trial, block or grid node can be generated
// independently and in any order.

#include <array>
#include <cstdint>

namespace shearsep::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Counter philox4x32(Counter ctr, Key key);

/// Stream domains keep field, noise and seed-derivation draws disjoint.
enum class Domain : std::uint32_t {
  FieldParams = 0x46494544u,  // "FIED"
  Noise = 0x4e4f4953u,        // "NOIS"
  Fbm = 0x4642524du,          // "FBRM"
};

constexpr Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// SplitMix64 finalizer; used to derive per-trial seeds from a base seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Seed for trial `index` of a stream rooted at `base`. `salt` separates
/// families (field seeds vs noise seeds) rooted at the same base.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt, std::uint64_t index) {
  return mix64(mix64(base ^ mix64(salt)) + index);
}

inline constexpr std::uint64_t kFieldSalt = 0x6669656c64ull;  // "field"
inline constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ull;  // "noise"

/// Uniform double in [0,1) from two 32-bit words (53 significant bits).
constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Two uniforms in [0,1) for the 64-bit index `i` within a domain.
std::array<double, 2> uniform_pair(std::uint64_t seed, Domain domain, std::uint64_t i,
                                   std::uint32_t sub = 0);

/// Two independent standard normals (Box-Muller) for index `i`.
std::array<double, 2> normal_pair(std::uint64_t seed, Domain domain, std::uint64_t i,
                                  std::uint32_t sub = 0);

}  // namespace shearsep::rng
