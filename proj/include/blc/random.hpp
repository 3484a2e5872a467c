#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace blc {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a counter-addressed stream, e.g. (base seed, record index, attempt).
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t s = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) s = mix_seed(s ^ mix_seed(p));
  return s;
}

/// Uniform in [0, 1); 53 random mantissa bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) { return lo + (hi - lo) * uniform01(eng); }

}  // namespace blc
