#pragma once

#include <cstdint>
#include <random>

namespace bpqm {

// splitmix64 step; used to derive independent, reproducible RNG streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic per-(seed, a, b) RNG stream. Density evolution derives one
/// stream per (seed, iteration, sample) so results do not depend on the
/// thread count.
inline std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  h ^= splitmix64(s);
  s ^= b * 0x9e3779b97f4a7c15ULL + 0x94d049bb133111ebULL;
  h ^= splitmix64(s);
  return std::mt19937_64(h);
}

/// Uniform double in [0,1) with exactly 53 random bits; avoids the
/// implementation-defined behaviour of std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n).
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
  // rejection sampling keeps the distribution exact
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t v;
  do {
    v = g();
  } while (v > limit);
  return v % n;
}

}  // namespace bpqm
