#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lmf {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits. Used instead of
/// std::uniform_real_distribution so streams are identical across standard
/// library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform double in (0, 1].
inline double uniform01_open_low(Rng& rng) { return 1.0 - uniform01(rng); }

inline int random_sign(Rng& rng) { return (rng() >> 63) ? 1 : -1; }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-datapoint stream seed from a master seed and a label.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(master ^ splitmix64(fnv1a64(label)));
}

}  // namespace lmf
