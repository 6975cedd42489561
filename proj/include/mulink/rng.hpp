// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mulink/types.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mulink {

using Rng = std::mt19937_64;

// Named sub-streams. Every random draw in the project is keyed by the
// master seed plus a path of these tags and integer indices.
enum class Stream : std::uint64_t {
  Channel = 0x43,
  Frame = 0x46,
  Fer = 0x45,
  Training = 0x54,
  Folds = 0x4b,
  Leakage = 0x4c,
  Sampling = 0x53,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t path_hash(std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = 0x6d756c696e6bULL;
  for (std::uint64_t p : path) h = splitmix64(h ^ p);
  return h;
}

// master XOR hash(path): the result does not depend on the order in which
// sub-streams are consumed, so parallel execution cannot change results.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return master ^ path_hash(path);
}

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cplx complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace mulink
