#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

#include "discovery/error.hpp"

namespace discovery {

// All stochastic code takes an explicit stream. mt19937_64 output is fully
// specified by the standard, so seeded runs are reproducible everywhere; the
// helpers below avoid std:: distributions, whose outputs are not.
using RandomStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent sub-stream identified by a path of indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline RandomStream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return RandomStream(derive_seed(seed, path));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(RandomStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection, n >= 1.
inline std::size_t uniform_index(RandomStream& rng, std::size_t n) {
  if (n == 0) throw invalid_input("uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

// Draw an index from nonnegative weights (need not be normalized).
inline std::size_t sample_categorical(RandomStream& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw invalid_input("sample_categorical: weights sum to zero");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace discovery
