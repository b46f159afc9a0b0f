#pragma once

// Test-only helpers: random worlds and brute-force oracles that do not share
// code paths with the library's log-space implementation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "discovery/belief.hpp"
#include "discovery/random.hpp"
#include "discovery/tabular_world.hpp"

namespace discovery::testing {

// Random normalized vector with strictly positive entries.
inline std::vector<double> random_simplex(RandomStream& rng, std::size_t n) {
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) total += x = 0.01 + uniform01(rng);
  for (double& x : v) x /= total;
  return v;
}

// Random tabular world; with `sparse`, some table entries are exactly zero.
inline TabularWorld random_tabular_world(RandomStream& rng, std::size_t n, std::size_t n_probes,
                                         std::size_t n_responses, bool sparse = false) {
  std::vector<std::string> probes, responses;
  for (std::size_t s = 0; s < n_probes; ++s) probes.push_back("probe " + std::to_string(s) + "?");
  for (std::size_t t = 0; t < n_responses; ++t) responses.push_back("reply " + std::to_string(t));
  std::vector<std::vector<std::vector<double>>> table(
      n_probes, std::vector<std::vector<double>>(n_responses, std::vector<double>(n)));
  for (std::size_t s = 0; s < n_probes; ++s)
    for (std::size_t f = 0; f < n; ++f) {
      std::vector<double> col(n_responses);
      double total = 0.0;
      for (double& x : col) {
        x = uniform01(rng);
        if (sparse && uniform01(rng) < 0.3) x = 0.0;
        total += x;
      }
      if (total == 0.0) {
        col[0] = 1.0;
        total = 1.0;
      }
      for (std::size_t t = 0; t < n_responses; ++t) table[s][t][f] = col[t] / total;
    }
  return TabularWorld(probes, responses, table);
}

struct OracleSubset {
  std::vector<FactId> ids;
  double probability;
};

// Posterior over k-subsets by bitmask enumeration and linear-space products,
// returned in lexicographic order of sorted ids. n must be small.
inline std::vector<OracleSubset> brute_force_posterior(std::size_t n, std::size_t k,
                                                       const std::vector<std::vector<double>>& turns) {
  std::vector<OracleSubset> out;
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    OracleSubset s{{}, 1.0};
    for (std::size_t f = 0; f < n; ++f)
      if (mask & (1u << f)) s.ids.push_back(static_cast<FactId>(f));
    for (const auto& w : turns) {
      double sum = 0.0;
      for (FactId f : s.ids) sum += w[f];
      s.probability *= sum;
    }
    total += s.probability;
    out.push_back(std::move(s));
  }
  for (auto& s : out) s.probability /= total;
  std::ranges::sort(out, [](const auto& a, const auto& b) { return a.ids < b.ids; });
  return out;
}

inline double brute_force_entropy(const std::vector<OracleSubset>& dist) {
  double h = 0.0;
  for (const auto& s : dist)
    if (s.probability > 0) h -= s.probability * std::log(s.probability);
  return h;
}

}  // namespace discovery::testing
