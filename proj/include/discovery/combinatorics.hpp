#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discovery/error.hpp"

namespace discovery {

using FactId = std::uint32_t;

// Exact C(n, k), or nullopt on uint64 overflow.
inline std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    const std::uint64_t num = n - k + i;
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g;
    const std::uint64_t d = i / g;
    if (r > UINT64_MAX / num) return std::nullopt;
    result = r * num / d;
  }
  return result;
}

// ln C(n, k); exact count when it fits, lgamma otherwise.
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (auto c = binomial(n, k); c && *c < (1ULL << 53)) return std::log(static_cast<double>(*c));
  return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1);
}

// All k-subsets of {0..n-1}, sorted ids within a subset, subsets in
// lexicographic order. Stored flat: subset i occupies [i*k, i*k + k).
class SubsetIndex {
 public:
  SubsetIndex(std::size_t n, std::size_t k) : n_(n), k_(k) {
    if (k == 0 || k > n) throw invalid_input("SubsetIndex: need 1 <= k <= n");
    const auto count = binomial(n, k);
    if (!count) throw Error(ErrorCode::capacity, "SubsetIndex: C(n,k) overflows");
    count_ = static_cast<std::size_t>(*count);
    ids_.reserve(count_ * k_);
    std::vector<FactId> cur(k_);
    for (std::size_t i = 0; i < k_; ++i) cur[i] = static_cast<FactId>(i);
    while (true) {
      ids_.insert(ids_.end(), cur.begin(), cur.end());
      // Advance to the next combination in lexicographic order.
      std::size_t i = k_;
      while (i > 0 && cur[i - 1] == n_ - k_ + (i - 1)) --i;
      if (i == 0) break;
      ++cur[i - 1];
      for (std::size_t j = i; j < k_; ++j) cur[j] = cur[j - 1] + 1;
    }
  }

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t size() const { return count_; }

  std::span<const FactId> operator[](std::size_t i) const {
    return {ids_.data() + i * k_, k_};
  }

  // Position of a sorted subset, or nullopt if it is not a valid k-subset.
  std::optional<std::size_t> find(std::span<const FactId> subset) const {
    if (subset.size() != k_) return std::nullopt;
    std::size_t lo = 0, hi = count_;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      auto s = (*this)[mid];
      if (std::lexicographical_compare(s.begin(), s.end(), subset.begin(), subset.end()))
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo < count_ && std::ranges::equal((*this)[lo], subset)) return lo;
    return std::nullopt;
  }

 private:
  std::size_t n_;
  std::size_t k_;
  std::size_t count_ = 0;
  std::vector<FactId> ids_;
};

}  // namespace discovery
