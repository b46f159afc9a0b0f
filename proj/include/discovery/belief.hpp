#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discovery/combinatorics.hpp"
#include "discovery/error.hpp"

namespace discovery {

inline constexpr double kLikelihoodFloor = 1e-12;
inline constexpr std::size_t kEnumerationCap = 1'000'000;

// Normalized single-exchange fact posterior P(z = f | s, t).
class TurnWeights {
 public:
  TurnWeights() = default;

  // Takes an already-normalized vector; rejects anything else.
  explicit TurnWeights(std::vector<double> w) : w_(std::move(w)) {
    double total = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0) || x > 1.0) throw invalid_input("turn weights must lie in [0, 1]");
      total += x;
    }
    if (w_.empty() || std::abs(total - 1.0) > 1e-9)
      throw invalid_input("turn weights must sum to 1 (got " + std::to_string(total) + ")");
    uniform_ = std::ranges::all_of(w_, [&](double x) { return x == w_.front(); });
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& values() const { return w_; }
  // Exactly equal entries: appending such a turn carries no information.
  bool uniform() const { return uniform_; }

 private:
  std::vector<double> w_;
  bool uniform_ = false;
};

// Normalizes floored likelihoods times an optional per-fact prior.
inline TurnWeights single_turn_weights(std::span<const double> likelihoods,
                                       std::optional<std::span<const double>> prior = std::nullopt) {
  if (likelihoods.empty()) throw invalid_input("likelihood vector is empty");
  if (prior && prior->size() != likelihoods.size())
    throw invalid_input("prior length " + std::to_string(prior->size()) + " != likelihood length " +
                        std::to_string(likelihoods.size()));
  std::vector<double> w(likelihoods.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double l = likelihoods[i];
    const double p = prior ? (*prior)[i] : 1.0;
    if (!(l >= 0.0) || !(p >= 0.0) || std::isinf(l) || std::isinf(p))
      throw invalid_input("likelihoods and prior must be finite and nonnegative");
    w[i] = std::max(l * p, kLikelihoodFloor);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return TurnWeights(std::move(w));
}

namespace detail {

struct LogScoreSummary {
  double entropy = 0.0;
  double log_normalizer = 0.0;  // ln sum exp(ls)
};

// Entropy of p_i = exp(ls_i) / Z, computed as ln Z - sum p_i ln(exp(ls_i)).
inline LogScoreSummary summarize_log_scores(std::span<const double> ls) {
  const double m = *std::ranges::max_element(ls);
  double z = 0.0, weighted = 0.0;
  for (double x : ls) {
    const double e = std::exp(x - m);
    z += e;
    weighted += e * (x - m);
  }
  const double log_z = std::log(z);
  return {log_z - weighted / z, log_z + m};
}

}  // namespace detail

// Posterior over K-subsets of an n-fact universe, accumulated turn by turn.
// Values are immutable; update() returns a new state. When C(n,k) exceeds the
// enumeration cap the state still records turn weights but every
// subset-level query throws a capacity error.
class BeliefState {
 public:
  BeliefState(std::size_t n, std::size_t k, std::size_t cap = kEnumerationCap) : n_(n), k_(k) {
    if (n < 2) throw invalid_input("universe size must be >= 2");
    if (k < 1 || k >= n) throw invalid_input("k must satisfy 1 <= k < universe size");
    const auto count = binomial(n, k);
    if (count && *count <= cap) {
      subsets_ = std::make_shared<const SubsetIndex>(n, k);
      log_scores_.assign(subsets_->size(), 0.0);
      refresh();
    } else {
      capacity_message_ = "C(" + std::to_string(n) + "," + std::to_string(k) + ")=" +
                          (count ? std::to_string(*count) : std::string("overflow")) +
                          " exceeds enumeration cap " + std::to_string(cap);
    }
  }

  static BeliefState from_weights(std::size_t n, std::size_t k, const std::vector<TurnWeights>& turns,
                                  std::size_t cap = kEnumerationCap) {
    BeliefState b(n, k, cap);
    for (const auto& w : turns) b = b.update(w);
    return b;
  }

  BeliefState update(const TurnWeights& w) const {
    check_size(w);
    BeliefState next = *this;
    next.turns_.push_back(w);
    if (subsets_ && !w.uniform()) {
      next.accumulate(w, next.log_scores_);
      next.refresh();
    }
    return next;
  }

  // Posterior entropy after a hypothetical update, without building the state.
  double entropy_after(const TurnWeights& w) const {
    check_size(w);
    require_enumerable();
    if (w.uniform()) return entropy_;
    thread_local std::vector<double> scratch;
    scratch = log_scores_;
    accumulate(w, scratch);
    return detail::summarize_log_scores(scratch).entropy;
  }

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t exchanges() const { return turns_.size(); }
  const std::vector<TurnWeights>& turn_weights() const { return turns_; }

  bool enumerable() const { return subsets_ != nullptr; }

  const SubsetIndex& subsets() const {
    require_enumerable();
    return *subsets_;
  }
  // Unnormalized ln score(F) = sum_n ln sum_{f in F} w_n(f), lexicographic order.
  std::span<const double> log_scores() const {
    require_enumerable();
    return log_scores_;
  }
  std::span<const double> posterior() const {
    require_enumerable();
    return posterior_;
  }
  double posterior_entropy() const {
    require_enumerable();
    return entropy_;
  }

 private:
  void check_size(const TurnWeights& w) const {
    if (w.size() != n_)
      throw invalid_input("turn weights length " + std::to_string(w.size()) + " does not match universe size " +
                          std::to_string(n_));
  }

  void require_enumerable() const {
    if (!subsets_) throw Error(ErrorCode::capacity, capacity_message_);
  }

  void accumulate(const TurnWeights& w, std::vector<double>& ls) const {
    const auto& sub = *subsets_;
    const std::size_t count = sub.size();
    if (k_ == 1) {
      for (std::size_t i = 0; i < count; ++i) ls[i] += std::log(w[sub[i][0]]);
      return;
    }
    for (std::size_t i = 0; i < count; ++i) {
      double s = 0.0;
      for (FactId f : sub[i]) s += w[f];
      ls[i] += std::log(s);
    }
  }

  void refresh() {
    const auto summary = detail::summarize_log_scores(log_scores_);
    entropy_ = summary.entropy;
    posterior_.resize(log_scores_.size());
    for (std::size_t i = 0; i < log_scores_.size(); ++i)
      posterior_[i] = std::exp(log_scores_[i] - summary.log_normalizer);
  }

  std::size_t n_;
  std::size_t k_;
  std::vector<TurnWeights> turns_;
  std::shared_ptr<const SubsetIndex> subsets_;
  std::vector<double> log_scores_;
  std::vector<double> posterior_;
  double entropy_ = 0.0;
  std::string capacity_message_;
};

struct SubsetProbability {
  std::vector<FactId> subset;
  double probability = 0.0;
};

// Full posterior over K-subsets in lexicographic order.
inline std::vector<SubsetProbability> subset_posterior(const BeliefState& belief) {
  const auto& sub = belief.subsets();
  const auto p = belief.posterior();
  std::vector<SubsetProbability> out;
  out.reserve(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) out.push_back({{sub[i].begin(), sub[i].end()}, p[i]});
  return out;
}

// m(f) = sum of P(F | h) over subsets containing f.
inline std::vector<double> fact_marginals(const BeliefState& belief) {
  const auto& sub = belief.subsets();
  const auto p = belief.posterior();
  std::vector<double> m(belief.n(), 0.0);
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (FactId f : sub[i]) m[f] += p[i];
  return m;
}

// The m most probable subsets, descending; equal probabilities keep
// lexicographic order.
inline std::vector<SubsetProbability> top_subsets(const BeliefState& belief, std::size_t m) {
  const auto& sub = belief.subsets();
  const auto p = belief.posterior();
  std::vector<std::size_t> order(sub.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  m = std::min(m, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    [&](std::size_t a, std::size_t b) { return p[a] > p[b] || (p[a] == p[b] && a < b); });
  std::vector<SubsetProbability> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back({{sub[order[i]].begin(), sub[order[i]].end()}, p[order[i]]});
  return out;
}

// Index of the strictly most probable subset; nullopt on a tie.
inline std::optional<std::size_t> unique_argmax_subset(const BeliefState& belief) {
  const auto p = belief.posterior();
  std::size_t best = 0;
  bool tie = false;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) {
      best = i;
      tie = false;
    } else if (p[i] == p[best]) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

// Shannon entropy in nats, 0 ln 0 = 0.
inline double entropy(std::span<const double> dist) {
  double total = 0.0, h = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0)) throw invalid_input("distribution has a negative or NaN entry");
    total += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw invalid_input("distribution is not normalized (sum " + std::to_string(total) + ")");
  return std::max(h, 0.0);
}

// Entropy of the uniform prior over K-subsets: ln C(n, k).
inline double prior_entropy(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1 || k >= n)
    throw invalid_input("prior_entropy needs 1 <= k < n (got n=" + std::to_string(n) + ", k=" +
                        std::to_string(k) + ")");
  return log_binomial(n, k);
}

// Mutual information I(F; h) = H[prior] - H[posterior], in nats.
inline double discovery_score_from_entropy(std::size_t n, std::size_t k, double posterior_entropy) {
  const double i = prior_entropy(n, k) - posterior_entropy;
  if (i < 0.0 && i >= -1e-9) return 0.0;
  return i;
}

inline double discovery_score(const BeliefState& belief) {
  return discovery_score_from_entropy(belief.n(), belief.k(), belief.posterior_entropy());
}

}  // namespace discovery
