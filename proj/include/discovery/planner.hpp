#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "discovery/belief.hpp"
#include "discovery/candidate_pool.hpp"
#include "discovery/parallel.hpp"
#include "discovery/random.hpp"
#include "discovery/response_model.hpp"

namespace discovery {

enum class PlannerMode { monte_carlo, exact };

struct PlannerParams {
  std::size_t n_candidates = 100;
  std::size_t n_rollouts = 10;
  std::size_t lookahead_depth = 1;
  PlannerMode mode = PlannerMode::monte_carlo;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct CandidateValue {
  std::string candidate;
  std::size_t pool_index = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

struct Selection {
  std::string chosen;
  std::size_t chosen_index = 0;
  std::vector<CandidateValue> values;  // sorted by mean, descending
};

inline TurnWeights turn_weights_for(const ResponseModel& model, std::string_view s, std::string_view t) {
  const auto lik = model.likelihood_vector(s, t);
  return single_turn_weights(lik);
}

namespace detail {

inline void check_model(const BeliefState& belief, const ResponseModel& model) {
  if (model.universe_size() != belief.n())
    throw invalid_input("response model universe size " + std::to_string(model.universe_size()) +
                        " does not match belief universe size " + std::to_string(belief.n()));
}

inline std::vector<double> cumulative(std::span<const double> p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = acc += p[i];
  return cdf;
}

inline std::size_t sample_from_cdf(RandomStream& rng, const std::vector<double>& cdf) {
  const double u = uniform01(rng) * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// Score deviations around `base` keep no-information candidates exact.
inline CandidateValue summarize(std::string_view s, double base, const std::vector<double>& samples) {
  CandidateValue v;
  v.candidate = std::string(s);
  v.n_samples = samples.size();
  double sum_dev = 0.0;
  for (double x : samples) sum_dev += x - base;
  v.mean = base + sum_dev / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - v.mean) * (x - v.mean);
    v.std_error = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
  }
  return v;
}

}  // namespace detail

// Expected discovery score after the bot says s and the human replies,
// estimated by sampling F from the posterior and t from the model.
//
// With lookahead_depth > 1 each rollout continues the dialogue: the bot picks
// its next utterance from `pool` greedily by (depth - 1)-step value, the human
// replies under the same sampled persona, and the score is taken at the end.
inline CandidateValue value_of_candidate_mc(const BeliefState& belief, const ResponseModel& model,
                                            std::string_view s, std::size_t n_rollouts, RandomStream& rng,
                                            std::size_t lookahead_depth = 1, const CandidatePool* pool = nullptr) {
  if (n_rollouts < 1) throw invalid_input("n_rollouts must be >= 1");
  if (lookahead_depth < 1) throw invalid_input("lookahead_depth must be >= 1");
  if (lookahead_depth > 1 && pool == nullptr) throw invalid_input("lookahead beyond one exchange needs a pool");
  detail::check_model(belief, model);
  const auto& subsets = belief.subsets();
  const auto cdf = detail::cumulative(belief.posterior());
  const double base = discovery_score(belief);

  std::unordered_map<std::string, double> memo;
  std::vector<double> samples;
  samples.reserve(n_rollouts);
  for (std::size_t r = 0; r < n_rollouts; ++r) {
    const auto persona = subsets[detail::sample_from_cdf(rng, cdf)];
    std::string t = model.respond(s, persona, rng);
    if (lookahead_depth == 1) {
      auto it = memo.find(t);
      if (it == memo.end()) {
        const double h = belief.entropy_after(turn_weights_for(model, s, t));
        it = memo.emplace(std::move(t), discovery_score_from_entropy(belief.n(), belief.k(), h)).first;
      }
      samples.push_back(it->second);
      continue;
    }
    BeliefState b = belief.update(turn_weights_for(model, s, t));
    for (std::size_t d = 1; d < lookahead_depth; ++d) {
      const std::size_t remaining = lookahead_depth - d;
      std::size_t best = 0;
      double best_value = -1.0;
      for (std::size_t c = 0; c < pool->size(); ++c) {
        const double v =
            value_of_candidate_mc(b, model, (*pool)[c], n_rollouts, rng, remaining, pool).mean;
        if (v > best_value) {
          best_value = v;
          best = c;
        }
      }
      const std::string next_t = model.respond((*pool)[best], persona, rng);
      b = b.update(turn_weights_for(model, (*pool)[best], next_t));
    }
    samples.push_back(discovery_score(b));
  }
  return detail::summarize(s, base, samples);
}

// V(s) = sum_t P(t | s, belief) * I(F; [h, s, t]) with the posterior
// predictive P(t | s, belief) = sum_F P(F | h) P(t | s, F).
inline CandidateValue value_of_candidate_exact(const BeliefState& belief, const ResponseModel& model,
                                               std::string_view s) {
  detail::check_model(belief, model);
  const auto support = model.response_support(s);
  if (!support) throw Error(ErrorCode::unsupported_mode, "exact mode needs a model with finite response support");
  const auto& subsets = belief.subsets();
  const auto posterior = belief.posterior();
  const double base = discovery_score(belief);

  double mass = 0.0, weighted_dev = 0.0;
  for (const auto& t : *support) {
    double predictive = 0.0;
    for (std::size_t i = 0; i < subsets.size(); ++i)
      if (posterior[i] > 0.0) predictive += posterior[i] * model.response_probability(s, subsets[i], t);
    if (predictive <= 0.0) continue;
    const double h = belief.entropy_after(turn_weights_for(model, s, t));
    mass += predictive;
    weighted_dev += predictive * (discovery_score_from_entropy(belief.n(), belief.k(), h) - base);
  }
  CandidateValue v;
  v.candidate = std::string(s);
  v.mean = mass > 0.0 ? base + weighted_dev / mass : base;
  v.n_samples = support->size();
  return v;
}

// Re-ranks the pool (or a seeded uniform subsample of n_candidates) by value
// and returns the argmax. Ties go to the lowest pool index. Each candidate gets
// its own stream derived from (seed, pool index), so results do not depend on
// evaluation order or thread count.
inline Selection select_response(const BeliefState& belief, const ResponseModel& model, const CandidatePool& pool,
                                 const PlannerParams& params) {
  if (pool.size() == 0) throw invalid_input("candidate pool is empty");
  if (params.n_candidates < 1) throw invalid_input("n_candidates must be >= 1");
  if (params.n_rollouts < 1) throw invalid_input("n_rollouts must be >= 1");

  std::vector<std::size_t> indices(pool.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  if (pool.size() > params.n_candidates) {
    auto rng = make_stream(params.seed, {0x5ab5'a3e1ULL});
    // Partial Fisher-Yates: the first n_candidates entries form the sample.
    for (std::size_t i = 0; i < params.n_candidates; ++i)
      std::swap(indices[i], indices[i + uniform_index(rng, indices.size() - i)]);
    indices.resize(params.n_candidates);
    std::ranges::sort(indices);
  }

  std::vector<CandidateValue> values(indices.size());
  auto evaluate = [&](std::size_t j) {
    const std::size_t idx = indices[j];
    if (params.mode == PlannerMode::exact) {
      values[j] = value_of_candidate_exact(belief, model, pool[idx]);
    } else {
      auto rng = make_stream(params.seed, {idx});
      values[j] = value_of_candidate_mc(belief, model, pool[idx], params.n_rollouts, rng, params.lookahead_depth,
                                        &pool);
    }
    values[j].pool_index = idx;
  };

  parallel_for(indices.size(), params.threads, evaluate);

  std::ranges::stable_sort(values, [](const CandidateValue& a, const CandidateValue& b) { return a.mean > b.mean; });
  Selection out;
  out.chosen = values.front().candidate;
  out.chosen_index = values.front().pool_index;
  out.values = std::move(values);
  return out;
}

}  // namespace discovery
