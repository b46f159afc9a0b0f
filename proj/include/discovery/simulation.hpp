#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "discovery/belief.hpp"
#include "discovery/candidate_pool.hpp"
#include "discovery/model.hpp"
#include "discovery/parallel.hpp"
#include "discovery/planner.hpp"
#include "discovery/response_model.hpp"

namespace discovery {

enum class Policy { discovery, random, fixed_order };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::discovery: return "discovery";
    case Policy::random: return "random";
    case Policy::fixed_order: return "fixed-order";
  }
  return "unknown";
}

inline Policy parse_policy(const std::string& name) {
  if (name == "discovery") return Policy::discovery;
  if (name == "random") return Policy::random;
  if (name == "fixed-order" || name == "fixed_order") return Policy::fixed_order;
  throw invalid_config("unknown policy \"" + name + "\" (expected discovery, random or fixed-order)");
}

struct DialogueConfig {
  std::size_t n_exchanges = 6;
  PlannerParams planner;
  // Who speaks first. A human opener replies to an empty bot message and
  // counts as an extra exchange.
  Speaker opening = Speaker::bot;
  std::size_t top_m = 5;
};

struct Exchange {
  std::string bot;  // empty for a human opener
  std::string human;
  double score = 0.0;
};

struct DialogueResult {
  std::string policy_name;
  std::uint64_t seed = 0;
  Persona true_persona;
  DialogueHistory transcript;
  std::vector<Exchange> exchanges;
  std::vector<double> score_trajectory;
  std::vector<SubsetProbability> final_posterior_top;
  double final_score = 0.0;
  bool detected = false;
};

// Unique argmax subset equals the persona; ties are failures.
inline bool detects(const BeliefState& belief, const Persona& persona) {
  const auto best = unique_argmax_subset(belief);
  return best && std::ranges::equal(belief.subsets()[*best], persona.ids());
}

inline DialogueResult run_dialogue(Policy policy, const ResponseModel& model, const CandidatePool& pool,
                                   const Persona& true_persona, const DialogueConfig& config, std::uint64_t seed) {
  if (config.n_exchanges < 6) throw invalid_config("dialogues need at least 6 exchanges");
  if (pool.size() == 0) throw invalid_input("candidate pool is empty");
  const std::size_t n = model.universe_size();
  if (true_persona.ids().back() >= n || true_persona.k() >= n)
    throw invalid_input("true persona does not fit the model universe");

  auto responder_rng = make_stream(seed, {1});
  auto policy_rng = make_stream(seed, {2});

  DialogueResult out;
  out.policy_name = to_string(policy);
  out.seed = seed;
  out.true_persona = true_persona;
  BeliefState belief(n, true_persona.k());

  auto exchange = [&](const std::string& s) {
    std::string t = model.respond(s, true_persona, responder_rng);
    belief = belief.update(turn_weights_for(model, s, t));
    if (!s.empty()) out.transcript.append({Speaker::bot, s});
    out.transcript.append({Speaker::human, t});
    const double score = discovery_score(belief);
    out.score_trajectory.push_back(score);
    out.exchanges.push_back({s, std::move(t), score});
  };

  if (config.opening == Speaker::human) exchange("");
  for (std::size_t turn = 0; turn < config.n_exchanges; ++turn) {
    std::string s;
    switch (policy) {
      case Policy::discovery: {
        PlannerParams p = config.planner;
        p.seed = derive_seed(seed, {3, turn});
        s = select_response(belief, model, pool, p).chosen;
        break;
      }
      case Policy::random: s = pool[uniform_index(policy_rng, pool.size())]; break;
      case Policy::fixed_order: s = pool[turn % pool.size()]; break;
    }
    exchange(s);
  }
  out.final_score = discovery_score(belief);
  out.final_posterior_top = top_subsets(belief, config.top_m);
  out.detected = detects(belief, true_persona);
  return out;
}

struct NamedPool {
  std::string name;
  std::vector<std::string> probes;
};

struct ProbeResult {
  std::string pool_name;
  double accuracy = 0.0;
  std::size_t n_probes = 0;
  std::size_t n_facts = 0;
};

// Uniform k-subset of {0..n-1} as a sorted id list.
inline std::vector<FactId> sample_subset(RandomStream& rng, std::size_t n, std::size_t k,
                                         std::span<const FactId> required = {}) {
  std::vector<FactId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<FactId>(i);
  std::vector<FactId> out(required.begin(), required.end());
  std::erase_if(ids, [&](FactId f) { return std::ranges::find(required, f) != required.end(); });
  for (std::size_t i = 0; out.size() < k; ++i) {
    std::swap(ids[i], ids[i + uniform_index(rng, ids.size() - i)]);
    out.push_back(ids[i]);
  }
  std::ranges::sort(out);
  return out;
}

// Single-probe detection: for every pool, probe and sampled true fact the
// human (persona = that fact plus k - 1 random others) answers one probe; a
// fresh belief absorbs the exchange and detection is a unique argmax hit.
inline std::vector<ProbeResult> probe_experiment(const std::vector<NamedPool>& pools, const ResponseModel& model,
                                                 std::size_t n_facts, std::size_t k, std::uint64_t seed) {
  const std::size_t n = model.universe_size();
  if (n_facts < 1 || n_facts > n)
    throw invalid_input("probe experiment needs 1 <= n_facts <= universe size (" + std::to_string(n) + ")");
  if (k < 1 || k >= n) throw invalid_input("k must satisfy 1 <= k < universe size");

  std::vector<FactId> true_facts;
  if (n_facts == n) {
    for (std::size_t f = 0; f < n; ++f) true_facts.push_back(static_cast<FactId>(f));
  } else {
    auto rng = make_stream(seed, {0});
    true_facts = sample_subset(rng, n, n_facts);
  }
  const BeliefState fresh(n, k);

  std::vector<ProbeResult> out;
  for (std::size_t p = 0; p < pools.size(); ++p) {
    const auto& pool = pools[p];
    if (pool.probes.empty()) throw invalid_input("probe pool \"" + pool.name + "\" is empty");
    std::size_t correct = 0;
    for (std::size_t j = 0; j < pool.probes.size(); ++j) {
      for (FactId f : true_facts) {
        auto persona_rng = make_stream(seed, {1, f});
        const FactId required[] = {f};
        const Persona persona(sample_subset(persona_rng, n, k, required), n);
        auto rng = make_stream(seed, {2, p, j, f});
        const auto& s = pool.probes[j];
        const std::string t = model.respond(s, persona, rng);
        correct += detects(fresh.update(turn_weights_for(model, s, t)), persona);
      }
    }
    const double trials = static_cast<double>(pool.probes.size() * true_facts.size());
    out.push_back({pool.name, static_cast<double>(correct) / trials, pool.probes.size(), true_facts.size()});
  }
  return out;
}

inline std::size_t token_count(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

struct PolicyRow {
  std::string policy;
  double mean_score = 0.0;
  double detection_rate = 0.0;
  double pct_questions = 0.0;  // percent of bot utterances ending in '?'
  double mean_len = 0.0;       // whitespace tokens per bot utterance
  std::size_t n = 0;
  std::vector<double> final_scores;  // per dialogue, matched across rows
  std::vector<bool> detected;
};

struct PairedDifference {
  std::string first;
  std::string second;
  double mean = 0.0;  // mean of (first - second) final scores
  double std_error = 0.0;
};

struct ComparisonReport {
  std::vector<PolicyRow> rows;
  std::vector<PairedDifference> paired;
};

inline PairedDifference paired_difference(const PolicyRow& a, const PolicyRow& b) {
  if (a.final_scores.size() != b.final_scores.size() || a.final_scores.empty())
    throw invalid_input("paired difference needs matched, non-empty dialogue sets");
  const std::size_t n = a.final_scores.size();
  std::vector<double> d(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += d[i] = a.final_scores[i] - b.final_scores[i];
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return {a.policy, b.policy, mean, se};
}

// Runs every policy on the same dialogue set: dialogue i uses the same true
// persona and the same seed (hence the same responder stream) for each policy.
inline ComparisonReport policy_comparison(const std::vector<Policy>& policies, const ResponseModel& model,
                                          const CandidatePool& pool, std::size_t k, std::size_t n_dialogues,
                                          const DialogueConfig& config, std::uint64_t seed,
                                          std::size_t threads = 1) {
  if (n_dialogues < 1) throw invalid_input("n_dialogues must be >= 1");
  if (policies.empty()) throw invalid_input("no policies to compare");
  const std::size_t n = model.universe_size();
  if (k < 1 || k >= n) throw invalid_input("k must satisfy 1 <= k < universe size");

  std::vector<Persona> personas;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_dialogues; ++i) {
    auto rng = make_stream(seed, {10, i});
    personas.emplace_back(sample_subset(rng, n, k), n);
    seeds.push_back(derive_seed(seed, {11, i}));
  }

  ComparisonReport report;
  for (Policy policy : policies) {
    std::vector<DialogueResult> results(n_dialogues);
    parallel_for(n_dialogues, threads,
                 [&](std::size_t i) { results[i] = run_dialogue(policy, model, pool, personas[i], config, seeds[i]); });
    PolicyRow row;
    row.policy = to_string(policy);
    row.n = n_dialogues;
    std::size_t questions = 0, bot_turns = 0, tokens = 0, hits = 0;
    double score_sum = 0.0;
    for (const auto& r : results) {
      score_sum += r.final_score;
      hits += r.detected;
      row.final_scores.push_back(r.final_score);
      row.detected.push_back(r.detected);
      for (const auto& e : r.exchanges) {
        if (e.bot.empty()) continue;
        ++bot_turns;
        questions += is_question(e.bot);
        tokens += token_count(e.bot);
      }
    }
    row.mean_score = score_sum / static_cast<double>(n_dialogues);
    row.detection_rate = static_cast<double>(hits) / static_cast<double>(n_dialogues);
    row.pct_questions = bot_turns ? 100.0 * static_cast<double>(questions) / static_cast<double>(bot_turns) : 0.0;
    row.mean_len = bot_turns ? static_cast<double>(tokens) / static_cast<double>(bot_turns) : 0.0;
    report.rows.push_back(std::move(row));
  }
  for (std::size_t a = 0; a < report.rows.size(); ++a)
    for (std::size_t b = a + 1; b < report.rows.size(); ++b)
      report.paired.push_back(paired_difference(report.rows[a], report.rows[b]));
  return report;
}

}  // namespace discovery
