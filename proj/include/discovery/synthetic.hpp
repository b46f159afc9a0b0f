#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "discovery/candidate_pool.hpp"
#include "discovery/grounded_responder.hpp"
#include "discovery/model.hpp"
#include "discovery/random.hpp"
#include "discovery/simulation.hpp"

namespace discovery {

// A generated world: universe, grounded human model and bot-side utterances.
struct SyntheticWorld {
  FactUniverse universe;
  GroundedConfig responder;
  CandidatePool pool;
  std::vector<NamedPool> probe_pools;
};

namespace detail {

inline constexpr std::array<const char*, 10> kTopics{"food",  "sport", "music", "city",   "pet",
                                                     "job",   "book",  "movie", "hobby", "drink"};

inline std::string topic_of(std::size_t fact, std::size_t n_topics) { return kTopics[fact % n_topics]; }

inline std::string fact_text(std::size_t fact, std::size_t n_topics) {
  return "my favorite " + topic_of(fact, n_topics) + " is option " + std::to_string(fact / n_topics);
}

inline std::vector<std::string> default_replies() {
  return {"i do not know", "not sure what to say", "let us talk about something else"};
}

}  // namespace detail

// World for the single-probe experiment. Every fact answers "relevant"
// probes (relevance 1 for all facts); "irrelevant" probes have relevance 0
// everywhere, so a discreet responder deflects them to a default reply.
inline SyntheticWorld make_probe_world(std::size_t n_facts = 100, std::size_t n_relevant = 10,
                                       std::size_t n_irrelevant = 10, double r0 = 0.5, double tau = 0.1,
                                       double eta = 0.02) {
  if (n_facts < 2) throw invalid_config("probe world needs at least 2 facts");
  const std::size_t n_topics = std::min<std::size_t>(detail::kTopics.size(), n_facts);
  std::vector<std::string> texts;
  GroundedConfig cfg;
  cfg.r0 = r0;
  cfg.tau = tau;
  cfg.eta = eta;
  cfg.default_responses = detail::default_replies();
  for (std::size_t f = 0; f < n_facts; ++f) {
    texts.push_back(detail::fact_text(f, n_topics));
    cfg.templates.push_back({"well, " + texts.back()});
  }
  NamedPool relevant{"relevant", {}}, irrelevant{"irrelevant", {}};
  for (std::size_t i = 0; i < n_relevant; ++i) {
    relevant.probes.push_back("tell me something about yourself, question " + std::to_string(i) + "?");
    cfg.probes.push_back(relevant.probes.back());
    cfg.relevance.emplace_back(n_facts, 1.0);
  }
  for (std::size_t i = 0; i < n_irrelevant; ++i) {
    irrelevant.probes.push_back("did you see the weather report number " + std::to_string(i) + "?");
    cfg.probes.push_back(irrelevant.probes.back());
    cfg.relevance.emplace_back(n_facts, 0.0);
  }
  std::vector<std::string> pool = relevant.probes;
  pool.insert(pool.end(), irrelevant.probes.begin(), irrelevant.probes.end());
  return {FactUniverse::from_texts(texts), std::move(cfg), CandidatePool(pool), {relevant, irrelevant}};
}

// World for re-ranking experiments. Facts are grouped into topics; the pool
// mixes topic questions, narrow single-fact questions, broad questions with
// random per-fact relevance, and bot self-disclosure statements that are
// irrelevant to every fact.
struct DiscoveryWorldParams {
  std::size_t n_facts = 30;
  std::size_t n_topic_questions = 20;
  std::size_t n_fact_questions = 30;
  std::size_t n_broad_questions = 10;
  std::size_t n_statements = 60;
  double r0 = 0.5;
  double tau = 0.1;
  double eta = 0.02;
  std::uint64_t seed = 0;
};

inline SyntheticWorld make_discovery_world(const DiscoveryWorldParams& p = {}) {
  if (p.n_facts < 2) throw invalid_config("discovery world needs at least 2 facts");
  const std::size_t n = p.n_facts;
  const std::size_t n_topics = std::min<std::size_t>(detail::kTopics.size(), n);
  auto rng = make_stream(p.seed, {0xd15c});

  GroundedConfig cfg;
  cfg.r0 = p.r0;
  cfg.tau = p.tau;
  cfg.eta = p.eta;
  cfg.default_responses = detail::default_replies();
  std::vector<std::string> texts;
  for (std::size_t f = 0; f < n; ++f) {
    texts.push_back(detail::fact_text(f, n_topics));
    cfg.templates.push_back({"oh, " + texts.back()});
  }

  std::vector<std::string> pool;
  auto add = [&](std::string text, std::vector<double> rel) {
    pool.push_back(text);
    cfg.probes.push_back(std::move(text));
    cfg.relevance.push_back(std::move(rel));
  };
  for (std::size_t i = 0; i < p.n_topic_questions; ++i) {
    const std::size_t topic = i % n_topics;
    std::vector<double> rel(n, 0.0);
    for (std::size_t f = topic; f < n; f += n_topics) rel[f] = 1.0;
    add("what kind of " + std::string(detail::kTopics[topic]) + " do you like, take " + std::to_string(i / n_topics) +
            "?",
        std::move(rel));
  }
  for (std::size_t i = 0; i < p.n_fact_questions; ++i) {
    const std::size_t f = i % n;
    std::vector<double> rel(n, 0.0);
    for (std::size_t g = f % n_topics; g < n; g += n_topics) rel[g] = 0.3;
    rel[f] = 1.0;
    add("is your favorite " + detail::topic_of(f, n_topics) + " option " + std::to_string(f / n_topics) + "?",
        std::move(rel));
  }
  for (std::size_t i = 0; i < p.n_broad_questions; ++i) {
    std::vector<double> rel(n);
    for (double& r : rel) r = uniform01(rng);
    add("tell me more about you, part " + std::to_string(i) + "?", std::move(rel));
  }
  for (std::size_t i = 0; i < p.n_statements; ++i)
    add("i spent the weekend " + std::string(i % 2 ? "at home" : "outside") + " with story " + std::to_string(i) + ".",
        std::vector<double>(n, 0.0));

  return {FactUniverse::from_texts(texts), std::move(cfg), CandidatePool(pool), {}};
}

}  // namespace discovery
