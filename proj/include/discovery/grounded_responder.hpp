#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "discovery/response_model.hpp"

namespace discovery {

struct GroundedConfig {
  std::vector<std::string> probes;
  // relevance[probe][fact] in [0, 1]
  std::vector<std::vector<double>> relevance;
  // Reply strings for each fact; at least one per fact.
  std::vector<std::vector<std::string>> templates;
  std::vector<std::string> default_responses{"i do not know"};
  // Default-fact relevance. -infinity disables the default branch.
  double r0 = 0.5;
  double tau = 0.1;
  // Probability of emitting a uniformly random reply from the full set.
  double eta = 0.02;
};

// Templated human model with a default ("discreet") branch.
//
// Given probe s and persona F the human picks a fact c from F plus a default
// fact with probability proportional to exp(R[s][c] / tau) (exp(r0 / tau) for
// the default), then replies with one of c's templates, or a default reply.
// With probability eta the reply is instead uniform over all replies.
class GroundedResponder final : public ResponseModel {
 public:
  explicit GroundedResponder(GroundedConfig cfg) : cfg_(std::move(cfg)) {
    if (!(cfg_.tau > 0.0)) throw invalid_config("temperature tau must be > 0");
    if (!(cfg_.eta >= 0.0 && cfg_.eta < 1.0)) throw invalid_config("emission noise eta must lie in [0, 1)");
    if (std::isnan(cfg_.r0) || cfg_.r0 == std::numeric_limits<double>::infinity())
      throw invalid_config("r0 must be finite or -infinity");
    n_ = cfg_.templates.size();
    if (n_ < 2) throw invalid_config("grounded responder needs templates for at least 2 facts");
    if (cfg_.relevance.size() != cfg_.probes.size())
      throw invalid_config("relevance has " + std::to_string(cfg_.relevance.size()) + " rows for " +
                           std::to_string(cfg_.probes.size()) + " probes");
    for (std::size_t s = 0; s < cfg_.probes.size(); ++s) {
      if (cfg_.relevance[s].size() != n_)
        throw invalid_config("relevance row " + std::to_string(s) + " has " +
                             std::to_string(cfg_.relevance[s].size()) + " entries, expected " + std::to_string(n_));
      for (double r : cfg_.relevance[s])
        if (!std::isfinite(r)) throw invalid_config("relevance entries must be finite");
      if (!probe_index_.emplace(cfg_.probes[s], s).second)
        throw invalid_config("duplicate probe: " + cfg_.probes[s]);
    }
    if (default_enabled() && cfg_.default_responses.empty())
      throw invalid_config("default branch enabled but no default responses given");

    for (std::size_t f = 0; f < n_; ++f) {
      if (cfg_.templates[f].empty()) throw invalid_config("fact " + std::to_string(f) + " has no templates");
      for (const auto& t : cfg_.templates[f])
        add_response(t, Origin{static_cast<long>(f), 1.0 / static_cast<double>(cfg_.templates[f].size())});
    }
    for (const auto& t : cfg_.default_responses)
      add_response(t, Origin{-1, 1.0 / static_cast<double>(cfg_.default_responses.size())});
    zero_relevance_.assign(n_, 0.0);
  }

  const GroundedConfig& config() const { return cfg_; }
  std::size_t universe_size() const override { return n_; }
  const std::vector<std::string>& all_responses() const { return responses_; }
  bool default_enabled() const { return cfg_.r0 != -std::numeric_limits<double>::infinity(); }

  // Unknown probes have zero relevance to every fact.
  const std::vector<double>& relevance(std::string_view s) const {
    const auto it = probe_index_.find(std::string(s));
    return it == probe_index_.end() ? zero_relevance_ : cfg_.relevance[it->second];
  }

  // Choice probabilities over persona facts (in persona order) followed by the
  // default fact as the last entry.
  std::vector<double> fact_choice_distribution(std::string_view s, std::span<const FactId> persona) const {
    check_persona(persona);
    const auto& rel = relevance(s);
    double top = default_enabled() ? cfg_.r0 : -std::numeric_limits<double>::infinity();
    for (FactId f : persona) top = std::max(top, rel[f]);
    std::vector<double> p(persona.size() + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < persona.size(); ++i) total += p[i] = std::exp((rel[persona[i]] - top) / cfg_.tau);
    p.back() = default_enabled() ? std::exp((cfg_.r0 - top) / cfg_.tau) : 0.0;
    total += p.back();
    for (double& x : p) x /= total;
    return p;
  }

  std::vector<double> likelihood_vector(std::string_view s, std::string_view t) const override {
    const auto it = response_index_.find(std::string(t));
    if (it == response_index_.end()) return std::vector<double>(n_, 0.0);
    const Origin origin = origins_[it->second];
    const auto& rel = relevance(s);
    const double noise = cfg_.eta / static_cast<double>(responses_.size());
    std::vector<double> out(n_);
    for (std::size_t f = 0; f < n_; ++f) {
      // Persona {f}: two-way choice between f and the default fact.
      double pick_fact = 1.0;
      if (default_enabled()) {
        const double d = (cfg_.r0 - rel[f]) / cfg_.tau;
        pick_fact = d > 0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
      }
      double mass = 0.0;
      if (origin.fact == static_cast<long>(f)) mass = pick_fact * origin.share;
      else if (origin.fact < 0) mass = (1.0 - pick_fact) * origin.share;
      out[f] = (1.0 - cfg_.eta) * mass + noise;
    }
    return out;
  }

  double response_probability(std::string_view s, std::span<const FactId> persona,
                              std::string_view t) const override {
    const auto it = response_index_.find(std::string(t));
    if (it == response_index_.end()) {
      check_persona(persona);
      return 0.0;
    }
    const Origin origin = origins_[it->second];
    const auto choice = fact_choice_distribution(s, persona);
    double mass = 0.0;
    if (origin.fact < 0) {
      mass = choice.back() * origin.share;
    } else {
      for (std::size_t i = 0; i < persona.size(); ++i)
        if (static_cast<long>(persona[i]) == origin.fact) mass = choice[i] * origin.share;
    }
    return (1.0 - cfg_.eta) * mass + cfg_.eta / static_cast<double>(responses_.size());
  }

  using ResponseModel::respond;
  std::string respond(std::string_view s, std::span<const FactId> persona, RandomStream& rng) const override {
    const auto choice = fact_choice_distribution(s, persona);
    if (cfg_.eta > 0.0 && uniform01(rng) < cfg_.eta) return responses_[uniform_index(rng, responses_.size())];
    const std::size_t c = sample_categorical(rng, choice);
    if (c == persona.size())
      return cfg_.default_responses[uniform_index(rng, cfg_.default_responses.size())];
    const auto& options = cfg_.templates[persona[c]];
    return options[uniform_index(rng, options.size())];
  }

  std::optional<std::vector<std::string>> response_support(std::string_view) const override { return responses_; }

 private:
  struct Origin {
    long fact;     // -1 for the default fact
    double share;  // probability of this string given its origin was chosen
  };

  void add_response(const std::string& t, Origin origin) {
    if (t.empty()) throw invalid_config("response strings must be non-empty");
    if (!response_index_.emplace(t, responses_.size()).second)
      throw invalid_config("response \"" + t + "\" appears more than once across templates/defaults");
    responses_.push_back(t);
    origins_.push_back(origin);
  }

  GroundedConfig cfg_;
  std::size_t n_ = 0;
  std::vector<std::string> responses_;
  std::vector<Origin> origins_;
  std::unordered_map<std::string, std::size_t> probe_index_;
  std::unordered_map<std::string, std::size_t> response_index_;
  std::vector<double> zero_relevance_;
};

}  // namespace discovery
