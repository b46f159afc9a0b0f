#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "discovery/response_model.hpp"

namespace discovery {

// Exact likelihood table P(t | s, f) indexed [probe][response][fact]. Within a
// persona the human picks the fact to talk about uniformly.
class TabularWorld final : public ResponseModel {
 public:
  TabularWorld(std::vector<std::string> probes, std::vector<std::string> responses,
               std::vector<std::vector<std::vector<double>>> table)
      : probes_(std::move(probes)), responses_(std::move(responses)), table_(std::move(table)) {
    if (probes_.empty() || responses_.empty()) throw invalid_input("tabular world needs probes and responses");
    if (table_.size() != probes_.size())
      throw invalid_input("table has " + std::to_string(table_.size()) + " probe rows, expected " +
                          std::to_string(probes_.size()));
    n_ = table_[0].empty() ? 0 : table_[0][0].size();
    if (n_ < 2) throw invalid_input("tabular world needs at least 2 facts");
    for (std::size_t s = 0; s < probes_.size(); ++s) {
      if (!probe_index_.emplace(probes_[s], s).second) throw invalid_input("duplicate probe: " + probes_[s]);
      if (table_[s].size() != responses_.size())
        throw invalid_input("probe " + std::to_string(s) + " has " + std::to_string(table_[s].size()) +
                            " response rows, expected " + std::to_string(responses_.size()));
      for (const auto& row : table_[s]) {
        if (row.size() != n_) throw invalid_input("probe " + std::to_string(s) + " has a ragged fact dimension");
        for (double p : row)
          if (!(p >= 0.0) || p > 1.0) throw invalid_input("table entries must lie in [0, 1]");
      }
    }
    for (std::size_t t = 0; t < responses_.size(); ++t)
      if (!response_index_.emplace(responses_[t], t).second)
        throw invalid_input("duplicate response: " + responses_[t]);
    for (std::size_t s = 0; s < probes_.size(); ++s)
      for (std::size_t f = 0; f < n_; ++f) {
        double total = 0.0;
        for (std::size_t t = 0; t < responses_.size(); ++t) total += table_[s][t][f];
        if (std::abs(total - 1.0) > 1e-6)
          throw Error(ErrorCode::normalization, "row (probe " + std::to_string(s) + ", fact " +
                                                    std::to_string(f) + ") sums to " + std::to_string(total));
      }
  }

  std::size_t universe_size() const override { return n_; }
  const std::vector<std::string>& probes() const { return probes_; }
  const std::vector<std::string>& responses() const { return responses_; }
  double probability(std::size_t s, std::size_t t, FactId f) const { return table_[s][t][f]; }

  std::vector<double> likelihood_vector(std::string_view s, std::string_view t) const override {
    const auto si = probe_index_.find(std::string(s));
    const auto ti = response_index_.find(std::string(t));
    if (si == probe_index_.end() || ti == response_index_.end()) return std::vector<double>(n_, 1.0);
    return table_[si->second][ti->second];
  }

  double response_probability(std::string_view s, std::span<const FactId> persona,
                              std::string_view t) const override {
    check_persona(persona);
    const auto si = probe_index_.find(std::string(s));
    const auto ti = response_index_.find(std::string(t));
    if (si == probe_index_.end() || ti == response_index_.end()) return 0.0;
    const auto& row = table_[si->second][ti->second];
    double total = 0.0;
    for (FactId f : persona) total += row[f];
    return total / static_cast<double>(persona.size());
  }

  using ResponseModel::respond;
  std::string respond(std::string_view s, std::span<const FactId> persona, RandomStream& rng) const override {
    check_persona(persona);
    const auto si = probe_index_.find(std::string(s));
    if (si == probe_index_.end()) throw invalid_input("tabular world has no probe \"" + std::string(s) + "\"");
    const FactId f = persona[uniform_index(rng, persona.size())];
    std::vector<double> column(responses_.size());
    for (std::size_t t = 0; t < responses_.size(); ++t) column[t] = table_[si->second][t][f];
    return responses_[sample_categorical(rng, column)];
  }

  std::optional<std::vector<std::string>> response_support(std::string_view) const override { return responses_; }

 private:
  std::vector<std::string> probes_;
  std::vector<std::string> responses_;
  std::vector<std::vector<std::vector<double>>> table_;
  std::unordered_map<std::string, std::size_t> probe_index_;
  std::unordered_map<std::string, std::size_t> response_index_;
  std::size_t n_ = 0;
};

}  // namespace discovery
