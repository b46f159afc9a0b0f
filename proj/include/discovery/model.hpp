#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "discovery/combinatorics.hpp"
#include "discovery/error.hpp"

namespace discovery {

struct Fact {
  FactId id = 0;
  std::string text;
};

// The candidate fact set. Ids are dense: facts()[i].id == i.
class FactUniverse {
 public:
  FactUniverse() = default;

  explicit FactUniverse(std::vector<Fact> facts) : facts_(std::move(facts)) {
    if (facts_.size() < 2) throw invalid_input("fact universe needs at least 2 facts");
    for (std::size_t i = 0; i < facts_.size(); ++i) {
      if (facts_[i].id != i)
        throw invalid_input("fact ids must be dense from 0; position " + std::to_string(i) +
                            " has id " + std::to_string(facts_[i].id));
      if (facts_[i].text.empty()) throw invalid_input("fact " + std::to_string(i) + " has empty text");
    }
  }

  static FactUniverse from_texts(const std::vector<std::string>& texts) {
    std::vector<Fact> facts;
    facts.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) facts.push_back({static_cast<FactId>(i), texts[i]});
    return FactUniverse(std::move(facts));
  }

  std::size_t size() const { return facts_.size(); }
  const std::vector<Fact>& facts() const { return facts_; }
  const Fact& operator[](FactId id) const { return facts_.at(id); }

 private:
  std::vector<Fact> facts_;
};

// A hidden K-subset of the universe. Ids are kept sorted.
class Persona {
 public:
  Persona() = default;

  Persona(std::vector<FactId> ids, std::size_t universe_size) : ids_(std::move(ids)) {
    std::ranges::sort(ids_);
    if (ids_.empty()) throw invalid_input("persona must contain at least one fact");
    if (ids_.size() >= universe_size) throw invalid_input("persona size must be < universe size");
    if (std::ranges::adjacent_find(ids_) != ids_.end()) throw invalid_input("persona has duplicate fact ids");
    if (ids_.back() >= universe_size)
      throw invalid_input("persona fact id " + std::to_string(ids_.back()) + " outside universe");
  }

  const std::vector<FactId>& ids() const { return ids_; }
  std::size_t k() const { return ids_.size(); }
  bool contains(FactId f) const { return std::ranges::binary_search(ids_, f); }

  friend bool operator==(const Persona&, const Persona&) = default;

 private:
  std::vector<FactId> ids_;
};

enum class Speaker { bot, human };

inline const char* to_string(Speaker s) { return s == Speaker::bot ? "bot" : "human"; }

struct Utterance {
  Speaker speaker = Speaker::bot;
  std::string text;
};

// Turns strictly alternate between speakers.
class DialogueHistory {
 public:
  void append(Utterance u) {
    if (u.text.empty()) throw invalid_input("utterance text must be non-empty");
    if (!turns_.empty() && turns_.back().speaker == u.speaker)
      throw invalid_input("dialogue turns must alternate speakers");
    turns_.push_back(std::move(u));
  }

  const std::vector<Utterance>& turns() const { return turns_; }
  std::size_t exchanges() const { return turns_.size() / 2; }
  bool empty() const { return turns_.empty(); }

 private:
  std::vector<Utterance> turns_;
};

}  // namespace discovery
