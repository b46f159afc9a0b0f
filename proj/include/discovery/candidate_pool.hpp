#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "discovery/error.hpp"

namespace discovery {

inline bool is_question(const std::string& text) {
  const auto end = text.find_last_not_of(" \t\r\n");
  return end != std::string::npos && text[end] == '?';
}

// The bot's finite utterance set. Construction drops duplicates (first copy
// wins) and records how many were removed.
class CandidatePool {
 public:
  CandidatePool() = default;

  explicit CandidatePool(const std::vector<std::string>& utterances) {
    std::unordered_set<std::string> seen;
    for (const auto& u : utterances) {
      if (u.empty()) throw invalid_input("candidate utterances must be non-empty");
      if (seen.insert(u).second) utterances_.push_back(u);
      else ++duplicates_removed_;
    }
    if (utterances_.empty()) throw invalid_input("candidate pool is empty");
  }

  std::size_t size() const { return utterances_.size(); }
  const std::string& operator[](std::size_t i) const { return utterances_[i]; }
  const std::vector<std::string>& utterances() const { return utterances_; }
  std::size_t duplicates_removed() const { return duplicates_removed_; }

 private:
  std::vector<std::string> utterances_;
  std::size_t duplicates_removed_ = 0;
};

}  // namespace discovery
