#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "discovery/belief.hpp"
#include "discovery/model.hpp"

namespace discovery {

// Heuristic pseudo-likelihood for live free-text replies. Not a calibrated
// probability: it scores token overlap between the reply and each fact.
//
//   score = max(floor, jaccard(t, f) ^ (1 + echo_damping * echo(s, t)))
//
// where echo(s, t) is the fraction of reply tokens repeated from the bot
// message. Replies that parrot the question are damped toward the floor.
struct FreeTextScorer {
  std::set<std::string> stopwords{"a", "an", "and", "the", "i", "my", "me", "is", "am", "are", "to", "of",
                                  "in", "it", "do", "you", "your", "what", "so", "on", "for", "at"};
  double echo_damping = 1.0;
  double floor = kLikelihoodFloor;

  std::set<std::string> tokens(std::string_view text) const {
    std::set<std::string> out;
    std::string cur;
    auto flush = [&] {
      if (!cur.empty() && !stopwords.contains(cur)) out.insert(cur);
      cur.clear();
    };
    for (char c : text) {
      if (std::isalnum(static_cast<unsigned char>(c))) cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      else flush();
    }
    flush();
    return out;
  }

  static double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& x : a) common += b.contains(x);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
  }

  double echo(std::string_view s, std::string_view t) const {
    const auto ts = tokens(t);
    if (ts.empty()) return 0.0;
    const auto ss = tokens(s);
    std::size_t repeated = 0;
    for (const auto& x : ts) repeated += ss.contains(x);
    return static_cast<double>(repeated) / static_cast<double>(ts.size());
  }

  double score(std::string_view s, std::string_view t, std::string_view fact_text) const {
    const double overlap = jaccard(tokens(t), tokens(fact_text));
    if (overlap <= 0.0) return floor;
    const double exponent = 1.0 + echo_damping * echo(s, t);
    return std::clamp(std::pow(overlap, exponent), floor, 1.0);
  }

  std::vector<double> likelihood_vector(const FactUniverse& universe, std::string_view s, std::string_view t) const {
    std::vector<double> out;
    out.reserve(universe.size());
    for (const auto& f : universe.facts()) out.push_back(score(s, t, f.text));
    return out;
  }
};

}  // namespace discovery
