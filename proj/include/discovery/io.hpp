#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "discovery/candidate_pool.hpp"
#include "discovery/grounded_responder.hpp"
#include "discovery/model.hpp"
#include "discovery/tabular_world.hpp"

namespace discovery {

using json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

namespace detail {

// Runs f, turning nlohmann type/lookup errors into parse errors with context.
template <typename F>
auto with_parse_context(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, what + ": " + e.what());
  }
}

}  // namespace detail

// {"facts": [{"id": 0, "text": "..."}, ...]}
inline FactUniverse parse_universe(const json& j) {
  return detail::with_parse_context("fact universe", [&] {
    std::vector<Fact> facts;
    for (const auto& f : j.at("facts")) facts.push_back({f.at("id").get<FactId>(), f.at("text").get<std::string>()});
    return FactUniverse(std::move(facts));
  });
}

inline FactUniverse load_universe(const std::filesystem::path& path) { return parse_universe(read_json_file(path)); }

inline json universe_to_json(const FactUniverse& u) {
  json facts = json::array();
  for (const auto& f : u.facts()) facts.push_back({{"id", f.id}, {"text", f.text}});
  return {{"facts", facts}};
}

// {"probes": [...], "responses": [...], "table": [[[p, ...], ...], ...]}
// indexed [probe][response][fact].
inline TabularWorld parse_tabular_world(const json& j) {
  auto [probes, responses, table] = detail::with_parse_context("tabular world", [&] {
    return std::tuple{j.at("probes").get<std::vector<std::string>>(),
                      j.at("responses").get<std::vector<std::string>>(),
                      j.at("table").get<std::vector<std::vector<std::vector<double>>>>()};
  });
  return TabularWorld(std::move(probes), std::move(responses), std::move(table));
}

inline TabularWorld load_tabular_world(const std::filesystem::path& path) {
  try {
    return parse_tabular_world(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io || e.code() == ErrorCode::parse) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// {"probes": [...], "relevance": [[...]], "templates": [{"fact": 0, "text": "..."}, ...],
//  "default_responses": [...], "r0": 0.5, "tau": 0.1, "eta": 0.02}
// r0 may be the string "-inf" to disable the default branch.
inline GroundedConfig parse_grounded_config(const json& j, std::optional<std::size_t> universe_size = std::nullopt) {
  GroundedConfig cfg;
  std::vector<std::pair<std::size_t, std::string>> templates;
  detail::with_parse_context("grounded responder", [&] {
    cfg.probes = j.value("probes", std::vector<std::string>{});
    cfg.relevance = j.value("relevance", std::vector<std::vector<double>>{});
    for (const auto& t : j.at("templates"))
      templates.emplace_back(t.at("fact").get<std::size_t>(), t.at("text").get<std::string>());
    if (j.contains("default_responses"))
      cfg.default_responses = j.at("default_responses").get<std::vector<std::string>>();
    if (j.contains("r0")) {
      const auto& r0 = j.at("r0");
      cfg.r0 = r0.is_string() && r0.get<std::string>() == "-inf" ? -std::numeric_limits<double>::infinity()
                                                                 : r0.get<double>();
    }
    cfg.tau = j.value("tau", cfg.tau);
    cfg.eta = j.value("eta", cfg.eta);
    return 0;
  });
  std::size_t n = universe_size.value_or(0);
  if (!universe_size) {
    if (!cfg.relevance.empty()) n = cfg.relevance.front().size();
    else
      for (const auto& [f, _] : templates) n = std::max(n, f + 1);
  }
  for (const auto& [f, text] : templates)
    if (f >= n)
      throw Error(ErrorCode::dangling_fact, "template \"" + text + "\" refers to fact " + std::to_string(f) +
                                                " outside universe of size " + std::to_string(n));
  cfg.templates.assign(n, {});
  for (auto& [f, text] : templates) cfg.templates[f].push_back(std::move(text));
  return cfg;
}

inline GroundedResponder load_grounded_responder(const std::filesystem::path& path,
                                                 std::optional<std::size_t> universe_size = std::nullopt) {
  return GroundedResponder(parse_grounded_config(read_json_file(path), universe_size));
}

inline json grounded_config_to_json(const GroundedConfig& cfg) {
  json templates = json::array();
  for (std::size_t f = 0; f < cfg.templates.size(); ++f)
    for (const auto& t : cfg.templates[f]) templates.push_back({{"fact", f}, {"text", t}});
  json r0 = std::isinf(cfg.r0) ? json("-inf") : json(cfg.r0);
  return {{"probes", cfg.probes}, {"relevance", cfg.relevance},          {"templates", templates},
          {"default_responses", cfg.default_responses}, {"r0", r0}, {"tau", cfg.tau}, {"eta", cfg.eta}};
}

// Either a JSON string array or plain text with one utterance per line.
inline CandidatePool parse_candidate_pool(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const auto j = [&] {
      try {
        return json::parse(text);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string("candidate pool: ") + e.what());
      }
    }();
    return detail::with_parse_context("candidate pool",
                                      [&] { return CandidatePool(j.get<std::vector<std::string>>()); });
  }
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return CandidatePool(lines);
}

inline CandidatePool load_candidate_pool(const std::filesystem::path& path) {
  return parse_candidate_pool(read_text_file(path));
}

}  // namespace discovery
