#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "discovery/io.hpp"
#include "discovery/planner.hpp"
#include "discovery/report.hpp"
#include "discovery/simulation.hpp"
#include "discovery/synthetic.hpp"

namespace discovery {

// Everything a dialogue needs besides the persona: the fact universe, the
// human model and the bot's utterances.
struct World {
  FactUniverse universe;
  std::shared_ptr<const ResponseModel> model;
  std::optional<CandidatePool> pool;
  std::vector<NamedPool> probe_pools;
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// A config value that is either inline JSON or a path to a JSON file.
inline json inline_or_file(const json& j, const std::filesystem::path& base) {
  return j.is_string() ? read_json_file(resolve(base, j.get<std::string>())) : j;
}

inline CandidatePool pool_from(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) return load_candidate_pool(resolve(base, j.get<std::string>()));
  return with_parse_context("pool", [&] { return CandidatePool(j.get<std::vector<std::string>>()); });
}

}  // namespace detail

// {"mode": "monte_carlo"|"exact", "n_candidates", "n_rollouts", "lookahead_depth", "threads"}
inline PlannerParams parse_planner(const json& j, PlannerParams p = {}) {
  return detail::with_parse_context("planner", [&] {
    p.n_candidates = j.value("n_candidates", p.n_candidates);
    p.n_rollouts = j.value("n_rollouts", p.n_rollouts);
    p.lookahead_depth = j.value("lookahead_depth", p.lookahead_depth);
    p.threads = j.value("threads", p.threads);
    const auto mode = j.value("mode", std::string(p.mode == PlannerMode::exact ? "exact" : "monte_carlo"));
    if (mode == "exact") p.mode = PlannerMode::exact;
    else if (mode == "monte_carlo") p.mode = PlannerMode::monte_carlo;
    else throw invalid_config("unknown planner mode \"" + mode + "\"");
    if (p.n_candidates < 1 || p.n_rollouts < 1 || p.lookahead_depth < 1)
      throw invalid_config("planner counts must be >= 1");
    return p;
  });
}

// Builds a World from a config object with keys "universe", "world", "pool"
// and "pools". The world "type" is one of tabular, grounded,
// synthetic_probe or synthetic_discovery; file paths resolve against `base`.
inline World load_world(const json& cfg, const std::filesystem::path& base) {
  if (!cfg.contains("world")) throw invalid_config("config has no \"world\" section");
  const json world = cfg.at("world");
  const std::string type = detail::with_parse_context("world", [&] { return world.at("type").get<std::string>(); });
  const json body = world.contains("path") ? read_json_file(detail::resolve(base, world.at("path").get<std::string>()))
                                           : world;
  std::optional<FactUniverse> universe;
  if (cfg.contains("universe")) universe = parse_universe(detail::inline_or_file(cfg.at("universe"), base));

  World out;
  if (type == "synthetic_probe" || type == "synthetic_discovery") {
    SyntheticWorld synth = [&] {
      return detail::with_parse_context("world", [&] {
        if (type == "synthetic_probe") {
          return make_probe_world(body.value("n_facts", 100), body.value("n_relevant", 10),
                                  body.value("n_irrelevant", 10), body.value("r0", 0.5), body.value("tau", 0.1),
                                  body.value("eta", 0.02));
        }
        DiscoveryWorldParams p;
        p.n_facts = body.value("n_facts", p.n_facts);
        p.n_topic_questions = body.value("n_topic_questions", p.n_topic_questions);
        p.n_fact_questions = body.value("n_fact_questions", p.n_fact_questions);
        p.n_broad_questions = body.value("n_broad_questions", p.n_broad_questions);
        p.n_statements = body.value("n_statements", p.n_statements);
        p.r0 = body.value("r0", p.r0);
        p.tau = body.value("tau", p.tau);
        p.eta = body.value("eta", p.eta);
        p.seed = body.value("seed", p.seed);
        return make_discovery_world(p);
      });
    }();
    out.universe = std::move(synth.universe);
    out.model = std::make_shared<GroundedResponder>(std::move(synth.responder));
    out.pool = std::move(synth.pool);
    out.probe_pools = std::move(synth.probe_pools);
  } else if (type == "tabular") {
    out.model = std::make_shared<TabularWorld>(parse_tabular_world(body));
  } else if (type == "grounded") {
    const auto n = universe ? std::optional<std::size_t>(universe->size()) : std::nullopt;
    out.model = std::make_shared<GroundedResponder>(parse_grounded_config(body, n));
  } else {
    throw invalid_config("unknown world type \"" + type + "\"");
  }

  if (universe) out.universe = std::move(*universe);
  else if (out.universe.size() == 0) {
    std::vector<std::string> texts;
    for (std::size_t f = 0; f < out.model->universe_size(); ++f) texts.push_back("fact " + std::to_string(f));
    out.universe = FactUniverse::from_texts(texts);
  }
  if (out.universe.size() != out.model->universe_size())
    throw invalid_config("universe has " + std::to_string(out.universe.size()) + " facts but the world models " +
                         std::to_string(out.model->universe_size()));

  if (cfg.contains("pool")) out.pool = detail::pool_from(cfg.at("pool"), base);
  if (cfg.contains("pools")) {
    out.probe_pools.clear();
    for (const auto& [name, value] : cfg.at("pools").items())
      out.probe_pools.push_back({name, detail::pool_from(value, base).utterances()});
  }
  return out;
}

// One experiment run by the CLI. Keys beyond load_world's:
//   policies, policy, persona, n_dialogues, n_exchanges, k, n_facts, opening,
//   planner, seed, threads, output {path, format}
struct Experiment {
  World world;
  std::vector<Policy> policies{Policy::discovery, Policy::random};
  Policy policy = Policy::discovery;
  std::optional<std::vector<FactId>> persona;
  std::size_t n_dialogues = 200;
  std::size_t k = 3;
  std::optional<std::size_t> n_facts;  // probe: defaults to the whole universe
  DialogueConfig dialogue;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> output;
  std::optional<ReportFormat> format;
};

inline Experiment parse_experiment(const json& cfg, const std::filesystem::path& base) {
  Experiment e;
  e.world = load_world(cfg, base);
  detail::with_parse_context("experiment", [&] {
    if (cfg.contains("policies")) {
      e.policies.clear();
      for (const auto& p : cfg.at("policies")) e.policies.push_back(parse_policy(p.get<std::string>()));
    }
    if (cfg.contains("policy")) e.policy = parse_policy(cfg.at("policy").get<std::string>());
    if (cfg.contains("persona")) e.persona = cfg.at("persona").get<std::vector<FactId>>();
    e.n_dialogues = cfg.value("n_dialogues", e.n_dialogues);
    e.k = cfg.value("k", e.k);
    if (cfg.contains("n_facts")) e.n_facts = cfg.at("n_facts").get<std::size_t>();
    e.dialogue.n_exchanges = cfg.value("n_exchanges", e.dialogue.n_exchanges);
    const auto opening = cfg.value("opening", std::string("bot"));
    if (opening != "bot" && opening != "human") throw invalid_config("opening must be \"bot\" or \"human\"");
    e.dialogue.opening = opening == "human" ? Speaker::human : Speaker::bot;
    if (cfg.contains("planner")) e.dialogue.planner = parse_planner(cfg.at("planner"));
    e.seed = cfg.value("seed", e.seed);
    e.threads = cfg.value("threads", e.threads);
    if (cfg.contains("output")) {
      const auto& out = cfg.at("output");
      if (out.contains("path")) e.output = detail::resolve(base, out.at("path").get<std::string>());
      if (out.contains("format")) e.format = parse_report_format(out.at("format").get<std::string>());
    }
    return 0;
  });
  return e;
}

inline Experiment load_experiment(const std::filesystem::path& path) {
  return parse_experiment(read_json_file(path), path.parent_path());
}

}  // namespace discovery
