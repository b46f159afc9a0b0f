#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "discovery/config.hpp"
#include "discovery/http_service.hpp"
#include "discovery/report.hpp"
#include "discovery/session.hpp"
#include "discovery/simulation.hpp"

namespace discovery {

namespace detail {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<std::size_t> threads;
};

inline void emit(const std::string& content, const CommonFlags& flags, std::ostream& out) {
  if (flags.out.empty()) out << content;
  else write_file(flags.out, content);
}

inline ReportFormat choose_format(const CommonFlags& flags, const Experiment& e, ReportFormat fallback) {
  if (!flags.format.empty()) return parse_report_format(flags.format);
  if (e.format) return *e.format;
  if (!flags.out.empty()) return format_for_path(flags.out);
  return fallback;
}

inline json validation_report(const std::string& kind, const std::function<json()>& check) {
  try {
    json r = check();
    r["kind"] = kind;
    r["valid"] = true;
    return r;
  } catch (const Error& e) {
    return {{"kind", kind}, {"valid", false}, {"error", to_string(e.code())}, {"message", e.what()}};
  }
}

}  // namespace detail

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Discovery-oriented dialogue engine: persona belief tracking and information-seeking replies"};
  app.require_subcommand(1);

  detail::CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", flags.seed, "Override the config seed");
    sub->add_option("--out", flags.out, "Output file (stdout if omitted)");
    sub->add_option("--format", flags.format, "json, csv or jsonl (default from --out extension)");
    sub->add_option("--threads", flags.threads, "Worker threads");
  };
  auto* simulate = app.add_subcommand("simulate", "Run one bot-vs-simulated-human dialogue");
  add_common(simulate);
  std::string policy_flag;
  simulate->add_option("--policy", policy_flag, "discovery, random or fixed-order");
  auto* probe = app.add_subcommand("probe", "Single-probe persona detection accuracy per pool");
  add_common(probe);
  auto* compare = app.add_subcommand("compare", "Compare policies on matched dialogue sets");
  add_common(compare);

  auto* serve = app.add_subcommand("serve", "HTTP session service for live play");
  std::string serve_config, bind, log_path;
  serve->add_option("--config", serve_config, "Service config (JSON)")->required();
  serve->add_option("--bind", bind, "host:port (default $DISCOVERY_BIND or 127.0.0.1:8080)");
  serve->add_option("--log", log_path, "Transcript log (default $DISCOVERY_LOG or config log_path)");

  auto* validate = app.add_subcommand("validate", "Check world, responder, pool and universe files");
  std::string v_world, v_responder, v_pool, v_universe, v_config;
  validate->add_option("--world", v_world, "Tabular world file");
  validate->add_option("--responder", v_responder, "Grounded responder config");
  validate->add_option("--pool", v_pool, "Candidate pool (JSON array or text)");
  validate->add_option("--universe", v_universe, "Fact universe");
  validate->add_option("--config", v_config, "Experiment config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  // Load phase: failures are configuration errors.
  std::optional<Experiment> experiment;
  if (!flags.config.empty() && !serve->parsed() && !validate->parsed()) {
    try {
      experiment = load_experiment(flags.config);
      if (flags.seed) experiment->seed = *flags.seed;
      if (flags.threads) experiment->threads = *flags.threads;
      if (!policy_flag.empty()) experiment->policy = parse_policy(policy_flag);
      if (flags.out.empty() && experiment->output) flags.out = experiment->output->string();
    } catch (const std::exception& e) {
      err << "error: " << flags.config << ": " << e.what() << "\n";
      return 1;
    }
  }

  try {
    if (simulate->parsed()) {
      auto& e = *experiment;
      if (!e.world.pool) throw invalid_config("simulate needs a candidate pool");
      const std::size_t n = e.world.universe.size();
      Persona persona;
      if (e.persona) {
        persona = Persona(*e.persona, n);
      } else {
        auto rng = make_stream(e.seed, {10, 0});
        persona = Persona(sample_subset(rng, n, e.k), n);
      }
      e.dialogue.planner.threads = e.threads;
      const auto result = run_dialogue(e.policy, *e.world.model, *e.world.pool, persona, e.dialogue, e.seed);
      detail::emit(render(to_table(result), detail::choose_format(flags, e, ReportFormat::jsonl)), flags, out);
    } else if (probe->parsed()) {
      auto& e = *experiment;
      if (e.world.probe_pools.empty()) throw invalid_config("probe needs named probe pools");
      const auto results = probe_experiment(e.world.probe_pools, *e.world.model,
                                                e.n_facts.value_or(e.world.universe.size()), e.k, e.seed);
      detail::emit(render(to_table(results), detail::choose_format(flags, e, ReportFormat::csv)), flags, out);
    } else if (compare->parsed()) {
      auto& e = *experiment;
      if (!e.world.pool) throw invalid_config("compare needs a candidate pool");
      const auto report = policy_comparison(e.policies, *e.world.model, *e.world.pool, e.k, e.n_dialogues,
                                            e.dialogue, e.seed, e.threads);
      detail::emit(render(to_table(report), detail::choose_format(flags, e, ReportFormat::csv)), flags, out);
    } else if (serve->parsed()) {
      ServiceConfig cfg;
      try {
        const std::filesystem::path path(serve_config);
        cfg = parse_service_config(read_json_file(path), path.parent_path());
      } catch (const std::exception& e) {
        err << "error: " << serve_config << ": " << e.what() << "\n";
        return 1;
      }
      if (const char* env = std::getenv("DISCOVERY_LOG"); env && log_path.empty()) log_path = env;
      if (!log_path.empty()) cfg.log_path = log_path;
      if (const char* env = std::getenv("DISCOVERY_BIND"); env && bind.empty()) bind = env;
      if (bind.empty()) bind = "127.0.0.1:8080";
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) {
        err << "error: --bind must be host:port\n";
        return 1;
      }
      SessionManager sessions(std::move(cfg));
      HttpService service(sessions);
      err << "listening on " << bind << "\n";
      if (!service.listen(bind.substr(0, colon), std::stoi(bind.substr(colon + 1)))) {
        err << "error: cannot listen on " << bind << "\n";
        return 2;
      }
    } else if (validate->parsed()) {
      json reports = json::array();
      std::optional<std::size_t> n;
      if (!v_universe.empty())
        reports.push_back(detail::validation_report("universe", [&] {
          const auto u = load_universe(v_universe);
          n = u.size();
          return json{{"path", v_universe}, {"facts", u.size()}};
        }));
      if (!v_world.empty())
        reports.push_back(detail::validation_report("world", [&] {
          const auto w = load_tabular_world(v_world);
          if (n && *n != w.universe_size())
            throw invalid_config("world models " + std::to_string(w.universe_size()) + " facts, universe has " +
                                 std::to_string(*n));
          double worst = 0.0;
          for (std::size_t s = 0; s < w.probes().size(); ++s)
            for (FactId f = 0; f < w.universe_size(); ++f) {
              double total = 0.0;
              for (std::size_t t = 0; t < w.responses().size(); ++t) total += w.probability(s, t, f);
              worst = std::max(worst, std::abs(total - 1.0));
            }
          return json{{"path", v_world},
                      {"probes", w.probes().size()},
                      {"responses", w.responses().size()},
                      {"facts", w.universe_size()},
                      {"max_row_error", worst}};
        }));
      if (!v_responder.empty())
        reports.push_back(detail::validation_report("responder", [&] {
          const auto r = load_grounded_responder(v_responder, n);
          return json{{"path", v_responder},
                      {"probes", r.config().probes.size()},
                      {"responses", r.all_responses().size()},
                      {"facts", r.universe_size()}};
        }));
      if (!v_pool.empty())
        reports.push_back(detail::validation_report("pool", [&] {
          const auto p = load_candidate_pool(v_pool);
          return json{{"path", v_pool}, {"utterances", p.size()}, {"duplicates_removed", p.duplicates_removed()}};
        }));
      if (!v_config.empty())
        reports.push_back(detail::validation_report("config", [&] {
          const auto e = load_experiment(v_config);
          return json{{"path", v_config}, {"facts", e.world.universe.size()}};
        }));
      if (reports.empty()) {
        err << "error: validate needs at least one of --world, --responder, --pool, --universe, --config\n"
            << validate->help();
        return 1;
      }
      out << reports.dump(2) << "\n";
      for (const auto& r : reports)
        if (!r.at("valid").get<bool>()) return 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace discovery
