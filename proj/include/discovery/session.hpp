#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "discovery/belief.hpp"
#include "discovery/config.hpp"
#include "discovery/free_text.hpp"
#include "discovery/planner.hpp"

namespace discovery {

enum class SessionMode { structured, freetext };

inline const char* to_string(SessionMode m) { return m == SessionMode::structured ? "structured" : "freetext"; }

inline SessionMode parse_session_mode(const std::string& s) {
  if (s == "structured") return SessionMode::structured;
  if (s == "freetext") return SessionMode::freetext;
  throw invalid_input("mode must be \"structured\" or \"freetext\"");
}

inline std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

struct BeliefSnapshot {
  std::vector<double> marginals;
  double entropy = 0.0;
  double discovery_score = 0.0;
  std::vector<SubsetProbability> top_subsets;
  std::size_t exchanges = 0;
};

inline BeliefSnapshot snapshot_of(const BeliefState& belief, std::size_t top_m) {
  return {fact_marginals(belief), belief.posterior_entropy(), discovery_score(belief), top_subsets(belief, top_m),
          belief.exchanges()};
}

inline json subsets_to_json(const std::vector<SubsetProbability>& subsets, const FactUniverse& universe) {
  json out = json::array();
  for (const auto& s : subsets) {
    json facts = json::array();
    for (FactId f : s.subset) facts.push_back(universe[f].text);
    out.push_back({{"subset", s.subset}, {"facts", facts}, {"probability", s.probability}});
  }
  return out;
}

inline json to_json(const BeliefSnapshot& s, const FactUniverse& universe) {
  return {{"marginals", s.marginals},
          {"entropy", s.entropy},
          {"discovery_score", s.discovery_score},
          {"top_subsets", subsets_to_json(s.top_subsets, universe)},
          {"exchanges", s.exchanges}};
}

inline json history_to_json(const DialogueHistory& h) {
  json turns = json::array();
  for (const auto& u : h.turns()) turns.push_back({{"speaker", to_string(u.speaker)}, {"text", u.text}});
  return turns;
}

struct ServiceConfig {
  std::map<std::string, World> responders;
  std::string default_responder = "default";
  PlannerParams planner;
  FreeTextScorer scorer;
  std::uint64_t seed = 0;
  std::size_t top_m = 5;
  std::optional<std::filesystem::path> log_path;
};

// {"responders": {"id": {<world config>}, ...}, "default_responder": "id",
//  "planner": {...}, "seed": 0, "top_m": 5, "log_path": "sessions.jsonl",
//  "freetext": {"echo_damping": 1.0}}
inline ServiceConfig parse_service_config(const json& j, const std::filesystem::path& base) {
  ServiceConfig cfg;
  if (!j.contains("responders") || !j.at("responders").is_object() || j.at("responders").empty())
    throw invalid_config("service config needs a non-empty \"responders\" object");
  for (const auto& [id, world] : j.at("responders").items()) {
    World w = load_world(world, base);
    if (!w.pool) throw invalid_config("responder \"" + id + "\" has no candidate pool");
    cfg.responders.emplace(id, std::move(w));
  }
  detail::with_parse_context("service config", [&] {
    cfg.default_responder = j.value("default_responder", cfg.responders.begin()->first);
    if (j.contains("planner")) cfg.planner = parse_planner(j.at("planner"));
    cfg.seed = j.value("seed", cfg.seed);
    cfg.top_m = j.value("top_m", cfg.top_m);
    if (j.contains("log_path")) cfg.log_path = detail::resolve(base, j.at("log_path").get<std::string>());
    if (j.contains("freetext")) cfg.scorer.echo_damping = j.at("freetext").value("echo_damping", 1.0);
    return 0;
  });
  if (!cfg.responders.contains(cfg.default_responder))
    throw invalid_config("default responder \"" + cfg.default_responder + "\" is not configured");
  return cfg;
}

// Immutable view of one live dialogue. A new value replaces the old one on
// every mutation, so readers always see a consistent snapshot.
struct SessionState {
  std::string id;
  std::string responder_id;
  SessionMode mode = SessionMode::structured;
  std::size_t k = 1;
  BeliefState belief{2, 1};
  DialogueHistory history;  // completed exchanges only
  std::string pending_question;
  std::vector<std::string> reply_options;  // structured mode
  std::string created;
  std::string updated;
  bool ended = false;
  std::uint64_t seed = 0;
};

struct CreateRequest {
  std::size_t k = 1;
  SessionMode mode = SessionMode::structured;
  std::optional<std::string> responder_id;
};

struct Reply {
  std::optional<std::size_t> choice_id;
  std::optional<std::string> text;
};

class SessionManager {
 public:
  explicit SessionManager(ServiceConfig cfg) : cfg_(std::move(cfg)), id_rng_(std::random_device{}()) {}

  const ServiceConfig& config() const { return cfg_; }

  const World& world(const std::string& responder_id) const {
    const auto it = cfg_.responders.find(responder_id);
    if (it == cfg_.responders.end()) throw invalid_input("unknown responder_config_id \"" + responder_id + "\"");
    return it->second;
  }

  std::shared_ptr<const SessionState> create(const CreateRequest& req) {
    const std::string responder_id = req.responder_id.value_or(cfg_.default_responder);
    const World& w = world(responder_id);
    const std::size_t n = w.universe.size();
    if (req.k < 1) throw invalid_input("k must be >= 1");
    if (req.k >= n) throw invalid_input("k must be < universe size");
    if (req.mode == SessionMode::structured && !w.model->response_support("").has_value())
      throw invalid_input("responder \"" + responder_id + "\" has no finite reply set for structured mode");

    auto state = std::make_shared<SessionState>();
    state->responder_id = responder_id;
    state->mode = req.mode;
    state->k = req.k;
    state->belief = BeliefState(n, req.k);
    // Force the capacity check now rather than on the first reply.
    (void)state->belief.posterior();
    state->created = state->updated = iso8601_now();

    auto session = std::make_shared<Session>();
    {
      std::unique_lock lock(sessions_mutex_);
      do {
        state->id = new_id();
      } while (sessions_.contains(state->id));
      state->seed = derive_seed(cfg_.seed, {counter_++});
      sessions_.emplace(state->id, session);
    }
    ask_next(*state, w);
    session->publish(state);
    return state;
  }

  std::shared_ptr<const SessionState> reply(const std::string& id, const Reply& reply) {
    auto session = find(id);
    std::lock_guard write(session->write_mutex);
    const auto current = session->current();
    if (current->ended) throw Error(ErrorCode::conflict, "session " + id + " has ended");
    const World& w = world(current->responder_id);

    std::string t;
    std::vector<double> lik;
    if (current->mode == SessionMode::structured) {
      if (!reply.choice_id) throw invalid_input("structured sessions require choice_id");
      if (*reply.choice_id >= current->reply_options.size())
        throw invalid_input("choice_id " + std::to_string(*reply.choice_id) + " out of range (0.." +
                            std::to_string(current->reply_options.size() - 1) + ")");
      t = current->reply_options[*reply.choice_id];
      lik = w.model->likelihood_vector(current->pending_question, t);
    } else {
      if (!reply.text || reply.text->empty()) throw invalid_input("freetext sessions require non-empty text");
      t = *reply.text;
      lik = cfg_.scorer.likelihood_vector(w.universe, current->pending_question, t);
    }

    auto next = std::make_shared<SessionState>(*current);
    next->belief = current->belief.update(single_turn_weights(lik));
    next->history.append({Speaker::bot, current->pending_question});
    next->history.append({Speaker::human, t});
    next->updated = iso8601_now();
    ask_next(*next, w);
    session->publish(next);
    return next;
  }

  std::shared_ptr<const SessionState> get(const std::string& id) const { return find(id)->current(); }

  std::vector<SubsetProbability> guess(const std::string& id, std::size_t m) const {
    if (m < 1) throw invalid_input("m must be >= 1");
    return top_subsets(get(id)->belief, m);
  }

  // Freezes the session and appends its transcript to the log.
  std::shared_ptr<const SessionState> end(const std::string& id) {
    auto session = find(id);
    std::lock_guard write(session->write_mutex);
    const auto current = session->current();
    if (current->ended) throw Error(ErrorCode::conflict, "session " + id + " has already ended");
    auto next = std::make_shared<SessionState>(*current);
    next->ended = true;
    next->updated = iso8601_now();
    if (cfg_.log_path) append_log(log_record(*next));
    session->publish(next);
    return next;
  }

  json log_record(const SessionState& s) const {
    return {{"session_id", s.id},
            {"responder", s.responder_id},
            {"mode", to_string(s.mode)},
            {"k", s.k},
            {"created", s.created},
            {"ended", s.updated},
            {"turns", history_to_json(s.history)},
            {"final_score", discovery_score(s.belief)}};
  }

  // Rebuilds the belief from a logged transcript.
  BeliefState replay(const json& record) const {
    const World& w = world(record.at("responder").get<std::string>());
    const auto mode = parse_session_mode(record.at("mode").get<std::string>());
    BeliefState b(w.universe.size(), record.at("k").get<std::size_t>());
    const auto& turns = record.at("turns");
    for (std::size_t i = 0; i + 1 < turns.size(); i += 2) {
      const auto s = turns[i].at("text").get<std::string>();
      const auto t = turns[i + 1].at("text").get<std::string>();
      const auto lik = mode == SessionMode::structured ? w.model->likelihood_vector(s, t)
                                                       : cfg_.scorer.likelihood_vector(w.universe, s, t);
      b = b.update(single_turn_weights(lik));
    }
    return b;
  }

 private:
  struct Session {
    std::mutex write_mutex;  // serializes mutations
    mutable std::mutex state_mutex;
    std::shared_ptr<const SessionState> state;

    std::shared_ptr<const SessionState> current() const {
      std::lock_guard lock(state_mutex);
      return state;
    }
    void publish(std::shared_ptr<const SessionState> s) {
      std::lock_guard lock(state_mutex);
      state = std::move(s);
    }
  };

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::not_found, "no session " + id);
    return it->second;
  }

  std::string new_id() {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_rng_()));
    return buf;
  }

  void ask_next(SessionState& s, const World& w) const {
    PlannerParams p = cfg_.planner;
    p.seed = derive_seed(s.seed, {s.belief.exchanges()});
    s.pending_question = select_response(s.belief, *w.model, *w.pool, p).chosen;
    s.reply_options.clear();
    if (s.mode == SessionMode::structured) s.reply_options = w.model->response_support(s.pending_question).value();
  }

  void append_log(const json& record) {
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*cfg_.log_path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot append to " + cfg_.log_path->string());
    out << record.dump() << "\n";
  }

  ServiceConfig cfg_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 id_rng_;
  std::uint64_t counter_ = 0;
  std::mutex log_mutex_;
};

inline json reply_options_to_json(const std::vector<std::string>& options) {
  json out = json::array();
  for (std::size_t i = 0; i < options.size(); ++i) out.push_back({{"choice_id", i}, {"text", options[i]}});
  return out;
}

inline json session_to_json(const SessionState& s, const World& w, std::size_t top_m) {
  json out = {{"session_id", s.id},
              {"responder", s.responder_id},
              {"mode", to_string(s.mode)},
              {"k", s.k},
              {"created", s.created},
              {"updated", s.updated},
              {"ended", s.ended},
              {"history", history_to_json(s.history)},
              {"belief", to_json(snapshot_of(s.belief, top_m), w.universe)}};
  if (!s.ended) {
    out["pending_question"] = s.pending_question;
    if (s.mode == SessionMode::structured) out["reply_options"] = reply_options_to_json(s.reply_options);
  }
  return out;
}

}  // namespace discovery
