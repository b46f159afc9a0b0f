#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "discovery/session.hpp"

namespace discovery {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::io: return 500;
    default: return 400;
  }
}

// JSON-over-HTTP front end for a SessionManager.
//
//   POST /sessions               {k, mode?, responder_config_id?}   -> 201
//   POST /sessions/{id}/reply    {choice_id} | {text}
//   GET  /sessions/{id}
//   POST /sessions/{id}/guess    {m?}  (default 3)
//   POST /sessions/{id}/end
//   GET  /universe[?responder=id]
//   GET  /health
//
// Errors are {"error": code, "message": text}. All responses allow any origin.
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions) : sessions_(sessions) { routes(); }

  httplib::Server& server() { return server_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  using Handler = std::function<json(const httplib::Request&, httplib::Response&)>;

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static json error_body(const std::string& code, const std::string& message) {
    return {{"error", code}, {"message", message}};
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      auto j = json::parse(req.body);
      if (!j.is_object()) throw Error(ErrorCode::parse, "request body must be a JSON object");
      return j;
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse, std::string("malformed JSON body: ") + e.what());
    }
  }

  // Wraps a handler with uniform error payloads.
  static httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
    return [h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, ok_status, h(req, res));
      } catch (const Error& e) {
        send(res, http_status(e.code()), error_body(to_string(e.code()), e.what()));
      } catch (const json::exception& e) {
        send(res, 400, error_body("invalid_input", e.what()));
      } catch (const std::exception& e) {
        send(res, 500, error_body("internal", e.what()));
      }
    };
  }

  const World& world_of(const SessionState& s) const { return sessions_.world(s.responder_id); }

  void routes() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    server_.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server_.Get("/health", wrap([](const auto&, auto&) { return json{{"status", "ok"}}; }));

    server_.Get("/universe", wrap([this](const httplib::Request& req, auto&) {
      const auto id = req.has_param("responder") ? req.get_param_value("responder")
                                                 : sessions_.config().default_responder;
      json out = universe_to_json(sessions_.world(id).universe);
      out["responder"] = id;
      return out;
    }));

    server_.Post("/sessions", wrap(
                                  [this](const httplib::Request& req, auto&) {
                                    const json body = body_of(req);
                                    CreateRequest cr;
                                    if (!body.contains("k")) throw invalid_input("k is required");
                                    const auto& k = body.at("k");
                                    if (!k.is_number_integer() || k.get<long long>() < 1)
                                      throw invalid_input("k must be a positive integer");
                                    cr.k = k.get<std::size_t>();
                                    if (body.contains("mode")) cr.mode = parse_session_mode(body.at("mode").get<std::string>());
                                    if (body.contains("responder_config_id"))
                                      cr.responder_id = body.at("responder_config_id").get<std::string>();
                                    const auto s = sessions_.create(cr);
                                    json out = {{"session_id", s->id},
                                                {"mode", to_string(s->mode)},
                                                {"k", s->k},
                                                {"opening_question", s->pending_question},
                                                {"created", s->created}};
                                    if (s->mode == SessionMode::structured)
                                      out["reply_options"] = reply_options_to_json(s->reply_options);
                                    return out;
                                  },
                                  201));

    server_.Post("/sessions/:id/reply", wrap([this](const httplib::Request& req, auto&) {
      const json body = body_of(req);
      Reply r;
      if (body.contains("choice_id")) {
        const auto& c = body.at("choice_id");
        if (!c.is_number_integer() || c.get<long long>() < 0) throw invalid_input("choice_id must be a nonnegative integer");
        r.choice_id = c.get<std::size_t>();
      }
      if (body.contains("text")) r.text = body.at("text").get<std::string>();
      const auto s = sessions_.reply(req.path_params.at("id"), r);
      const auto& w = world_of(*s);
      json out = {{"belief", to_json(snapshot_of(s->belief, sessions_.config().top_m), w.universe)},
                  {"next_question", s->pending_question}};
      if (s->mode == SessionMode::structured) out["reply_options"] = reply_options_to_json(s->reply_options);
      return out;
    }));

    server_.Get("/sessions/:id", wrap([this](const httplib::Request& req, auto&) {
      const auto s = sessions_.get(req.path_params.at("id"));
      return session_to_json(*s, world_of(*s), sessions_.config().top_m);
    }));

    server_.Post("/sessions/:id/guess", wrap([this](const httplib::Request& req, auto&) {
      const json body = body_of(req);
      const long long m = body.value("m", 3LL);
      if (m < 1) throw invalid_input("m must be >= 1");
      const auto& id = req.path_params.at("id");
      const auto s = sessions_.get(id);
      return json{{"session_id", id},
                  {"top_subsets",
                   subsets_to_json(sessions_.guess(id, static_cast<std::size_t>(m)), world_of(*s).universe)}};
    }));

    server_.Post("/sessions/:id/end", wrap([this](const httplib::Request& req, auto&) {
      const auto s = sessions_.end(req.path_params.at("id"));
      return json{{"session_id", s->id},
                  {"final_score", discovery_score(s->belief)},
                  {"transcript", history_to_json(s->history)},
                  {"ended", s->updated}};
    }));
  }

  SessionManager& sessions_;
  httplib::Server server_;
};

}  // namespace discovery
