#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "discovery/http_service.hpp"
#include "discovery/session.hpp"

using namespace discovery;

namespace {

World make_world(std::vector<std::string> facts, std::vector<std::string> probes, std::vector<std::string> responses,
                 std::vector<std::vector<std::vector<double>>> table) {
  World w{FactUniverse::from_texts(facts), nullptr, std::nullopt, {}};
  w.pool = CandidatePool(probes);
  w.model = std::make_shared<TabularWorld>(std::move(probes), std::move(responses), std::move(table));
  return w;
}

// "pair": two facts, one probe answered 9:1, one flat probe.
// "flat": the flat probe alone.
// "trio": three facts answered 0.5 / 0.3 / 0.2.
ServiceConfig test_config() {
  ServiceConfig cfg;
  cfg.responders.emplace("pair", make_world({"likes cats", "likes dogs"}, {"cats or dogs?", "how are you?"},
                                            {"cats", "dogs"},
                                            {{{0.9, 0.1}, {0.1, 0.9}}, {{0.5, 0.5}, {0.5, 0.5}}}));
  cfg.responders.emplace("flat",
                         make_world({"likes cats", "likes dogs"}, {"how are you?"}, {"fine", "great"},
                                    {{{0.5, 0.5}, {0.5, 0.5}}}));
  cfg.responders.emplace("trio", make_world({"plays chess", "runs marathons", "keeps bees"}, {"weekend plans?"},
                                            {"board games", "outdoors"},
                                            {{{0.5, 0.3, 0.2}, {0.5, 0.7, 0.8}}}));
  cfg.default_responder = "pair";
  cfg.planner.n_rollouts = 20;
  cfg.seed = 7;
  return cfg;
}

CreateRequest request(std::size_t k, std::string responder, SessionMode mode = SessionMode::structured) {
  return {k, mode, std::move(responder)};
}

std::size_t choice_of(const SessionState& s, const std::string& text) {
  for (std::size_t i = 0; i < s.reply_options.size(); ++i)
    if (s.reply_options[i] == text) return i;
  throw std::runtime_error("no reply option " + text);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::io;
}

}  // namespace

TEST(Session, CreateStructuredGivesIdAndReplyOptions) {
  ServiceConfig cfg = test_config();
  cfg.responders.emplace("wide", make_world({"a", "b", "c", "d", "e"}, {"q?"}, {"x", "y"},
                                            {{{1, 1, 1, 0, 0}, {0, 0, 0, 1, 1}}}));
  SessionManager m(cfg);
  const auto s = m.create(request(3, "wide"));
  EXPECT_FALSE(s->id.empty());
  EXPECT_GE(s->reply_options.size(), 1u);
  EXPECT_EQ(s->pending_question, "q?");
  EXPECT_EQ(s->k, 3u);
}

TEST(Session, CreateRejectsKNotBelowUniverseSize) {
  SessionManager m(test_config());
  EXPECT_EQ(code_of([&] { m.create(request(2, "pair")); }), ErrorCode::invalid_input);
  EXPECT_EQ(code_of([&] { m.create(request(0, "pair")); }), ErrorCode::invalid_input);
  EXPECT_EQ(code_of([&] { m.create(request(1, "nobody")); }), ErrorCode::invalid_input);
}

TEST(Session, IdsAreDistinct) {
  SessionManager m(test_config());
  std::set<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.insert(m.create(request(1, "pair"))->id);
  EXPECT_EQ(ids.size(), 50u);
}

TEST(Session, GetAfterCreateHasEmptyHistoryAndZeroScore) {
  SessionManager m(test_config());
  const auto id = m.create(request(1, "pair"))->id;
  const auto s = m.get(id);
  EXPECT_TRUE(s->history.turns().empty());
  EXPECT_EQ(discovery_score(s->belief), 0.0);
  EXPECT_FALSE(s->ended);
}

TEST(Session, OpeningQuestionIsTheInformativeProbe) {
  SessionManager m(test_config());
  EXPECT_EQ(m.create(request(1, "pair"))->pending_question, "cats or dogs?");
}

TEST(Session, NineToOneReplyMovesMarginals) {
  SessionManager m(test_config());
  const auto s0 = m.create(request(1, "pair"));
  const auto s1 = m.reply(s0->id, {choice_of(*s0, "cats"), std::nullopt});
  const auto marg = fact_marginals(s1->belief);
  EXPECT_NEAR(marg[0], 0.9, 1e-12);
  EXPECT_NEAR(marg[1], 0.1, 1e-12);
  EXPECT_NEAR(discovery_score(s1->belief), 0.3680642071684971, 1e-12);
  ASSERT_EQ(s1->history.turns().size(), 2u);
  EXPECT_EQ(s1->history.turns()[0].text, "cats or dogs?");
  EXPECT_EQ(s1->history.turns()[1].text, "cats");
}

TEST(Session, UninformativeReplyLeavesEntropyUnchanged) {
  SessionManager m(test_config());
  const auto s0 = m.create(request(1, "flat"));
  const auto s1 = m.reply(s0->id, {0, std::nullopt});
  EXPECT_EQ(s1->belief.posterior_entropy(), s0->belief.posterior_entropy());
  EXPECT_EQ(discovery_score(s1->belief), 0.0);
}

TEST(Session, GuessReturnsTopSubsetsInDescendingOrder) {
  SessionManager m(test_config());
  const auto s0 = m.create(request(2, "trio"));
  m.reply(s0->id, {choice_of(*s0, "board games"), std::nullopt});
  const auto g = m.guess(s0->id, 3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].subset, (std::vector<FactId>{0, 1}));
  EXPECT_EQ(g[1].subset, (std::vector<FactId>{0, 2}));
  EXPECT_EQ(g[2].subset, (std::vector<FactId>{1, 2}));
  EXPECT_NEAR(g[0].probability, 0.40, 1e-12);
  EXPECT_NEAR(g[1].probability, 0.35, 1e-12);
  EXPECT_NEAR(g[2].probability, 0.25, 1e-12);
}

TEST(Session, EndTwiceIsConflict) {
  SessionManager m(test_config());
  const auto id = m.create(request(1, "pair"))->id;
  EXPECT_TRUE(m.end(id)->ended);
  EXPECT_EQ(code_of([&] { m.end(id); }), ErrorCode::conflict);
  EXPECT_EQ(code_of([&] { m.reply(id, {0, std::nullopt}); }), ErrorCode::conflict);
}

TEST(Session, UnknownIdIsNotFound) {
  SessionManager m(test_config());
  EXPECT_EQ(code_of([&] { m.get("missing"); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { m.reply("missing", {0, std::nullopt}); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { m.end("missing"); }), ErrorCode::not_found);
}

TEST(Session, WrongReplyKindIsInvalidInput) {
  SessionManager m(test_config());
  const auto structured = m.create(request(1, "pair"))->id;
  EXPECT_EQ(code_of([&] { m.reply(structured, {std::nullopt, "cats"}); }), ErrorCode::invalid_input);
  EXPECT_EQ(code_of([&] { m.reply(structured, {9, std::nullopt}); }), ErrorCode::invalid_input);
  const auto freetext = m.create(request(1, "pair", SessionMode::freetext))->id;
  EXPECT_EQ(code_of([&] { m.reply(freetext, {0, std::nullopt}); }), ErrorCode::invalid_input);
  EXPECT_EQ(m.get(structured)->history.turns().size(), 0u);
}

TEST(Session, FreetextReplyUsesScorer) {
  const ServiceConfig cfg = test_config();
  SessionManager m(cfg);
  const auto s0 = m.create(request(1, "pair", SessionMode::freetext));
  EXPECT_TRUE(s0->reply_options.empty());
  const auto s1 = m.reply(s0->id, {std::nullopt, "i really like cats"});
  const auto& w = cfg.responders.at("pair");
  const auto expected =
      BeliefState(2, 1).update(single_turn_weights(cfg.scorer.likelihood_vector(w.universe, s0->pending_question,
                                                                                "i really like cats")));
  EXPECT_NEAR(fact_marginals(s1->belief)[0], fact_marginals(expected)[0], 1e-12);
  EXPECT_GT(fact_marginals(s1->belief)[0], 0.5);
}

TEST(Session, ConcurrentRepliesAreSerialized) {
  SessionManager m(test_config());
  for (int round = 0; round < 20; ++round) {
    const auto id = m.create(request(1, "pair"))->id;
    std::vector<std::jthread> writers;
    for (int i = 0; i < 4; ++i)
      writers.emplace_back([&] { m.reply(id, {0, std::nullopt}); });
    std::jthread reader([&] {
      for (int i = 0; i < 50; ++i) {
        const auto s = m.get(id);
        EXPECT_EQ(s->history.turns().size(), 2 * s->belief.exchanges());
      }
    });
    writers.clear();
    reader.join();
    const auto s = m.get(id);
    const auto& turns = s->history.turns();
    ASSERT_EQ(turns.size(), 8u);
    for (std::size_t i = 1; i < turns.size(); ++i) EXPECT_NE(turns[i].speaker, turns[i - 1].speaker);
    EXPECT_EQ(s->belief.exchanges(), 4u);
  }
}

TEST(Session, LogReplayReproducesFinalScore) {
  const auto log = std::filesystem::temp_directory_path() / ("session_replay_" + std::to_string(::getpid()) + ".jsonl");
  std::filesystem::remove(log);
  ServiceConfig cfg = test_config();
  cfg.log_path = log;
  SessionManager m(cfg);
  auto s = m.create(request(1, "pair"));
  for (std::size_t choice : {0, 0, 1, 0}) s = m.reply(s->id, {choice, std::nullopt});
  const auto ended = m.end(s->id);
  const auto f = m.create(request(1, "pair", SessionMode::freetext));
  m.reply(f->id, {std::nullopt, "dogs are great"});
  m.end(f->id);

  std::ifstream in(log);
  std::string line;
  std::vector<json> records;
  while (std::getline(in, line)) records.push_back(json::parse(line));
  ASSERT_EQ(records.size(), 2u);
  for (const auto& r : records) {
    const auto replayed = m.replay(r);
    EXPECT_NEAR(discovery_score(replayed), r.at("final_score").get<double>(), 1e-9);
    EXPECT_NEAR(discovery_score(replayed), discovery_score(m.get(r.at("session_id"))->belief), 1e-9);
  }
  EXPECT_EQ(records[0].at("turns").size(), 8u);
  EXPECT_EQ(records[0].at("session_id"), ended->id);
  std::filesystem::remove(log);
}

namespace {

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    manager_ = std::make_unique<SessionManager>(cfg_);
    service_ = std::make_unique<HttpService>(*manager_);
    port_ = service_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::jthread([this] { service_->listen_after_bind(); });
    service_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    service_->stop();
    thread_.join();
  }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) throw std::runtime_error("request failed");
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto res = client_->Get(path);
    if (!res) throw std::runtime_error("request failed");
    return {res->status, json::parse(res->body)};
  }

  ServiceConfig cfg_ = test_config();
  std::unique_ptr<SessionManager> manager_;
  std::unique_ptr<HttpService> service_;
  std::unique_ptr<httplib::Client> client_;
  std::jthread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(HttpFixture, HealthAndUniverse) {
  EXPECT_EQ(get("/health").second.at("status"), "ok");
  const auto [status, u] = get("/universe?responder=trio");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(u.at("facts").size(), 3u);
  EXPECT_EQ(get("/universe?responder=nobody").first, 400);
}

TEST_F(HttpFixture, ReplySnapshotsMatchDirectComputation) {
  const auto [status, created] = post("/sessions", {{"k", 1}, {"responder_config_id", "pair"}});
  ASSERT_EQ(status, 201);
  const std::string id = created.at("session_id");
  EXPECT_FALSE(created.at("created").get<std::string>().empty());
  std::string question = created.at("opening_question");
  json options = created.at("reply_options");

  const auto& model = *cfg_.responders.at("pair").model;
  BeliefState direct(2, 1);
  for (std::size_t choice : {0, 1, 0, 0}) {
    const std::string reply = options.at(choice).at("text");
    direct = direct.update(single_turn_weights(model.likelihood_vector(question, reply)));
    const auto [code, body] = post("/sessions/" + id + "/reply", {{"choice_id", choice}});
    ASSERT_EQ(code, 200) << body.dump();
    const auto& belief = body.at("belief");
    const auto marg = fact_marginals(direct);
    for (std::size_t f = 0; f < 2; ++f) EXPECT_NEAR(belief.at("marginals")[f].get<double>(), marg[f], 1e-9);
    EXPECT_NEAR(belief.at("entropy").get<double>(), direct.posterior_entropy(), 1e-9);
    EXPECT_NEAR(belief.at("discovery_score").get<double>(), discovery_score(direct), 1e-9);
    question = body.at("next_question");
    options = body.at("reply_options");
  }

  const auto [gs, state] = get("/sessions/" + id);
  EXPECT_EQ(gs, 200);
  EXPECT_EQ(state.at("history").size(), 8u);

  const auto [qs, guess] = post("/sessions/" + id + "/guess", json::object());
  EXPECT_EQ(qs, 200);
  EXPECT_EQ(guess.at("top_subsets").size(), 2u);

  const auto [es, ended] = post("/sessions/" + id + "/end", json::object());
  EXPECT_EQ(es, 200);
  EXPECT_NEAR(ended.at("final_score").get<double>(), discovery_score(direct), 1e-9);
  EXPECT_EQ(ended.at("transcript").size(), 8u);
  EXPECT_EQ(post("/sessions/" + id + "/end", json::object()).first, 409);
}

TEST_F(HttpFixture, ErrorStatuses) {
  EXPECT_EQ(get("/sessions/nope").first, 404);
  EXPECT_EQ(post("/sessions/nope/reply", {{"choice_id", 0}}).first, 404);
  EXPECT_EQ(post("/sessions", {{"k", 2}, {"responder_config_id", "pair"}}).first, 400);
  EXPECT_EQ(post("/sessions", {{"mode", "structured"}}).first, 400);
  const auto [status, created] = post("/sessions", {{"k", 1}});
  ASSERT_EQ(status, 201);
  const std::string id = created.at("session_id");
  const auto [code, err] = post("/sessions/" + id + "/reply", {{"text", "cats"}});
  EXPECT_EQ(code, 400);
  EXPECT_EQ(err.at("error"), "invalid_input");
  auto res = client_->Post("/sessions/" + id + "/reply", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(HttpFixture, CorsPreflight) {
  auto res = client_->Options("/sessions");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}
