#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <cstdlib>
#include <deque>
#include <random>
#include <thread>

#include "guiagent/llm_client.hpp"
#include "guiagent/prompt_gen.hpp"
#include "guiagent/simulator.hpp"
#include "test_support.hpp"

using namespace guiagent;
using nlohmann::json;

namespace {

// Local chat-completions endpoint answering from a queue of (status, body).
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      requests_.push_back(req.body);
      auth_headers_.push_back(req.get_header_value("Authorization"));
      auto [status, body] = script_.empty() ? std::pair{500, std::string("{}")} : script_.front();
      if (!script_.empty()) script_.pop_front();
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  void push(int status, std::string body) { script_.emplace_back(status, std::move(body)); }
  static std::string reply(const std::string& content) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
  }

  HttpConfig config() const {
    HttpConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.api_key = "test-key";
    c.timeout = std::chrono::milliseconds(2000);
    return c;
  }

  std::vector<std::string> requests_;
  std::vector<std::string> auth_headers_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mutex_;
  std::deque<std::pair<int, std::string>> script_;
};

struct SleepLog {
  std::vector<long long> delays;
  HttpChatClient::Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { delays.push_back(d.count()); };
  }
};

LlmErrorKind llm_error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const LlmError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an LlmError";
  return LlmErrorKind::invalid_request;
}

std::string random_text(std::mt19937& rng) {
  const std::vector<std::string> parts = {"a", "Z", " ", "\n", "\"", "\\", "é", "“", "{", "}", "0", "-1", "\t", "☃"};
  std::string s;
  const int n = static_cast<int>(rng() % 20);
  for (int i = 0; i < n; ++i) s += parts[rng() % parts.size()];
  return s;
}

}  // namespace

TEST(CompletionRequest, Validation) {
  CompletionRequest r;
  EXPECT_THROW(r.validate(), LlmError);
  r.prompt = "x";
  EXPECT_NO_THROW(r.validate());
  r.temperature = -1;
  EXPECT_THROW(r.validate(), LlmError);
  r.temperature = 0;
  r.max_reply_tokens = 0;
  EXPECT_THROW(r.validate(), LlmError);
}

TEST(HttpChatClient, SendsChatRequestAndReturnsContent) {
  FakeEndpoint ep;
  ep.push(200, FakeEndpoint::reply("3"));
  HttpChatClient client(ep.config());
  CompletionRequest req{"pick one", 0.0, 64, "gpt-3.5-turbo"};
  EXPECT_EQ(client.complete(req), "3");
  ASSERT_EQ(ep.requests_.size(), 1u);
  auto body = json::parse(ep.requests_[0]);
  EXPECT_EQ(body["model"], "gpt-3.5-turbo");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["max_tokens"], 64);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "pick one");
  EXPECT_EQ(ep.auth_headers_[0], "Bearer test-key");
}

TEST(HttpChatClient, RetriesTransientFailuresWithExponentialBackoff) {
  FakeEndpoint ep;
  ep.push(503, "{}");
  ep.push(429, "{}");
  ep.push(200, FakeEndpoint::reply("ok"));
  SleepLog log;
  HttpChatClient client(ep.config(), log.sleeper());
  EXPECT_EQ(client.complete({"p"}), "ok");
  EXPECT_EQ(client.attempts_made(), 3);
  EXPECT_EQ(log.delays, (std::vector<long long>{500, 1000}));
}

TEST(HttpChatClient, GivesUpAfterThreeAttempts) {
  FakeEndpoint ep;
  for (int i = 0; i < 5; ++i) ep.push(500, "{}");
  SleepLog log;
  HttpChatClient client(ep.config(), log.sleeper());
  EXPECT_EQ(llm_error_kind([&] { client.complete({"p"}); }), LlmErrorKind::network);
  EXPECT_EQ(client.attempts_made(), 3);
  EXPECT_EQ(log.delays.size(), 2u);
}

TEST(HttpChatClient, AuthFailureIsNotRetried) {
  FakeEndpoint ep;
  ep.push(401, "{}");
  SleepLog log;
  HttpChatClient client(ep.config(), log.sleeper());
  EXPECT_EQ(llm_error_kind([&] { client.complete({"p"}); }), LlmErrorKind::auth);
  EXPECT_EQ(client.attempts_made(), 1);
  EXPECT_TRUE(log.delays.empty());
}

TEST(HttpChatClient, MalformedPayloadAndClientErrors) {
  FakeEndpoint ep;
  ep.push(200, R"({"choices": []})");
  ep.push(400, R"({"error": "bad"})");
  HttpChatClient client(ep.config(), SleepLog{}.sleeper());
  EXPECT_EQ(llm_error_kind([&] { client.complete({"p"}); }), LlmErrorKind::bad_response);
  EXPECT_EQ(llm_error_kind([&] { client.complete({"p"}); }), LlmErrorKind::bad_response);
}

TEST(HttpChatClient, UnreachableEndpointIsANetworkError) {
  HttpConfig c;
  {
    FakeEndpoint gone;
    c = gone.config();
  }
  c.timeout = std::chrono::milliseconds(300);
  SleepLog log;
  HttpChatClient client(c, log.sleeper());
  EXPECT_EQ(llm_error_kind([&] { client.complete({"p"}); }), LlmErrorKind::network);
  EXPECT_EQ(client.attempts_made(), 3);
}

TEST(HttpConfig, FromJsonWithEnvironmentOverride) {
  ::unsetenv("GUIAGENT_API_KEY");
  auto c = http_config_from_json({{"endpoint", "http://x/y"}, {"api_key", "file-key"}, {"max_attempts", 5}});
  EXPECT_EQ(c.endpoint, "http://x/y");
  EXPECT_EQ(c.api_key, "file-key");
  EXPECT_EQ(c.max_attempts, 5);
  ::setenv("GUIAGENT_API_KEY", "env-key", 1);
  EXPECT_EQ(http_config_from_json(json::object()).api_key, "env-key");
  ::unsetenv("GUIAGENT_API_KEY");
  EXPECT_THROW(HttpChatClient(HttpConfig{"not a url"}), std::invalid_argument);
}

TEST(ScriptedClient, RuleLookup) {
  ScriptedClient oracle({{{"Sleep Timer"}, std::nullopt, "2", 0}});
  EXPECT_EQ(oracle.complete({"a view 'Sleep Timer' that can click (2);"}), "2");
  EXPECT_EQ(llm_error_kind([&] { oracle.complete({"nothing relevant"}); }), LlmErrorKind::no_matching_rule);
}

TEST(ScriptedClient, PriorityThenOrder) {
  ScriptedClient oracle({{{}, std::nullopt, "default", -1},
                         {{"alpha"}, std::nullopt, "first", 1},
                         {{"alpha"}, std::nullopt, "second", 1},
                         {{"alpha", "beta"}, std::nullopt, "both", 2},
                         {{}, std::string(R"(gam+a)"), "regex", 0}});
  EXPECT_EQ(oracle.complete({"alpha"}), "first");
  EXPECT_EQ(oracle.complete({"beta alpha"}), "both");
  EXPECT_EQ(oracle.complete({"gammma"}), "regex");
  EXPECT_EQ(oracle.complete({"zzz"}), "default");
}

TEST(ScriptedClient, TemplatesResolveIdsFromThePrompt) {
  SimulatorDevice dev(testing_support::bundled_catalog());
  dev.perform(Action::start_app("Noice"));
  ScriptedClient oracle({{{"Previous actions:\nnone\n"}, std::nullopt, "Tap {{action:click:Sleep Timer}} please", 0},
                         {{"Sleep timer"}, std::nullopt, "{{action:click:5m}}", 0},
                         {{"Waves"}, std::nullopt, "{{action:scroll_up:Volume}}", 0}});
  auto p1 = synthesize_choice_prompt("set the sleep time noise to 5 minutes", describe_state(dev.get_state()), {});
  EXPECT_EQ(oracle.complete({p1.rendered}), "Tap 0 please");

  dev.perform(Action::on("sleep_timer", ActionKind::click));
  auto p2 = synthesize_choice_prompt("set the sleep time noise to 5 minutes", describe_state(dev.get_state()),
                                     {"start the app Noice", "click view 'Sleep Timer'"});
  EXPECT_EQ(oracle.complete({p2.rendered}), "0");

  EXPECT_EQ(find_action_id(p1.rendered, "Volume", "scroll down"), 5);
  EXPECT_EQ(find_action_id(p1.rendered, "Library", "click"), 6);
  EXPECT_EQ(find_action_id(p1.rendered, "Volume", "click"), -1);
  EXPECT_EQ(find_action_id(p1.rendered, "Missing", "click"), -1);

  ScriptedClient broken({{{}, std::nullopt, "{{action:click:Nowhere}}", 0}});
  EXPECT_EQ(llm_error_kind([&] { broken.complete({p1.rendered}); }), LlmErrorKind::no_matching_rule);
}

TEST(OracleRules, JsonForms) {
  auto rules = oracle_rules_from_json(json::parse(R"([{"contains": "x", "reply": "1"},
      {"contains": ["a", "b"], "pattern": "c+", "reply": "2", "priority": 3}, {"reply": "-1"}])"));
  ASSERT_EQ(rules.size(), 3u);
  EXPECT_EQ(rules[0].contains, std::vector<std::string>{"x"});
  EXPECT_EQ(rules[1].pattern, "c+");
  EXPECT_EQ(rules[1].priority, 3);
  EXPECT_TRUE(rules[2].is_default());
  auto again = oracle_rules_from_json({{"rules", oracle_rules_to_json(rules)}});
  ASSERT_EQ(again.size(), 3u);
  EXPECT_EQ(again[1].contains, rules[1].contains);
  EXPECT_THROW(oracle_rules_from_json(json::parse(R"([{"contains": "x"}])")), std::exception);
  EXPECT_THROW(oracle_rules_from_json(json::parse(R"([{"pattern": "(", "reply": "1"}])")), std::exception);
}

TEST(Recording, KeepsEveryExchange) {
  ScriptedClient oracle({{{}, std::nullopt, "7", 0}});
  int tick = 0;
  RecordingClient rec(oracle, [&] { return "t" + std::to_string(tick++); });
  for (const char* p : {"one", "two", "three"}) rec.complete({p});
  auto entries = rec.record();
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[1].prompt, "two");
  EXPECT_EQ(entries[1].reply, "7");
  EXPECT_EQ(entries[1].prompt_digest, prompt_digest("two"));
  EXPECT_EQ(entries[2].timestamp, "t2");
  EXPECT_EQ(entries[0].model_name, "gpt-3.5-turbo");
}

TEST(Recording, DefaultClockIsIsoUtc) {
  ScriptedClient oracle({{{}, std::nullopt, "7", 0}});
  RecordingClient rec(oracle);
  rec.complete({"x"});
  EXPECT_TRUE(std::regex_match(rec.record()[0].timestamp, std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}

TEST(Transcript, SerializationRoundTripsLosslessly) {
  std::mt19937 rng(17);
  for (int i = 0; i < 300; ++i) {
    std::vector<TranscriptEntry> entries;
    const int n = static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) {
      auto prompt = random_text(rng);
      entries.push_back({prompt_digest(prompt), prompt, random_text(rng), random_text(rng), random_text(rng)});
    }
    std::stringstream ss;
    write_transcript(ss, entries);
    ASSERT_EQ(read_transcript(ss), entries);
  }
}

TEST(Transcript, RejectsMalformedLines) {
  std::istringstream bad("{\"prompt\": 1}\n");
  EXPECT_THROW(read_transcript(bad), std::exception);
  std::istringstream blank("\n\n");
  EXPECT_TRUE(read_transcript(blank).empty());
}

TEST(Replay, ReturnsRecordedRepliesByteForByte) {
  ScriptedClient oracle({{{"a"}, std::nullopt, "  1 \n", 0}, {{"b"}, std::nullopt, "Text: \"x\"", 0}});
  RecordingClient rec(oracle);
  rec.complete({"a"});
  rec.complete({"b"});
  ReplayClient replay(rec.record());
  EXPECT_EQ(replay.complete({"a"}), "  1 \n");
  EXPECT_EQ(replay.complete({"b"}), "Text: \"x\"");
  EXPECT_EQ(replay.complete({"a"}), "  1 \n");
  EXPECT_EQ(llm_error_kind([&] { replay.complete({"c"}); }), LlmErrorKind::replay_miss);
}

TEST(Replay, RepeatedPromptsReplayInOrderThenRepeatTheLast) {
  std::vector<TranscriptEntry> t = {{prompt_digest("p"), "p", "99", "", ""}, {prompt_digest("p"), "p", "2", "", ""}};
  ReplayClient replay(t);
  EXPECT_EQ(replay.complete({"p"}), "99");
  EXPECT_EQ(replay.complete({"p"}), "2");
  EXPECT_EQ(replay.complete({"p"}), "2");
  EXPECT_EQ(replay.size(), 1u);
}

TEST(Replay, FileRoundTrip) {
  ScriptedClient oracle({{{}, std::nullopt, "5", 0}});
  RecordingClient rec(oracle);
  rec.complete({"hello"});
  auto path = std::filesystem::temp_directory_path() / "guiagent_transcript_test.ndjson";
  rec.save(path);
  auto loaded = load_transcript(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded, rec.record());
  EXPECT_THROW(load_transcript("/nonexistent/x.ndjson"), std::exception);
}
