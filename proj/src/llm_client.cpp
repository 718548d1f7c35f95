#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "guiagent/llm_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "guiagent/digest.hpp"
#include "guiagent/ui_model.hpp"

namespace guiagent {

using nlohmann::json;

void CompletionRequest::validate() const {
  if (prompt.empty()) throw LlmError(LlmErrorKind::invalid_request, "prompt must not be empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw LlmError(LlmErrorKind::invalid_request, "temperature must be within [0, 2]");
  }
  if (max_reply_tokens <= 0) throw LlmError(LlmErrorKind::invalid_request, "max_reply_tokens must be positive");
}

std::string_view llm_error_kind_id(LlmErrorKind kind) {
  switch (kind) {
    case LlmErrorKind::network:
      return "network";
    case LlmErrorKind::auth:
      return "auth";
    case LlmErrorKind::bad_response:
      return "bad_response";
    case LlmErrorKind::no_matching_rule:
      return "no_matching_rule";
    case LlmErrorKind::replay_miss:
      return "replay_miss";
    case LlmErrorKind::invalid_request:
      return "invalid_request";
    case LlmErrorKind::write_failure:
      return "write_failure";
  }
  return "unknown";
}

std::string prompt_digest(std::string_view prompt) { return sha256_hex(prompt); }

// ---------------------------------------------------------------------------

HttpConfig http_config_from_json(const json& j) {
  HttpConfig c;
  if (j.is_object()) {
    c.endpoint = j.value("endpoint", c.endpoint);
    c.api_key = j.value("api_key", c.api_key);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(c.timeout.count())));
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    c.initial_backoff =
        std::chrono::milliseconds(j.value("initial_backoff_ms", static_cast<long long>(c.initial_backoff.count())));
  }
  if (const char* env = std::getenv("GUIAGENT_API_KEY"); env != nullptr && *env != '\0') c.api_key = env;
  return c;
}

HttpChatClient::HttpChatClient(HttpConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint must be an absolute URL: " + config_.endpoint);
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpChatClient::complete(const CompletionRequest& request) {
  request.validate();
  const json body{
      {"model", request.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_reply_tokens},
  };
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      sleeper_(backoff);
      backoff *= 2;
    }
    ++attempts_made_;
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw LlmError(LlmErrorKind::auth, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw LlmError(LlmErrorKind::bad_response, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      const auto reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw LlmError(LlmErrorKind::bad_response, std::string("unexpected completion payload: ") + e.what());
    }
  }
  throw LlmError(LlmErrorKind::network,
                 "giving up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

// ---------------------------------------------------------------------------

std::vector<OracleRule> oracle_rules_from_json(const json& j) {
  const json& list = j.is_object() ? j.at("rules") : j;
  if (!list.is_array()) throw std::invalid_argument("oracle rules must be an array");
  std::vector<OracleRule> rules;
  for (const auto& r : list) {
    OracleRule rule;
    if (r.contains("contains")) {
      if (r["contains"].is_string()) {
        rule.contains.push_back(r["contains"].get<std::string>());
      } else {
        rule.contains = r["contains"].get<std::vector<std::string>>();
      }
    }
    if (r.contains("pattern")) {
      rule.pattern = r["pattern"].get<std::string>();
      try {
        std::regex check(*rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw std::invalid_argument("oracle rule " + std::to_string(rules.size()) + ": bad pattern: " + e.what());
      }
    }
    rule.reply = r.at("reply").get<std::string>();
    rule.priority = r.value("priority", 0);
    rules.push_back(std::move(rule));
  }
  return rules;
}

json oracle_rules_to_json(const std::vector<OracleRule>& rules) {
  json out = json::array();
  for (const auto& r : rules) {
    json j{{"reply", r.reply}, {"priority", r.priority}};
    if (!r.contains.empty()) j["contains"] = r.contains;
    if (r.pattern) j["pattern"] = *r.pattern;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<OracleRule> load_oracle_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open oracle rules " + path.string());
  return oracle_rules_from_json(json::parse(in));
}

int find_action_id(std::string_view prompt, std::string_view name, std::string_view kind_label) {
  const std::string head = "a view '" + std::string(name) + "'";
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    auto end = prompt.find('\n', pos);
    if (end == std::string_view::npos) end = prompt.size();
    std::string_view line = prompt.substr(pos, end - pos);
    pos = end + 1;
    if (!line.starts_with(head)) continue;
    std::string_view rest = line.substr(head.size());
    constexpr std::string_view kCan = " that can ";
    if (!rest.starts_with(kCan)) continue;
    rest.remove_prefix(kCan.size());
    if (!rest.empty() && rest.back() == ';') rest.remove_suffix(1);
    while (!rest.empty()) {
      auto comma = rest.find(", ");
      std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 2);
      const std::string prefix = std::string(kind_label) + " (";
      if (item.starts_with(prefix) && item.ends_with(")")) {
        auto digits = item.substr(prefix.size(), item.size() - prefix.size() - 1);
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
          return std::stoi(std::string(digits));
        }
      }
    }
  }
  return -1;
}

namespace {

std::string expand_reply(const std::string& reply, std::string_view prompt) {
  constexpr std::string_view kOpen = "{{action:";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto start = reply.find(kOpen, pos);
    if (start == std::string::npos) {
      out.append(reply, pos, std::string::npos);
      return out;
    }
    auto close = reply.find("}}", start);
    if (close == std::string::npos) throw LlmError(LlmErrorKind::no_matching_rule, "unterminated template in reply");
    out.append(reply, pos, start - pos);
    const std::string body = reply.substr(start + kOpen.size(), close - start - kOpen.size());
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw LlmError(LlmErrorKind::no_matching_rule, "malformed template '" + body + "'");
    auto kind = action_kind_from_id(body.substr(0, colon));
    if (!kind) throw LlmError(LlmErrorKind::no_matching_rule, "unknown action kind in template '" + body + "'");
    const std::string name = body.substr(colon + 1);
    const int id = find_action_id(prompt, name, action_kind_label(*kind));
    if (id < 0) {
      throw LlmError(LlmErrorKind::no_matching_rule,
                     "prompt offers no '" + std::string(action_kind_label(*kind)) + "' on view '" + name + "'");
    }
    out += std::to_string(id);
    pos = close + 2;
  }
}

}  // namespace

ScriptedClient::ScriptedClient(std::vector<OracleRule> rules) {
  for (auto& r : rules) {
    Compiled c{std::move(r), std::nullopt};
    if (c.rule.pattern) c.re.emplace(*c.rule.pattern, std::regex::ECMAScript);
    rules_.push_back(std::move(c));
  }
}

std::string ScriptedClient::complete(const CompletionRequest& request) {
  request.validate();
  const Compiled* best = nullptr;
  for (const auto& c : rules_) {
    const bool all_found = std::all_of(c.rule.contains.begin(), c.rule.contains.end(), [&](const std::string& s) {
      return request.prompt.find(s) != std::string::npos;
    });
    if (!all_found) continue;
    if (c.re && !std::regex_search(request.prompt, *c.re)) continue;
    if (best == nullptr || c.rule.priority > best->rule.priority) best = &c;
  }
  if (best == nullptr) {
    throw LlmError(LlmErrorKind::no_matching_rule, "no oracle rule matches prompt " + prompt_digest(request.prompt));
  }
  return expand_reply(best->rule.reply, request.prompt);
}

// ---------------------------------------------------------------------------

json transcript_entry_to_json(const TranscriptEntry& e) {
  return {{"prompt_digest", e.prompt_digest}, {"prompt", e.prompt},         {"reply", e.reply},
          {"timestamp", e.timestamp},         {"model_name", e.model_name}};
}

TranscriptEntry transcript_entry_from_json(const json& j) {
  TranscriptEntry e;
  e.prompt = j.at("prompt").get<std::string>();
  e.reply = j.at("reply").get<std::string>();
  e.prompt_digest = j.value("prompt_digest", prompt_digest(e.prompt));
  e.timestamp = j.value("timestamp", std::string{});
  e.model_name = j.value("model_name", std::string{});
  return e;
}

void write_transcript(std::ostream& out, const std::vector<TranscriptEntry>& entries) {
  for (const auto& e : entries) out << transcript_entry_to_json(e).dump() << '\n';
}

std::vector<TranscriptEntry> read_transcript(std::istream& in) {
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      entries.push_back(transcript_entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transcript " + path.string());
  return read_transcript(in);
}

namespace {

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

}  // namespace

RecordingClient::RecordingClient(LlmClient& inner, Clock clock) : inner_(inner), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_now_iso8601;
}

std::string RecordingClient::complete(const CompletionRequest& request) {
  auto reply = inner_.complete(request);
  std::lock_guard lock(mutex_);
  entries_.push_back({prompt_digest(request.prompt), request.prompt, reply, clock_(), request.model_name});
  return reply;
}

std::vector<TranscriptEntry> RecordingClient::record() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void RecordingClient::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw LlmError(LlmErrorKind::write_failure, "cannot write transcript " + path.string());
  write_transcript(out, record());
  if (!out.flush()) throw LlmError(LlmErrorKind::write_failure, "failed writing transcript " + path.string());
}

ReplayClient::ReplayClient(const std::vector<TranscriptEntry>& transcript) {
  for (const auto& e : transcript) replies_[e.prompt_digest].push_back(e.reply);
}

std::string ReplayClient::complete(const CompletionRequest& request) {
  request.validate();
  const auto digest = prompt_digest(request.prompt);
  std::lock_guard lock(mutex_);
  auto it = replies_.find(digest);
  if (it == replies_.end()) throw LlmError(LlmErrorKind::replay_miss, "no recorded reply for prompt " + digest);
  auto& served = served_[digest];
  const auto& reply = it->second[std::min(served, it->second.size() - 1)];
  ++served;
  return reply;
}

}  // namespace guiagent
