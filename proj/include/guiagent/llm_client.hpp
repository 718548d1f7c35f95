#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace guiagent {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_reply_tokens = 256;
  std::string model_name = "gpt-3.5-turbo";

  void validate() const;
};

enum class LlmErrorKind { network, auth, bad_response, no_matching_rule, replay_miss, invalid_request, write_failure };

std::string_view llm_error_kind_id(LlmErrorKind kind);

class LlmError : public std::runtime_error {
 public:
  LlmError(LlmErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  LlmErrorKind kind() const { return kind_; }

 private:
  LlmErrorKind kind_;
};

// Single-shot completion. Implementations are safe to call from several
// threads at once.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

std::string prompt_digest(std::string_view prompt);

// ---------------------------------------------------------------------------
// Chat-completions over HTTP(S).

struct HttpConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
};

// Reads {"endpoint","api_key","timeout_ms","max_attempts","initial_backoff_ms"} from a JSON
// object; GUIAGENT_API_KEY in the environment overrides api_key.
HttpConfig http_config_from_json(const nlohmann::json& j);

class HttpChatClient final : public LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatClient(HttpConfig config, Sleeper sleeper = {});
  std::string complete(const CompletionRequest& request) override;

  int attempts_made() const { return attempts_made_.load(); }

 private:
  HttpConfig config_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string path_;
  std::atomic<int> attempts_made_{0};
};

// ---------------------------------------------------------------------------
// Scripted oracle.

struct OracleRule {
  std::vector<std::string> contains;  // all must occur in the prompt
  std::optional<std::string> pattern;  // ECMAScript regex searched in the prompt
  std::string reply;
  int priority = 0;

  bool is_default() const { return contains.empty() && !pattern; }
};

std::vector<OracleRule> oracle_rules_from_json(const nlohmann::json& j);
nlohmann::json oracle_rules_to_json(const std::vector<OracleRule>& rules);
std::vector<OracleRule> load_oracle_rules(const std::filesystem::path& path);

// Finds the id printed for `kind_label` on the view named `name` in a choice
// prompt ("a view 'name' that can click (3), ..."). Returns -1 if absent.
int find_action_id(std::string_view prompt, std::string_view name, std::string_view kind_label);

// Returns the reply of the highest-priority matching rule (earlier rules win
// ties). Replies may reference prompt ids with {{action:<kind>:<name>}}, for
// example {{action:click:Sleep Timer}}.
class ScriptedClient final : public LlmClient {
 public:
  explicit ScriptedClient(std::vector<OracleRule> rules);
  std::string complete(const CompletionRequest& request) override;

 private:
  struct Compiled {
    OracleRule rule;
    std::optional<std::regex> re;
  };
  std::vector<Compiled> rules_;
};

// ---------------------------------------------------------------------------
// Recording and replay.

struct TranscriptEntry {
  std::string prompt_digest;
  std::string prompt;
  std::string reply;
  std::string timestamp;
  std::string model_name;

  bool operator==(const TranscriptEntry&) const = default;
};

nlohmann::json transcript_entry_to_json(const TranscriptEntry& e);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);

void write_transcript(std::ostream& out, const std::vector<TranscriptEntry>& entries);
std::vector<TranscriptEntry> read_transcript(std::istream& in);
std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path);

// Wraps another backend and keeps every exchange.
class RecordingClient final : public LlmClient {
 public:
  using Clock = std::function<std::string()>;

  explicit RecordingClient(LlmClient& inner, Clock clock = {});
  std::string complete(const CompletionRequest& request) override;

  std::vector<TranscriptEntry> record() const;
  void save(const std::filesystem::path& path) const;

 private:
  LlmClient& inner_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
};

// Answers from a transcript keyed by prompt digest. When the same prompt was
// recorded several times its replies are served in recorded order, and the
// last one repeats once they run out.
class ReplayClient final : public LlmClient {
 public:
  explicit ReplayClient(const std::vector<TranscriptEntry>& transcript);
  std::string complete(const CompletionRequest& request) override;
  std::size_t size() const { return replies_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> replies_;
  std::map<std::string, std::size_t> served_;
  std::mutex mutex_;
};

}  // namespace guiagent
