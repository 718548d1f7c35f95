#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "guiagent/device.hpp"
#include "guiagent/llm_client.hpp"
#include "guiagent/prompt_gen.hpp"
#include "guiagent/response_parser.hpp"

namespace guiagent {

struct AgentConfig {
  int max_steps = 20;
  int max_retries_per_step = 1;
  int repetition_window = 4;
  int truncation_words = static_cast<int>(kDefaultMaxWords);
  std::string model_name = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_reply_tokens = 256;

  void validate() const;
};

nlohmann::json agent_config_to_json(const AgentConfig& cfg);
// Missing keys keep their defaults.
AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig base = {});

// Canonical trace grammar:
//   start the app <app_id>
//   click view with text "<text>"        (element has literal text)
//   click view '<name>'                  (otherwise)
//   enter "<content>" into view with text "<name>"
//   long click view '<name>'
//   check view '<name>'
//   scroll up view '<name>' / scroll down view '<name>'
// Throws DeviceError(unknown_target) when the target is not visible in state.
std::string action_to_string(const Action& a, const UiState& state,
                             std::size_t max_words = kDefaultMaxWords);

// Inverse of action_to_string for the grammar above.
struct ParsedAction {
  ActionKind kind = ActionKind::click;
  std::string name;                    // view name or text, or the app id
  std::optional<std::string> content;  // edit text
  bool by_text = false;                // "with text" form
};
std::optional<ParsedAction> parse_action_string(std::string_view s);

enum class Termination { model_declared_complete, max_steps, repetition_guard, parse_failure, device_error };

std::string_view termination_id(Termination t);
std::optional<Termination> termination_from_id(std::string_view id);

struct TraceStep {
  int index = 0;
  std::string action;
  std::string decision;
  std::optional<int> action_id;
  std::string prompt_digest;
  std::string prompt;
  std::optional<std::string> edit_prompt_digest;
  std::optional<std::string> edit_prompt;
  std::vector<std::string> replies;
  std::string state_before;
  std::string state_after;
};

struct TaskTrace {
  std::string task;
  std::string app_id;
  AgentConfig config;
  std::vector<TraceStep> steps;
  Termination termination = Termination::parse_failure;
  std::string termination_detail;

  std::vector<std::string> actions() const;
};

// Trace file: one JSON object per line. The first line is the header
// ({"type":"header", task, app_id, config, termination, detail, steps}), then
// one {"type":"step", ...} line per executed action, start_app included.
void write_trace(std::ostream& out, const TaskTrace& trace);
TaskTrace read_trace(std::istream& in);
void save_trace(const std::filesystem::path& path, const TaskTrace& trace);
TaskTrace load_trace(const std::filesystem::path& path);

enum class StepStatus { executed, terminate_complete, terminate_max_steps, terminate_repetition, parse_failure, device_error };

struct StepOutcome {
  StepStatus status = StepStatus::executed;
  std::optional<std::string> action;
  std::string message;

  bool terminal() const { return status != StepStatus::executed; }
};

// One task run against one device session. Strictly sequential.
class Agent {
 public:
  using Observer = std::function<void(const TraceStep&)>;

  Agent(Device& device, LlmClient& llm, AgentConfig config, std::string task, std::string app_id);

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  // Performs start_app and records it as step 0.
  StepOutcome start();
  // get_state -> describe -> query -> parse -> perform, once.
  StepOutcome step();

  const std::vector<std::string>& history() const { return history_; }
  const TaskTrace& trace() const { return trace_; }
  bool finished() const { return finished_; }

 private:
  struct Reply {
    std::optional<Decision> decision;
    std::string error;
    bool llm_failed = false;
  };

  Reply ask(const Prompt& prompt, const std::function<Decision(const std::string&)>& parse, TraceStep& record);
  StepOutcome finish(StepStatus status, Termination termination, std::string message);
  StepOutcome execute(const Action& action, const UiState& before, TraceStep record);

  Device& device_;
  LlmClient& llm_;
  AgentConfig config_;
  std::vector<std::string> history_;
  std::vector<std::pair<std::string, std::string>> seen_;  // (state digest, action string)
  TaskTrace trace_;
  Observer observer_;
  int executed_ = 0;
  bool started_ = false;
  bool finished_ = false;
};

// Runs start_app and then steps until a termination condition. Errors end up
// in trace.termination; nothing is thrown past this boundary.
TaskTrace run_task(const std::string& task, const std::string& app_id, Device& device, LlmClient& llm,
                   const AgentConfig& cfg, Agent::Observer observer = {});

}  // namespace guiagent
