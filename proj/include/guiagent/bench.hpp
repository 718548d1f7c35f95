#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guiagent/agent.hpp"

namespace guiagent {

struct TaskSpec {
  std::string task_id;
  std::string description;
  std::string app_id;
  std::string category;
  std::vector<std::string> reference_actions;

  std::size_t complexity() const { return reference_actions.size(); }
};

std::vector<TaskSpec> suite_from_json(const nlohmann::json& j);
nlohmann::json suite_to_json(const std::vector<TaskSpec>& suite);
std::vector<TaskSpec> load_suite(const std::filesystem::path& path);

// i/n with i the length of the matched reference prefix.
struct Progress {
  std::size_t matched = 0;
  std::size_t total = 1;

  double value() const { return static_cast<double>(matched) / static_cast<double>(total); }
  bool complete() const { return matched == total; }
  bool operator==(const Progress&) const = default;
};

struct TaskResult {
  std::string task_id;
  std::vector<std::string> predicted_actions;
  Progress progress;
  bool fully_complete = false;
  std::optional<Termination> termination;
};

struct ReportRow {
  std::string label;
  std::size_t count = 0;
  double average_progress = 0.0;      // fraction in [0, 1]
  double full_completion_rate = 0.0;  // fraction in [0, 1]
};

struct ProgressReport {
  std::vector<ReportRow> complexity;
  std::vector<ReportRow> category;
  ReportRow total;
  std::vector<TaskResult> results;
};

// Whitespace runs collapse to one space. Text outside quotes is compared
// case-insensitively; quoted names and texts and the app id exactly.
bool action_equal(std::string_view a, std::string_view b);

// Throws std::invalid_argument if reference is empty.
Progress completion_progress(const std::vector<std::string>& reference, const std::vector<std::string>& predicted);

TaskResult score_task(const TaskSpec& spec, const std::vector<std::string>& predicted,
                      std::optional<Termination> termination = std::nullopt);

// Complexity buckets "2~3 steps", "4~5 steps", "6~13 steps". Shorter tasks fall
// into the first bucket and longer ones into the last.
std::string complexity_bucket(std::size_t steps);

// Throws std::invalid_argument on a missing, unknown or duplicate task_id.
ProgressReport aggregate(const std::vector<TaskSpec>& specs, const std::vector<TaskResult>& results);

std::string render_report_text(const ProgressReport& report);
nlohmann::json report_to_json(const ProgressReport& report);

using DeviceFactory = std::function<std::unique_ptr<Device>()>;

struct SuiteRun {
  ProgressReport report;
  std::vector<TaskTrace> traces;  // same order as the suite
};

// Each task gets a fresh device session. Task failures become scores.
// jobs > 1 runs tasks on that many threads; the llm client must then be
// thread-safe (all bundled backends are).
SuiteRun run_suite(const std::vector<TaskSpec>& suite, const DeviceFactory& device_factory, LlmClient& llm,
                   const AgentConfig& cfg, std::size_t jobs = 1);

// Oracle rules that make a scripted backend follow each task's reference
// sequence exactly and then reply -1.
std::vector<OracleRule> faithful_oracle_rules(const std::vector<TaskSpec>& suite);

}  // namespace guiagent
