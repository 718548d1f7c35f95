#include "guiagent/agent.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace guiagent {

using nlohmann::json;

void AgentConfig::validate() const {
  if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  if (max_retries_per_step <= 0) throw std::invalid_argument("max_retries_per_step must be positive");
  if (repetition_window <= 0) throw std::invalid_argument("repetition_window must be positive");
  if (truncation_words <= 0) throw std::invalid_argument("truncation_words must be positive");
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw std::invalid_argument("temperature must be within [0, 2]");
  if (max_reply_tokens <= 0) throw std::invalid_argument("max_reply_tokens must be positive");
}

json agent_config_to_json(const AgentConfig& cfg) {
  return {{"max_steps", cfg.max_steps},
          {"max_retries_per_step", cfg.max_retries_per_step},
          {"repetition_window", cfg.repetition_window},
          {"truncation_words", cfg.truncation_words},
          {"model_name", cfg.model_name},
          {"temperature", cfg.temperature},
          {"max_reply_tokens", cfg.max_reply_tokens}};
}

AgentConfig agent_config_from_json(const json& j, AgentConfig base) {
  if (!j.is_object()) return base;
  base.max_steps = j.value("max_steps", base.max_steps);
  base.max_retries_per_step = j.value("max_retries_per_step", base.max_retries_per_step);
  base.repetition_window = j.value("repetition_window", base.repetition_window);
  base.truncation_words = j.value("truncation_words", base.truncation_words);
  base.model_name = j.value("model_name", base.model_name);
  base.temperature = j.value("temperature", base.temperature);
  base.max_reply_tokens = j.value("max_reply_tokens", base.max_reply_tokens);
  return base;
}

// ---------------------------------------------------------------------------

std::string action_to_string(const Action& a, const UiState& state, std::size_t max_words) {
  if (a.kind == ActionKind::start_app) return "start the app " + a.app_id.value_or("");
  if (!a.target) throw DeviceError(DeviceErrorKind::invalid_action, "action has no target");
  auto e = find_visible_element(state, *a.target);
  if (!e) throw DeviceError(DeviceErrorKind::unknown_target, "no visible element '" + *a.target + "'");
  const std::string name = truncate_text(element_display_name(*e), max_words);
  switch (a.kind) {
    case ActionKind::click:
      if (e->text && !e->text->empty()) return "click view with text \"" + truncate_text(*e->text, max_words) + "\"";
      return "click view '" + name + "'";
    case ActionKind::edit:
      return "enter \"" + a.text.value_or("") + "\" into view with text \"" + name + "\"";
    default:
      return std::string(action_kind_label(a.kind)) + " view '" + name + "'";
  }
}

std::optional<ParsedAction> parse_action_string(std::string_view s) {
  auto lower_prefix = [&](std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    }
    return true;
  };

  ParsedAction p;
  constexpr std::string_view kStart = "start the app ";
  if (lower_prefix(kStart)) {
    p.kind = ActionKind::start_app;
    p.name = std::string(s.substr(kStart.size()));
    return p;
  }
  constexpr std::string_view kEnter = "enter \"";
  constexpr std::string_view kInto = "\" into view with text \"";
  if (lower_prefix(kEnter)) {
    const auto sep = s.rfind(kInto);
    if (sep == std::string_view::npos || sep < kEnter.size() || !s.ends_with("\"")) return std::nullopt;
    p.kind = ActionKind::edit;
    p.content = std::string(s.substr(kEnter.size(), sep - kEnter.size()));
    const auto name_start = sep + kInto.size();
    if (name_start > s.size() - 1) return std::nullopt;
    p.name = std::string(s.substr(name_start, s.size() - 1 - name_start));
    p.by_text = true;
    return p;
  }
  constexpr std::array<ActionKind, 5> kKinds{ActionKind::long_click, ActionKind::click, ActionKind::check,
                                             ActionKind::scroll_up, ActionKind::scroll_down};
  for (auto kind : kKinds) {
    const std::string prefix = std::string(action_kind_label(kind)) + " view ";
    if (!lower_prefix(prefix)) continue;
    std::string_view rest = s.substr(prefix.size());
    constexpr std::string_view kWithText = "with text \"";
    p.kind = kind;
    if (rest.starts_with(kWithText) && rest.size() > kWithText.size() && rest.ends_with("\"")) {
      p.by_text = true;
      p.name = std::string(rest.substr(kWithText.size(), rest.size() - kWithText.size() - 1));
      return p;
    }
    if (rest.size() >= 2 && rest.front() == '\'' && rest.back() == '\'') {
      p.name = std::string(rest.substr(1, rest.size() - 2));
      return p;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

namespace {

constexpr std::array<std::pair<Termination, std::string_view>, 5> kTerminations{{
    {Termination::model_declared_complete, "ModelDeclaredComplete"},
    {Termination::max_steps, "MaxSteps"},
    {Termination::repetition_guard, "RepetitionGuard"},
    {Termination::parse_failure, "ParseFailure"},
    {Termination::device_error, "DeviceError"},
}};

}  // namespace

std::string_view termination_id(Termination t) {
  for (const auto& [term, id] : kTerminations) {
    if (term == t) return id;
  }
  return "Unknown";
}

std::optional<Termination> termination_from_id(std::string_view id) {
  for (const auto& [term, name] : kTerminations) {
    if (name == id) return term;
  }
  return std::nullopt;
}

std::vector<std::string> TaskTrace::actions() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

// ---------------------------------------------------------------------------

void write_trace(std::ostream& out, const TaskTrace& trace) {
  json header{{"type", "header"},
              {"task", trace.task},
              {"app_id", trace.app_id},
              {"config", agent_config_to_json(trace.config)},
              {"termination", termination_id(trace.termination)},
              {"detail", trace.termination_detail},
              {"steps", trace.steps.size()}};
  out << header.dump() << '\n';
  for (const auto& s : trace.steps) {
    json j{{"type", "step"},
           {"index", s.index},
           {"action", s.action},
           {"decision", s.decision},
           {"prompt_digest", s.prompt_digest},
           {"prompt", s.prompt},
           {"replies", s.replies},
           {"state_before", s.state_before},
           {"state_after", s.state_after}};
    j["action_id"] = s.action_id ? json(*s.action_id) : json(nullptr);
    if (s.edit_prompt) {
      j["edit_prompt_digest"] = s.edit_prompt_digest.value_or("");
      j["edit_prompt"] = *s.edit_prompt;
    }
    out << j.dump() << '\n';
  }
}

TaskTrace read_trace(std::istream& in) {
  TaskTrace trace;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto type = j.value("type", std::string{});
    if (type == "header") {
      trace.task = j.at("task").get<std::string>();
      trace.app_id = j.at("app_id").get<std::string>();
      trace.config = agent_config_from_json(j.value("config", json::object()));
      auto term = termination_from_id(j.at("termination").get<std::string>());
      if (!term) throw std::runtime_error("trace header has an unknown termination");
      trace.termination = *term;
      trace.termination_detail = j.value("detail", std::string{});
      have_header = true;
    } else if (type == "step") {
      if (!have_header) throw std::runtime_error("trace step before header");
      TraceStep s;
      s.index = j.at("index").get<int>();
      s.action = j.at("action").get<std::string>();
      s.decision = j.value("decision", std::string{});
      if (j.contains("action_id") && !j["action_id"].is_null()) s.action_id = j["action_id"].get<int>();
      s.prompt_digest = j.value("prompt_digest", std::string{});
      s.prompt = j.value("prompt", std::string{});
      s.replies = j.value("replies", std::vector<std::string>{});
      s.state_before = j.value("state_before", std::string{});
      s.state_after = j.value("state_after", std::string{});
      if (j.contains("edit_prompt")) {
        s.edit_prompt = j["edit_prompt"].get<std::string>();
        s.edit_prompt_digest = j.value("edit_prompt_digest", std::string{});
      }
      trace.steps.push_back(std::move(s));
    } else {
      throw std::runtime_error("trace line " + std::to_string(line_no) + " has unknown type '" + type + "'");
    }
  }
  if (!have_header) throw std::runtime_error("trace has no header line");
  return trace;
}

void save_trace(const std::filesystem::path& path, const TaskTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  write_trace(out, trace);
}

TaskTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return read_trace(in);
}

// ---------------------------------------------------------------------------

Agent::Agent(Device& device, LlmClient& llm, AgentConfig config, std::string task, std::string app_id)
    : device_(device), llm_(llm), config_(std::move(config)) {
  config_.validate();
  if (task.empty()) throw std::invalid_argument("task must not be empty");
  trace_.task = std::move(task);
  trace_.app_id = std::move(app_id);
  trace_.config = config_;
}

StepOutcome Agent::finish(StepStatus status, Termination termination, std::string message) {
  finished_ = true;
  trace_.termination = termination;
  trace_.termination_detail = message;
  return {status, std::nullopt, std::move(message)};
}

StepOutcome Agent::start() {
  if (started_) throw std::logic_error("agent already started");
  started_ = true;
  const Action action = Action::start_app(trace_.app_id);
  TraceStep rec;
  rec.index = 0;
  rec.decision = "start";
  try {
    rec.state_after = device_.perform(action).state_digest;
  } catch (const DeviceError& e) {
    return finish(StepStatus::device_error, Termination::device_error, e.what());
  }
  rec.action = "start the app " + trace_.app_id;
  history_.push_back(rec.action);
  trace_.steps.push_back(rec);
  if (observer_) observer_(rec);
  return {StepStatus::executed, rec.action, {}};
}

Agent::Reply Agent::ask(const Prompt& prompt, const std::function<Decision(const std::string&)>& parse,
                        TraceStep& record) {
  CompletionRequest req{prompt.rendered, config_.temperature, config_.max_reply_tokens, config_.model_name};
  Reply out;
  for (int attempt = 0; attempt <= config_.max_retries_per_step; ++attempt) {
    std::string text;
    try {
      text = llm_.complete(req);
    } catch (const LlmError& e) {
      out.llm_failed = true;
      out.error = e.what();
      return out;
    }
    record.replies.push_back(text);
    try {
      out.decision = parse(text);
      return out;
    } catch (const ParseError& e) {
      out.error = e.what();
    }
  }
  return out;
}

StepOutcome Agent::step() {
  if (!started_) throw std::logic_error("agent not started");
  if (finished_) return {StepStatus::parse_failure, std::nullopt, "agent already finished"};

  UiState state;
  try {
    state = device_.get_state();
  } catch (const DeviceError& e) {
    return finish(StepStatus::device_error, Termination::device_error, e.what());
  }
  const auto words = static_cast<std::size_t>(config_.truncation_words);
  const StateDescription sd = describe_state(state, words);
  const Prompt prompt = synthesize_choice_prompt(trace_.task, sd, history_);

  TraceStep rec;
  rec.index = static_cast<int>(trace_.steps.size());
  rec.prompt = prompt.rendered;
  rec.prompt_digest = prompt_digest(prompt.rendered);
  rec.state_before = state.state_digest;

  const int num_actions = static_cast<int>(sd.bindings.size());
  auto reply = ask(prompt, [&](const std::string& r) { return parse_choice(r, num_actions); }, rec);
  if (!reply.decision) return finish(StepStatus::parse_failure, Termination::parse_failure, reply.error);
  if (std::holds_alternative<TaskComplete>(*reply.decision)) {
    return finish(StepStatus::terminate_complete, Termination::model_declared_complete, "model reported completion");
  }

  const int id = std::get<Choice>(*reply.decision).action_id;
  const ActionBinding* binding = sd.binding(id);
  rec.action_id = id;
  rec.decision = describe(*reply.decision);

  if (binding->kind != ActionKind::edit) {
    return execute(Action::on(binding->element_key, binding->kind), state, std::move(rec));
  }

  const UiElement* target = sd.element(binding->element_key);
  const Prompt edit = synthesize_edit_prompt(*target, trace_.task, &sd, history_, words);
  rec.edit_prompt = edit.rendered;
  rec.edit_prompt_digest = prompt_digest(edit.rendered);
  auto text = ask(edit, [](const std::string& r) { return parse_edit_text(r); }, rec);
  if (!text.decision) return finish(StepStatus::parse_failure, Termination::parse_failure, text.error);
  rec.decision += "; " + describe(*text.decision);
  return execute(Action::edit(binding->element_key, std::get<EditText>(*text.decision).content), state,
                 std::move(rec));
}

StepOutcome Agent::execute(const Action& action, const UiState& before, TraceStep record) {
  const auto words = static_cast<std::size_t>(config_.truncation_words);
  const std::string text = action_to_string(action, before, words);

  if (executed_ >= config_.max_steps) {
    return finish(StepStatus::terminate_max_steps, Termination::max_steps,
                  "step limit of " + std::to_string(config_.max_steps) + " reached before: " + text);
  }
  const auto repeats = std::count(seen_.begin(), seen_.end(), std::make_pair(before.state_digest, text));
  if (repeats + 1 >= config_.repetition_window) {
    return finish(StepStatus::terminate_repetition, Termination::repetition_guard,
                  "'" + text + "' chosen " + std::to_string(repeats + 1) + " times on the same screen");
  }

  try {
    record.state_after = device_.perform(action).state_digest;
  } catch (const DeviceError& e) {
    return finish(StepStatus::device_error, Termination::device_error, e.what());
  }
  record.action = text;
  seen_.emplace_back(before.state_digest, text);
  history_.push_back(text);
  ++executed_;
  trace_.steps.push_back(record);
  if (observer_) observer_(record);
  return {StepStatus::executed, text, {}};
}

TaskTrace run_task(const std::string& task, const std::string& app_id, Device& device, LlmClient& llm,
                   const AgentConfig& cfg, Agent::Observer observer) {
  TaskTrace fallback;
  fallback.task = task;
  fallback.app_id = app_id;
  fallback.config = cfg;
  try {
    Agent agent(device, llm, cfg, task, app_id);
    if (observer) agent.set_observer(std::move(observer));
    agent.start();
    while (!agent.finished()) agent.step();
    return agent.trace();
  } catch (const std::exception& e) {
    fallback.termination = Termination::parse_failure;
    fallback.termination_detail = std::string("run aborted: ") + e.what();
    return fallback;
  }
}

}  // namespace guiagent
