#include "guiagent/prompt_gen.hpp"

#include <cctype>
#include <stdexcept>

namespace guiagent {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) words.push_back(s.substr(start, i - start));
  }
  return words;
}

// "(12)" -> "[12]" so a name can never be mistaken for an action id marker.
std::string neutralize_markers(std::string s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '(') continue;
    std::size_t j = i + 1;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i + 1 && j < s.size() && s[j] == ')') {
      s[i] = '[';
      s[j] = ']';
      i = j;
    }
  }
  return s;
}

void append_history(std::string& out, const std::vector<std::string>& history) {
  out += "Previous actions:\n";
  if (history.empty()) {
    out += "none\n";
  } else {
    for (const auto& line : history) {
      out += line;
      out += '\n';
    }
  }
}

}  // namespace

const ActionBinding* StateDescription::binding(int action_id) const {
  if (action_id < 0 || static_cast<std::size_t>(action_id) >= bindings.size()) return nullptr;
  return &bindings[static_cast<std::size_t>(action_id)];
}

const UiElement* StateDescription::element(std::string_view key) const {
  for (const auto& e : elements) {
    if (e.element_key == key) return &e;
  }
  return nullptr;
}

std::string truncate_text(std::string_view s, std::size_t max_words) {
  if (max_words == 0) throw std::invalid_argument("max_words must be positive");
  auto words = split_words(s);
  if (words.size() <= max_words) return std::string(s);
  std::string out;
  for (std::size_t i = 0; i < max_words; ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  out += "…";
  return out;
}

std::string prompt_name(const UiElement& e, std::size_t max_words) {
  std::string name = truncate_text(element_display_name(e), max_words);
  for (auto& c : name) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return neutralize_markers(std::move(name));
}

ElementFragment describe_element(const UiElement& e, int next_id, std::size_t max_words) {
  if (next_id < 0) throw std::invalid_argument("next_id must be non-negative");
  ElementFragment out;
  out.fragment = "a view '" + prompt_name(e, max_words) + "'";
  const auto kinds = available_actions(e);
  int id = next_id;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    out.fragment += i == 0 ? " that can " : ", ";
    out.fragment += action_kind_label(kinds[i]);
    out.fragment += " (" + std::to_string(id) + ")";
    out.bindings.push_back({id, e.element_key, kinds[i]});
    ++id;
  }
  if (e.flags.has(ElementFlag::checked)) out.fragment += ", which is checked";
  if (e.flags.has(ElementFlag::selected)) out.fragment += ", which is selected";
  out.fragment += ';';
  return out;
}

StateDescription describe_state(const UiState& state, std::size_t max_words) {
  StateDescription sd;
  sd.source_digest = state.state_digest;
  sd.elements = normalize_tree(state.root);
  sd.text = std::string(kStatePreamble) + ":";
  int next_id = 0;
  for (const auto& e : sd.elements) {
    auto frag = describe_element(e, next_id, max_words);
    sd.text += '\n';
    sd.text += frag.fragment;
    next_id += static_cast<int>(frag.bindings.size());
    sd.bindings.insert(sd.bindings.end(), frag.bindings.begin(), frag.bindings.end());
  }
  return sd;
}

Prompt synthesize_choice_prompt(std::string_view task, const StateDescription& sd,
                                const std::vector<std::string>& history) {
  if (task.empty()) throw std::invalid_argument("task must not be empty");
  Prompt p;
  p.task = std::string(task);
  p.state_text = sd.text;
  p.history_lines = history;
  p.output_requirement = std::string(kChoiceRequirement);

  p.rendered = "Task: " + p.task + "\n\n";
  p.rendered += p.state_text + "\n\n";
  append_history(p.rendered, history);
  p.rendered += "\n" + p.output_requirement;
  return p;
}

std::string edit_question(const UiElement& e, std::size_t max_words) {
  return "What should I enter to the view with the text '" + prompt_name(e, max_words) +
         "'? Just return the text and nothing else.";
}

Prompt synthesize_edit_prompt(const UiElement& e, std::string_view task, const StateDescription* sd,
                              const std::vector<std::string>& history, std::size_t max_words) {
  if (!supports(e, ActionKind::edit)) {
    throw std::invalid_argument("edit prompt requested for view '" + element_display_name(e) +
                                "' which cannot be edited");
  }
  Prompt p;
  p.task = std::string(task);
  p.state_text = sd ? sd->text : std::string{};
  p.history_lines = history;
  p.output_requirement = edit_question(e, max_words);

  const bool with_context = !task.empty() || sd != nullptr;
  if (!task.empty()) p.rendered += "Task: " + p.task + "\n\n";
  if (sd) p.rendered += p.state_text + "\n\n";
  if (with_context) {
    append_history(p.rendered, history);
    p.rendered += '\n';
  }
  p.rendered += p.output_requirement;
  return p;
}

}  // namespace guiagent
