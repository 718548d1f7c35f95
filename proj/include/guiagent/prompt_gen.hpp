#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "guiagent/ui_model.hpp"

namespace guiagent {

inline constexpr std::size_t kDefaultMaxWords = 20;

inline constexpr std::string_view kStatePreamble =
    "The current state has the following UI views and corresponding actions, with action id in parentheses";

inline constexpr std::string_view kChoiceRequirement =
    "Choose the next action to complete the task. Reply with a single action id from the list "
    "above and nothing else. If the task is already complete, reply with -1.";

struct ActionBinding {
  int action_id = 0;
  std::string element_key;
  ActionKind kind = ActionKind::click;

  bool operator==(const ActionBinding&) const = default;
};

struct StateDescription {
  std::string text;
  std::vector<ActionBinding> bindings;
  std::string source_digest;
  // Normalized elements in the order they were described.
  std::vector<UiElement> elements;

  const ActionBinding* binding(int action_id) const;
  const UiElement* element(std::string_view key) const;
};

struct Prompt {
  std::string task;
  std::string state_text;
  std::vector<std::string> history_lines;
  std::string output_requirement;
  std::string rendered;
};

struct ElementFragment {
  std::string fragment;
  std::vector<ActionBinding> bindings;
};

// Keeps at most max_words whitespace-separated words; longer strings become the
// first max_words words joined by single spaces plus "…".
std::string truncate_text(std::string_view s, std::size_t max_words = kDefaultMaxWords);

// Name as it appears inside a prompt: display name, truncated, with line breaks
// flattened and "(n)" sequences rewritten to "[n]" so they never read as ids.
std::string prompt_name(const UiElement& e, std::size_t max_words = kDefaultMaxWords);

ElementFragment describe_element(const UiElement& e, int next_id, std::size_t max_words = kDefaultMaxWords);

StateDescription describe_state(const UiState& state, std::size_t max_words = kDefaultMaxWords);

Prompt synthesize_choice_prompt(std::string_view task, const StateDescription& sd,
                                const std::vector<std::string>& history);

// Second half of the edit protocol. Task, state and history context precede
// the question. Throws std::invalid_argument if e cannot be edited.
Prompt synthesize_edit_prompt(const UiElement& e, std::string_view task = {}, const StateDescription* sd = nullptr,
                              const std::vector<std::string>& history = {},
                              std::size_t max_words = kDefaultMaxWords);

std::string edit_question(const UiElement& e, std::size_t max_words = kDefaultMaxWords);

}  // namespace guiagent
