#include "guiagent/ui_model.hpp"

#include <array>
#include <functional>
#include <set>
#include <utility>

#include "guiagent/digest.hpp"
#include "guiagent/json_io.hpp"

namespace guiagent {

namespace {

struct KindNames {
  ActionKind kind;
  std::string_view label;
  std::string_view id;
};

constexpr std::array<KindNames, 7> kKindNames{{
    {ActionKind::click, "click", "click"},
    {ActionKind::long_click, "long click", "long_click"},
    {ActionKind::check, "check", "check"},
    {ActionKind::edit, "edit", "edit"},
    {ActionKind::scroll_up, "scroll up", "scroll_up"},
    {ActionKind::scroll_down, "scroll down", "scroll_down"},
    {ActionKind::start_app, "start app", "start_app"},
}};

constexpr std::array<std::pair<ElementFlag, std::string_view>, 7> kFlagNames{{
    {ElementFlag::editable, "editable"},
    {ElementFlag::clickable, "clickable"},
    {ElementFlag::long_clickable, "long_clickable"},
    {ElementFlag::checkable, "checkable"},
    {ElementFlag::checked, "checked"},
    {ElementFlag::selected, "selected"},
    {ElementFlag::scrollable, "scrollable"},
}};

bool non_empty(const std::optional<std::string>& s) { return s.has_value() && !s->empty(); }

void collect_visible(const UiElement& e, std::vector<UiElement>& out) {
  if (!e.visible) return;
  if (!available_actions(e).empty() || non_empty(e.text) || non_empty(e.content_description)) {
    UiElement flat = e;
    flat.children.clear();
    out.push_back(std::move(flat));
  }
  for (const auto& child : e.children) collect_visible(child, out);
}

}  // namespace

std::string_view action_kind_label(ActionKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.label;
  }
  return "unknown";
}

std::string_view action_kind_id(ActionKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.id;
  }
  return "unknown";
}

std::optional<ActionKind> action_kind_from_id(std::string_view id) {
  for (const auto& k : kKindNames) {
    if (k.id == id) return k.kind;
  }
  return std::nullopt;
}

std::string_view element_flag_id(ElementFlag flag) {
  for (const auto& [f, name] : kFlagNames) {
    if (f == flag) return name;
  }
  return "unknown";
}

std::optional<ElementFlag> element_flag_from_id(std::string_view id) {
  for (const auto& [f, name] : kFlagNames) {
    if (name == id) return f;
  }
  return std::nullopt;
}

std::vector<UiElement> normalize_tree(const UiElement& raw_root) {
  std::vector<UiElement> out;
  collect_visible(raw_root, out);
  return out;
}

std::string element_display_name(const UiElement& e) {
  if (non_empty(e.text)) return *e.text;
  if (non_empty(e.content_description)) return *e.content_description;
  if (!e.class_name.empty()) return e.class_name;
  return "unnamed";
}

std::vector<ActionKind> available_actions(const UiElement& e) {
  std::vector<ActionKind> kinds;
  if (e.flags.has(ElementFlag::clickable)) kinds.push_back(ActionKind::click);
  if (e.flags.has(ElementFlag::long_clickable)) kinds.push_back(ActionKind::long_click);
  if (e.flags.has(ElementFlag::checkable)) kinds.push_back(ActionKind::check);
  if (e.flags.has(ElementFlag::editable)) kinds.push_back(ActionKind::edit);
  if (e.flags.has(ElementFlag::scrollable)) {
    kinds.push_back(ActionKind::scroll_up);
    kinds.push_back(ActionKind::scroll_down);
  }
  return kinds;
}

bool supports(const UiElement& e, ActionKind kind) {
  for (auto k : available_actions(e)) {
    if (k == kind) return true;
  }
  return false;
}

std::vector<std::string> validate_tree(const UiElement& root) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::function<void(const UiElement&, const std::string&)> walk = [&](const UiElement& e,
                                                                         const std::string& path) {
    const std::string where = path + (e.element_key.empty() ? "" : "[" + e.element_key + "]");
    if (!e.bounds.valid()) problems.push_back(where + ": bounds have negative extent");
    if (e.flags.has(ElementFlag::checked) && !e.flags.has(ElementFlag::checkable)) {
      problems.push_back(where + ": checked element is not checkable");
    }
    if (!e.element_key.empty() && !seen.insert(e.element_key).second) {
      problems.push_back(where + ": duplicate element key '" + e.element_key + "'");
    }
    for (std::size_t i = 0; i < e.children.size(); ++i) {
      walk(e.children[i], where + "/" + std::to_string(i));
    }
  };
  walk(root, "root");
  return problems;
}

UiElement wrap_elements(const std::vector<UiElement>& elements) {
  UiElement root;
  root.class_name = "";
  root.children = elements;
  return root;
}

UiState make_state(std::string app_id, std::string screen_id, UiElement root) {
  UiState s;
  s.app_id = std::move(app_id);
  s.screen_id = std::move(screen_id);
  s.root = std::move(root);
  nlohmann::json flat = nlohmann::json::array();
  for (const auto& e : normalize_tree(s.root)) flat.push_back(element_to_json(e));
  s.state_digest = sha256_hex(flat.dump());
  return s;
}

std::optional<UiElement> find_visible_element(const UiState& state, std::string_view key) {
  for (auto& e : normalize_tree(state.root)) {
    if (e.element_key == key) return e;
  }
  return std::nullopt;
}

}  // namespace guiagent
