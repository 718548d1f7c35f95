#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace guiagent {

enum class ActionKind { click, long_click, check, edit, scroll_up, scroll_down, start_app };

// Human-readable verb used in prompts ("long click", "scroll up", ...).
std::string_view action_kind_label(ActionKind kind);
// Identifier form used in JSON documents ("long_click", "scroll_up", ...).
std::string_view action_kind_id(ActionKind kind);
std::optional<ActionKind> action_kind_from_id(std::string_view id);

enum class ElementFlag : std::uint8_t {
  editable = 1u << 0,
  clickable = 1u << 1,
  long_clickable = 1u << 2,
  checkable = 1u << 3,
  checked = 1u << 4,
  selected = 1u << 5,
  scrollable = 1u << 6,
};

std::string_view element_flag_id(ElementFlag flag);
std::optional<ElementFlag> element_flag_from_id(std::string_view id);

class ElementFlags {
 public:
  constexpr ElementFlags() = default;
  constexpr ElementFlags(std::initializer_list<ElementFlag> flags) {
    for (auto f : flags) bits_ |= static_cast<std::uint8_t>(f);
  }
  static constexpr ElementFlags from_bits(std::uint8_t bits) {
    ElementFlags f;
    f.bits_ = bits & 0x7f;
    return f;
  }

  constexpr bool has(ElementFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr void set(ElementFlag f, bool on = true) {
    if (on) {
      bits_ |= static_cast<std::uint8_t>(f);
    } else {
      bits_ &= static_cast<std::uint8_t>(~static_cast<std::uint8_t>(f));
    }
  }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const ElementFlags&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

inline constexpr ElementFlag kAllFlags[] = {
    ElementFlag::editable,  ElementFlag::clickable, ElementFlag::long_clickable, ElementFlag::checkable,
    ElementFlag::checked,   ElementFlag::selected,  ElementFlag::scrollable,
};

struct Bounds {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  bool valid() const { return right >= left && bottom >= top; }
  bool operator==(const Bounds&) const = default;
};

struct UiElement {
  std::string element_key;
  std::string class_name;
  std::optional<std::string> text;
  std::optional<std::string> content_description;
  Bounds bounds;
  ElementFlags flags;
  bool visible = true;
  std::vector<UiElement> children;

  bool operator==(const UiElement&) const = default;
};

// A screen snapshot. The digest covers the normalized element list only, so two
// screens that look the same to the model hash the same.
struct UiState {
  std::string app_id;
  std::string screen_id;
  UiElement root;
  std::string state_digest;
};

UiState make_state(std::string app_id, std::string screen_id, UiElement root);

// Visible elements in depth-first pre-order. Invisible subtrees are pruned, and
// elements offering no action and carrying no text are dropped.
std::vector<UiElement> normalize_tree(const UiElement& raw_root);

// text -> content_description -> class_name -> "unnamed".
std::string element_display_name(const UiElement& e);

// Fixed order: click, long_click, check, edit, scroll_up, scroll_down.
std::vector<ActionKind> available_actions(const UiElement& e);

bool supports(const UiElement& e, ActionKind kind);

// Structural checks: bounds extent, checked implies checkable, unique keys.
// Returns a list of human-readable problems, empty when the tree is valid.
std::vector<std::string> validate_tree(const UiElement& root);

// Wraps a flat element list under a synthetic visible root so it can be fed
// back into normalize_tree.
UiElement wrap_elements(const std::vector<UiElement>& elements);

// Finds an element in the normalized view of a state.
std::optional<UiElement> find_visible_element(const UiState& state, std::string_view key);

}  // namespace guiagent
