#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace guiagent {

struct Choice {
  int action_id = 0;
  bool operator==(const Choice&) const = default;
};

struct TaskComplete {
  bool operator==(const TaskComplete&) const = default;
};

struct EditText {
  std::string content;
  bool operator==(const EditText&) const = default;
};

using Decision = std::variant<Choice, TaskComplete, EditText>;

std::string describe(const Decision& d);

enum class ParseErrorKind { out_of_range, empty_edit };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

// First integer token wins. -1 means the task is complete; other negatives are
// skipped. Throws ParseError(out_of_range) when nothing usable is found or the
// integer is not below num_actions.
Decision parse_choice(std::string_view reply, int num_actions);

// Trims, removes a leading "Text:" label and surrounding quotes. Throws
// ParseError(empty_edit) if nothing remains.
Decision parse_edit_text(std::string_view reply);

}  // namespace guiagent
