#include "guiagent/response_parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <utility>

namespace guiagent {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  // ASCII whitespace plus U+00A0 (no-break space), which chat models emit.
  auto ws_len_front = [](std::string_view v) -> std::size_t {
    if (v.empty()) return 0;
    if (std::isspace(static_cast<unsigned char>(v.front()))) return 1;
    if (v.size() >= 2 && v[0] == '\xC2' && v[1] == '\xA0') return 2;
    return 0;
  };
  auto ws_len_back = [](std::string_view v) -> std::size_t {
    if (v.empty()) return 0;
    if (std::isspace(static_cast<unsigned char>(v.back()))) return 1;
    if (v.size() >= 2 && v[v.size() - 2] == '\xC2' && v.back() == '\xA0') return 2;
    return 0;
  };
  while (auto n = ws_len_front(s)) s.remove_prefix(n);
  while (auto n = ws_len_back(s)) s.remove_suffix(n);
  return s;
}

constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kQuotePairs{{
    {"\"", "\""},
    {"'", "'"},
    {"`", "`"},
    {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // “ ”
    {"\xE2\x80\x98", "\xE2\x80\x99"},  // ‘ ’
}};

bool strip_quotes(std::string_view& s) {
  for (const auto& [open, close] : kQuotePairs) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s.remove_prefix(open.size());
      s.remove_suffix(close.size());
      return true;
    }
  }
  return false;
}

bool strip_label(std::string_view& s) {
  constexpr std::string_view kLabel = "text:";
  if (s.size() < kLabel.size()) return false;
  for (std::size_t i = 0; i < kLabel.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != kLabel[i]) return false;
  }
  s.remove_prefix(kLabel.size());
  return true;
}

}  // namespace

std::string describe(const Decision& d) {
  if (const auto* c = std::get_if<Choice>(&d)) return "choice " + std::to_string(c->action_id);
  if (std::holds_alternative<TaskComplete>(d)) return "complete";
  return "edit \"" + std::get<EditText>(d).content + "\"";
}

Decision parse_choice(std::string_view reply, int num_actions) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!is_digit(reply[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < reply.size() && is_digit(reply[i])) ++i;
    const bool negative = start > 0 && reply[start - 1] == '-' && (start == 1 || !is_alnum(reply[start - 2]));

    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(reply.data() + start, reply.data() + i, value);
    const bool overflow = ec == std::errc::result_out_of_range;

    if (negative) {
      if (!overflow && value == 1) return TaskComplete{};
      continue;
    }
    if (overflow || value >= num_actions) {
      throw ParseError(ParseErrorKind::out_of_range, "action id " + std::string(reply.substr(start, i - start)) +
                                                         " is out of range (" + std::to_string(num_actions) +
                                                         " actions available)");
    }
    return Choice{static_cast<int>(value)};
  }
  throw ParseError(ParseErrorKind::out_of_range, "no action id found in reply");
}

Decision parse_edit_text(std::string_view reply) {
  std::string_view s = trim(reply);
  // Repeat until stable so the result is a fixed point of this function.
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (strip_label(s)) {
      s = trim(s);
      changed = true;
    }
    if (strip_quotes(s)) {
      s = trim(s);
      changed = true;
    }
  }
  if (s.empty()) throw ParseError(ParseErrorKind::empty_edit, "edit reply is empty");
  return EditText{std::string(s)};
}

}  // namespace guiagent
