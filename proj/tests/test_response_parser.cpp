#include <gtest/gtest.h>

#include <random>

#include "guiagent/response_parser.hpp"

using namespace guiagent;

namespace {

const std::vector<std::string> kWords = {"I",      "would", "click", "action", "because", "it",   "opens",
                                         "the",    "menu",  "Sure",  "answer", "is",      "step-by-step",
                                         "option", "id",    "view",  "Wind",   "ok"};
const std::vector<std::string> kJoins = {" ", ", ", ". ", "! ", "\n", " - ", ": ", "; "};
// Never '-', which would turn the id into a negative number.
const std::vector<std::string> kLeadIns = {" ", ": ", "(", "#", "\n", "\"", "'", "`", "[", "id="};

std::string prose(std::mt19937& rng, bool allow_empty) {
  std::string s;
  const int n = static_cast<int>(rng() % 8) + (allow_empty ? 0 : 1);
  for (int i = 0; i < n; ++i) {
    if (i) s += kJoins[rng() % kJoins.size()];
    s += kWords[rng() % kWords.size()];
  }
  return s;
}

std::string decorate(std::mt19937& rng, const std::string& core) {
  std::string prefix = prose(rng, true);
  if (!prefix.empty()) prefix += kLeadIns[rng() % kLeadIns.size()];
  std::string suffix;
  if (rng() % 2) suffix = std::string(rng() % 2 ? " " : ".") + prose(rng, true);
  return prefix + core + suffix;
}

}  // namespace

TEST(ParseChoice, Examples) {
  EXPECT_EQ(parse_choice("0", 5), Decision{Choice{0}});
  EXPECT_EQ(parse_choice("I would click action 3 because it opens settings.", 6), Decision{Choice{3}});
  EXPECT_EQ(parse_choice("The task is done. -1", 1), Decision{TaskComplete{}});
  EXPECT_EQ(parse_choice("-1", 0), Decision{TaskComplete{}});
}

TEST(ParseChoice, SkipsOtherNegativesAndHyphenatedWords) {
  EXPECT_EQ(parse_choice("-5 is wrong, use 2", 4), Decision{Choice{2}});
  EXPECT_EQ(parse_choice("step-2", 4), Decision{Choice{2}});
  EXPECT_EQ(parse_choice("x-1", 4), Decision{Choice{1}});
}

TEST(ParseChoice, Errors) {
  for (const char* reply : {"", "no idea", "   ", "-3", "7", "99999999999999999999999"}) {
    try {
      parse_choice(reply, 5);
      FAIL() << "expected an error for '" << reply << "'";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), ParseErrorKind::out_of_range);
    }
  }
  EXPECT_THROW(parse_choice("99 then 1", 5), ParseError);
}

TEST(ParseChoice, RecoversIdFromDecoratedReplies) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 5000; ++i) {
    const int n = 1 + static_cast<int>(rng() % 40);
    const int id = static_cast<int>(rng() % static_cast<unsigned>(n));
    const std::string reply = decorate(rng, std::to_string(id));
    ASSERT_EQ(parse_choice(reply, n), Decision{Choice{id}}) << reply;
    ASSERT_EQ(parse_choice(decorate(rng, "-1"), n), Decision{TaskComplete{}});
  }
}

TEST(ParseChoice, NeverReturnsOutOfRangeChoice) {
  std::mt19937 rng(8);
  const std::string alphabet = "0123456789- abc.\n";
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 12);
    for (int k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    const int n = static_cast<int>(rng() % 12);
    try {
      auto d = parse_choice(s, n);
      if (const auto* c = std::get_if<Choice>(&d)) {
        ASSERT_GE(c->action_id, 0) << s;
        ASSERT_LT(c->action_id, n) << s;
      }
    } catch (const ParseError&) {
    }
  }
}

TEST(ParseEditText, Examples) {
  EXPECT_EQ(parse_edit_text("Beijing China"), Decision{EditText{"Beijing China"}});
  EXPECT_EQ(parse_edit_text("\"Beijing China\""), Decision{EditText{"Beijing China"}});
  EXPECT_EQ(parse_edit_text("  Text: 'Beijing China'\n"), Decision{EditText{"Beijing China"}});
  EXPECT_EQ(parse_edit_text("“Beijing China”"), Decision{EditText{"Beijing China"}});
  EXPECT_EQ(parse_edit_text("`alice@github.com`"), Decision{EditText{"alice@github.com"}});
  EXPECT_EQ(parse_edit_text("don't stop"), Decision{EditText{"don't stop"}});
  try {
    parse_edit_text("   ");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::empty_edit);
  }
  EXPECT_THROW(parse_edit_text("\"\""), ParseError);
  EXPECT_THROW(parse_edit_text("Text:"), ParseError);
}

TEST(ParseEditText, IdempotentOnItsOwnOutput) {
  std::mt19937 rng(31);
  const std::vector<std::string> pieces = {"Text:", " ", "\"", "'", "`", "“", "”", "Beijing", "China", "text:", "\n",
                                           "a", "Text: ", "‘", "’"};
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const int len = 1 + static_cast<int>(rng() % 7);
    for (int k = 0; k < len; ++k) s += pieces[rng() % pieces.size()];
    try {
      auto once = std::get<EditText>(parse_edit_text(s)).content;
      auto twice = std::get<EditText>(parse_edit_text(once)).content;
      ASSERT_EQ(once, twice) << "input [" << s << "]";
    } catch (const ParseError& e) {
      ASSERT_EQ(e.kind(), ParseErrorKind::empty_edit);
    }
  }
}

TEST(Describe, Decisions) {
  EXPECT_EQ(describe(Choice{4}), "choice 4");
  EXPECT_EQ(describe(TaskComplete{}), "complete");
  EXPECT_EQ(describe(EditText{"hi"}), "edit \"hi\"");
}
