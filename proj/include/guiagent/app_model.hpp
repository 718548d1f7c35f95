#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "guiagent/ui_model.hpp"

namespace guiagent {

// Predicate over a screen's field values. "empty" and "non_empty" are stored as
// equals "" and not_equals "".
struct Guard {
  enum class Op { equals, not_equals };
  std::string field;
  Op op = Op::equals;
  std::string value;

  bool holds(const std::map<std::string, std::string>& fields) const;
};

// Two guards can never hold at the same time.
bool mutually_exclusive(const Guard& a, const Guard& b);

struct Effect {
  std::optional<std::string> screen;  // defaults to the screen the transition leaves
  std::string field;
  std::string value;
};

struct Transition {
  std::string element_key;
  ActionKind kind = ActionKind::click;
  std::optional<Guard> guard;
  std::string destination;
  std::vector<Effect> effects;
};

// Children of `container` are shown `window` at a time; scrolling moves the
// window by one child.
struct ScrollWindow {
  std::string container;
  std::size_t window = 1;
};

struct Screen {
  std::string screen_id;
  UiElement elements;
  std::vector<Transition> transitions;
  std::map<std::string, std::string> field_values;  // initial values
  std::optional<ScrollWindow> scroll;
};

struct AppModel {
  std::string app_id;
  std::map<std::string, Screen> screens;
  std::string initial_screen;

  const Screen& screen(const std::string& id) const;
};

class ModelError : public std::runtime_error {
 public:
  ModelError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Parses and validates an app-model document. Throws ModelError naming the
// offending location ("screens.home.transitions[1].to").
AppModel load_app_model(const nlohmann::json& document);
AppModel load_app_model_file(const std::filesystem::path& path);

// A single .json file, or every .json file in a directory.
std::vector<AppModel> load_app_models(const std::filesystem::path& file_or_dir);

nlohmann::json app_model_to_json(const AppModel& model);

// Screens reachable from the initial screen when every transition is assumed
// enabled (guards ignored).
std::set<std::string> reachable_screens(const AppModel& model);

}  // namespace guiagent
