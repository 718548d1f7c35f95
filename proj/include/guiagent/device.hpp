#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>

#include "guiagent/ui_model.hpp"

namespace guiagent {

struct Action {
  ActionKind kind = ActionKind::click;
  std::optional<std::string> target;
  std::optional<std::string> text;
  std::optional<std::string> app_id;

  static Action start_app(std::string app);
  static Action on(std::string element_key, ActionKind kind);
  static Action edit(std::string element_key, std::string content);

  // Throws std::invalid_argument when the field combination is inconsistent
  // with the kind (edit needs text, start_app needs app_id and no target).
  void validate() const;

  bool operator==(const Action&) const = default;
};

nlohmann::json action_to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);

struct ActionResult {
  bool success = false;
  std::string state_digest;
};

enum class DeviceErrorKind { no_session, unknown_app, unknown_target, unsupported_kind, invalid_action, transport, timeout, remote };

std::string_view device_error_kind_id(DeviceErrorKind kind);

class DeviceError : public std::runtime_error {
 public:
  DeviceError(DeviceErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  DeviceErrorKind kind() const { return kind_; }

 private:
  DeviceErrorKind kind_;
};

// One device session. Not safe for concurrent use; separate sessions are
// independent.
class Device {
 public:
  virtual ~Device() = default;
  virtual UiState get_state() = 0;
  virtual ActionResult perform(const Action& action) = 0;
};

}  // namespace guiagent
