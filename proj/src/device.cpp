#include "guiagent/device.hpp"

namespace guiagent {

Action Action::start_app(std::string app) {
  Action a;
  a.kind = ActionKind::start_app;
  a.app_id = std::move(app);
  return a;
}

Action Action::on(std::string element_key, ActionKind kind) {
  Action a;
  a.kind = kind;
  a.target = std::move(element_key);
  return a;
}

Action Action::edit(std::string element_key, std::string content) {
  Action a = on(std::move(element_key), ActionKind::edit);
  a.text = std::move(content);
  return a;
}

void Action::validate() const {
  if (kind == ActionKind::start_app) {
    if (!app_id || app_id->empty()) throw std::invalid_argument("start_app requires an app_id");
    if (target) throw std::invalid_argument("start_app must not carry a target");
    return;
  }
  if (!target || target->empty()) {
    throw std::invalid_argument(std::string(action_kind_id(kind)) + " requires a target element");
  }
  if (kind == ActionKind::edit && !text) throw std::invalid_argument("edit requires text");
  if (kind != ActionKind::edit && text) throw std::invalid_argument("only edit actions carry text");
  if (app_id) throw std::invalid_argument("only start_app carries an app_id");
}

nlohmann::json action_to_json(const Action& a) {
  nlohmann::json j{{"kind", action_kind_id(a.kind)}};
  if (a.target) j["target"] = *a.target;
  if (a.text) j["text"] = *a.text;
  if (a.app_id) j["app_id"] = *a.app_id;
  return j;
}

Action action_from_json(const nlohmann::json& j) {
  Action a;
  const auto kind_id = j.at("kind").get<std::string>();
  auto kind = action_kind_from_id(kind_id);
  if (!kind) throw std::invalid_argument("unknown action kind '" + kind_id + "'");
  a.kind = *kind;
  if (j.contains("target")) a.target = j["target"].get<std::string>();
  if (j.contains("text")) a.text = j["text"].get<std::string>();
  if (j.contains("app_id")) a.app_id = j["app_id"].get<std::string>();
  a.validate();
  return a;
}

std::string_view device_error_kind_id(DeviceErrorKind kind) {
  switch (kind) {
    case DeviceErrorKind::no_session:
      return "no_session";
    case DeviceErrorKind::unknown_app:
      return "unknown_app";
    case DeviceErrorKind::unknown_target:
      return "unknown_target";
    case DeviceErrorKind::unsupported_kind:
      return "unsupported_kind";
    case DeviceErrorKind::invalid_action:
      return "invalid_action";
    case DeviceErrorKind::transport:
      return "transport";
    case DeviceErrorKind::timeout:
      return "timeout";
    case DeviceErrorKind::remote:
      return "remote";
  }
  return "unknown";
}

}  // namespace guiagent
