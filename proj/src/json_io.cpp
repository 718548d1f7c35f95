#include "guiagent/json_io.hpp"

#include <stdexcept>

namespace guiagent {

using nlohmann::json;

json element_to_json(const UiElement& e) {
  json j;
  j["key"] = e.element_key;
  j["class"] = e.class_name;
  if (e.text) j["text"] = *e.text;
  if (e.content_description) j["content_description"] = *e.content_description;
  j["bounds"] = {e.bounds.left, e.bounds.top, e.bounds.right, e.bounds.bottom};
  json flags = json::array();
  for (auto f : kAllFlags) {
    if (e.flags.has(f)) flags.push_back(element_flag_id(f));
  }
  j["flags"] = std::move(flags);
  j["visible"] = e.visible;
  json children = json::array();
  for (const auto& c : e.children) children.push_back(element_to_json(c));
  j["children"] = std::move(children);
  return j;
}

UiElement element_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("element must be a JSON object");
  UiElement e;
  e.element_key = j.value("key", std::string{});
  e.class_name = j.value("class", std::string{});
  if (j.contains("text") && !j["text"].is_null()) e.text = j["text"].get<std::string>();
  if (j.contains("content_description") && !j["content_description"].is_null()) {
    e.content_description = j["content_description"].get<std::string>();
  }
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    if (!b.is_array() || b.size() != 4) throw std::invalid_argument("bounds must be [left, top, right, bottom]");
    e.bounds = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
  }
  if (j.contains("flags")) {
    for (const auto& f : j["flags"]) {
      auto flag = element_flag_from_id(f.get<std::string>());
      if (!flag) throw std::invalid_argument("unknown element flag '" + f.get<std::string>() + "'");
      e.flags.set(*flag);
    }
  }
  e.visible = j.value("visible", true);
  if (j.contains("children")) {
    for (const auto& c : j["children"]) e.children.push_back(element_from_json(c));
  }
  return e;
}

json state_to_json(const UiState& s) {
  return {{"app_id", s.app_id}, {"screen_id", s.screen_id}, {"root", element_to_json(s.root)}};
}

UiState state_from_json(const json& j) {
  return make_state(j.at("app_id").get<std::string>(), j.at("screen_id").get<std::string>(),
                    element_from_json(j.at("root")));
}

}  // namespace guiagent
