#pragma once

#include <nlohmann/json.hpp>

#include "guiagent/ui_model.hpp"

namespace guiagent {

// Wire form of an element as exchanged with a device bridge:
//   {"key", "class", "text"?, "content_description"?, "bounds":[l,t,r,b],
//    "flags":[...], "visible", "children":[...]}
nlohmann::json element_to_json(const UiElement& e);
UiElement element_from_json(const nlohmann::json& j);

// {"app_id", "screen_id", "root"}; the digest is recomputed on read.
nlohmann::json state_to_json(const UiState& s);
UiState state_from_json(const nlohmann::json& j);

}  // namespace guiagent
