#include "guiagent/app_model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>

namespace guiagent {

using nlohmann::json;

namespace {

std::string quote(const std::string& s) { return "\"" + s + "\""; }

UiElement parse_element(const json& j, const std::string& path) {
  if (!j.is_object()) throw ModelError(path, "element must be an object");
  UiElement e;
  e.element_key = j.value("key", std::string{});
  e.class_name = j.value("class", std::string("View"));
  if (j.contains("text")) e.text = j["text"].get<std::string>();
  if (j.contains("description")) e.content_description = j["description"].get<std::string>();
  if (j.contains("content_description")) e.content_description = j["content_description"].get<std::string>();
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    if (!b.is_array() || b.size() != 4) throw ModelError(path + ".bounds", "expected [left, top, right, bottom]");
    e.bounds = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
  }
  if (j.contains("flags")) {
    if (!j["flags"].is_array()) throw ModelError(path + ".flags", "expected an array of flag names");
    for (std::size_t i = 0; i < j["flags"].size(); ++i) {
      const auto name = j["flags"][i].get<std::string>();
      auto flag = element_flag_from_id(name);
      if (!flag) throw ModelError(path + ".flags[" + std::to_string(i) + "]", "unknown flag " + quote(name));
      e.flags.set(*flag);
    }
  }
  e.visible = j.value("visible", true);
  if (j.contains("children")) {
    const auto& children = j["children"];
    if (!children.is_array()) throw ModelError(path + ".children", "expected an array");
    for (std::size_t i = 0; i < children.size(); ++i) {
      e.children.push_back(parse_element(children[i], path + ".children[" + std::to_string(i) + "]"));
    }
  }
  return e;
}

void assign_missing_keys(UiElement& root, const std::string& screen_id) {
  int counter = 0;
  std::function<void(UiElement&)> walk = [&](UiElement& e) {
    if (e.element_key.empty()) e.element_key = screen_id + "/" + std::to_string(counter);
    ++counter;
    for (auto& c : e.children) walk(c);
  };
  walk(root);
}

const UiElement* find_element(const UiElement& root, const std::string& key) {
  if (root.element_key == key) return &root;
  for (const auto& c : root.children) {
    if (const auto* found = find_element(c, key)) return found;
  }
  return nullptr;
}

Guard parse_guard(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("field")) throw ModelError(path, "guard needs a \"field\"");
  Guard g;
  g.field = j["field"].get<std::string>();
  int ops = 0;
  if (j.contains("equals")) {
    g.op = Guard::Op::equals;
    g.value = j["equals"].get<std::string>();
    ++ops;
  }
  if (j.contains("not_equals")) {
    g.op = Guard::Op::not_equals;
    g.value = j["not_equals"].get<std::string>();
    ++ops;
  }
  if (j.contains("empty")) {
    g.op = j["empty"].get<bool>() ? Guard::Op::equals : Guard::Op::not_equals;
    g.value.clear();
    ++ops;
  }
  if (j.contains("non_empty")) {
    g.op = j["non_empty"].get<bool>() ? Guard::Op::not_equals : Guard::Op::equals;
    g.value.clear();
    ++ops;
  }
  if (ops != 1) throw ModelError(path, "guard needs exactly one of equals, not_equals, empty, non_empty");
  return g;
}

json guard_to_json(const Guard& g) {
  if (g.value.empty()) {
    return {{"field", g.field}, {g.op == Guard::Op::equals ? "empty" : "non_empty", true}};
  }
  return {{"field", g.field}, {g.op == Guard::Op::equals ? "equals" : "not_equals", g.value}};
}

json element_to_model_json(const UiElement& e) {
  json j{{"key", e.element_key}, {"class", e.class_name}};
  if (e.text) j["text"] = *e.text;
  if (e.content_description) j["description"] = *e.content_description;
  if (e.bounds != Bounds{}) j["bounds"] = {e.bounds.left, e.bounds.top, e.bounds.right, e.bounds.bottom};
  json flags = json::array();
  for (auto f : kAllFlags) {
    if (e.flags.has(f)) flags.push_back(element_flag_id(f));
  }
  if (!flags.empty()) j["flags"] = flags;
  if (!e.visible) j["visible"] = false;
  if (!e.children.empty()) {
    json children = json::array();
    for (const auto& c : e.children) children.push_back(element_to_model_json(c));
    j["children"] = children;
  }
  return j;
}

Screen parse_screen(const std::string& id, const json& j, const std::string& path) {
  if (!j.is_object()) throw ModelError(path, "screen must be an object");
  Screen s;
  s.screen_id = id;
  s.elements.element_key = id + ":root";
  s.elements.class_name = "FrameLayout";
  if (!j.contains("elements") || !j["elements"].is_array()) throw ModelError(path + ".elements", "expected an array");
  const auto& elems = j["elements"];
  for (std::size_t i = 0; i < elems.size(); ++i) {
    s.elements.children.push_back(parse_element(elems[i], path + ".elements[" + std::to_string(i) + "]"));
  }
  assign_missing_keys(s.elements, id);
  for (const auto& problem : validate_tree(s.elements)) throw ModelError(path + ".elements", problem);

  if (j.contains("fields")) {
    for (const auto& [key, value] : j["fields"].items()) {
      const auto* e = find_element(s.elements, key);
      if (!e) throw ModelError(path + ".fields." + key, "no element with key " + quote(key));
      s.field_values[key] = value.get<std::string>();
    }
  }

  if (j.contains("scroll")) {
    const auto& sj = j["scroll"];
    ScrollWindow w;
    w.container = sj.at("container").get<std::string>();
    w.window = sj.value("window", std::size_t{1});
    const auto* c = find_element(s.elements, w.container);
    if (!c) throw ModelError(path + ".scroll.container", "no element with key " + quote(w.container));
    if (!c->flags.has(ElementFlag::scrollable)) {
      throw ModelError(path + ".scroll.container", quote(w.container) + " is not scrollable");
    }
    if (w.window == 0) throw ModelError(path + ".scroll.window", "window must be positive");
    s.scroll = w;
  }

  if (j.contains("transitions")) {
    const auto& tj = j["transitions"];
    if (!tj.is_array()) throw ModelError(path + ".transitions", "expected an array");
    for (std::size_t i = 0; i < tj.size(); ++i) {
      const std::string tpath = path + ".transitions[" + std::to_string(i) + "]";
      const auto& t = tj[i];
      if (!t.contains("on") || !t["on"].is_object()) throw ModelError(tpath + ".on", "missing trigger");
      Transition tr;
      tr.element_key = t["on"].at("element").get<std::string>();
      const auto kind_id = t["on"].value("action", std::string("click"));
      auto kind = action_kind_from_id(kind_id);
      if (!kind || *kind == ActionKind::start_app) {
        throw ModelError(tpath + ".on.action", "invalid trigger action " + quote(kind_id));
      }
      tr.kind = *kind;
      const auto* e = find_element(s.elements, tr.element_key);
      if (!e) throw ModelError(tpath + ".on.element", "no element with key " + quote(tr.element_key));
      if (!supports(*e, tr.kind)) {
        throw ModelError(tpath + ".on.action",
                         quote(tr.element_key) + " does not support " + std::string(action_kind_id(tr.kind)));
      }
      if (!t.contains("to")) throw ModelError(tpath + ".to", "missing destination");
      tr.destination = t["to"].get<std::string>();
      if (t.contains("guard")) {
        tr.guard = parse_guard(t["guard"], tpath + ".guard");
        if (!find_element(s.elements, tr.guard->field)) {
          throw ModelError(tpath + ".guard.field", "no element with key " + quote(tr.guard->field));
        }
      }
      if (t.contains("effects")) {
        for (const auto& ej : t["effects"]) {
          Effect eff;
          if (ej.contains("screen")) eff.screen = ej["screen"].get<std::string>();
          eff.field = ej.at("field").get<std::string>();
          eff.value = ej.value("value", std::string{});
          tr.effects.push_back(std::move(eff));
        }
      }
      s.transitions.push_back(std::move(tr));
    }
  }
  return s;
}

}  // namespace

bool Guard::holds(const std::map<std::string, std::string>& fields) const {
  auto it = fields.find(field);
  const std::string current = it == fields.end() ? std::string{} : it->second;
  return op == Op::equals ? current == value : current != value;
}

bool mutually_exclusive(const Guard& a, const Guard& b) {
  if (a.field != b.field) return false;
  if (a.op == Guard::Op::equals && b.op == Guard::Op::equals) return a.value != b.value;
  if (a.op != b.op) return a.value == b.value;
  return false;
}

const Screen& AppModel::screen(const std::string& id) const {
  auto it = screens.find(id);
  if (it == screens.end()) throw std::out_of_range("unknown screen '" + id + "' in app '" + app_id + "'");
  return it->second;
}

static AppModel load_app_model_impl(const json& document) {
  if (!document.is_object()) throw ModelError("$", "app model must be a JSON object");
  AppModel m;
  if (!document.contains("app_id") || !document["app_id"].is_string()) throw ModelError("app_id", "missing app_id");
  m.app_id = document["app_id"].get<std::string>();
  if (!document.contains("initial_screen") || !document["initial_screen"].is_string()) {
    throw ModelError("initial_screen", "missing initial_screen");
  }
  m.initial_screen = document["initial_screen"].get<std::string>();
  if (!document.contains("screens") || !document["screens"].is_object() || document["screens"].empty()) {
    throw ModelError("screens", "expected a non-empty object of screens");
  }
  for (const auto& [id, sj] : document["screens"].items()) {
    m.screens.emplace(id, parse_screen(id, sj, "screens." + id));
  }
  if (!m.screens.count(m.initial_screen)) {
    throw ModelError("initial_screen", "dangling screen reference " + quote(m.initial_screen));
  }
  for (const auto& [id, s] : m.screens) {
    for (std::size_t i = 0; i < s.transitions.size(); ++i) {
      const auto& t = s.transitions[i];
      const std::string tpath = "screens." + id + ".transitions[" + std::to_string(i) + "]";
      if (!m.screens.count(t.destination)) {
        throw ModelError(tpath + ".to", "dangling screen reference " + quote(t.destination));
      }
      for (std::size_t k = 0; k < t.effects.size(); ++k) {
        const auto& eff = t.effects[k];
        const std::string epath = tpath + ".effects[" + std::to_string(k) + "]";
        const std::string target_screen = eff.screen.value_or(id);
        auto it = m.screens.find(target_screen);
        if (it == m.screens.end()) throw ModelError(epath + ".screen", "dangling screen reference " + quote(target_screen));
        if (!find_element(it->second.elements, eff.field)) {
          throw ModelError(epath + ".field", "no element with key " + quote(eff.field) + " on screen " + quote(target_screen));
        }
      }
      for (std::size_t j = 0; j < i; ++j) {
        const auto& other = s.transitions[j];
        if (other.element_key != t.element_key || other.kind != t.kind) continue;
        const bool exclusive = t.guard && other.guard && mutually_exclusive(*t.guard, *other.guard);
        if (!exclusive) {
          throw ModelError(tpath + ".guard", "ambiguous guards: overlaps transitions[" + std::to_string(j) +
                                                 "] on the same trigger");
        }
      }
    }
  }
  return m;
}

AppModel load_app_model(const json& document) {
  try {
    return load_app_model_impl(document);
  } catch (const json::exception& e) {
    throw ModelError("$", std::string("schema violation: ") + e.what());
  }
}

AppModel load_app_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError(path.string(), "cannot open app model");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ModelError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  try {
    return load_app_model(doc);
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ":" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

std::vector<AppModel> load_app_models(const std::filesystem::path& file_or_dir) {
  std::vector<AppModel> models;
  if (std::filesystem::is_directory(file_or_dir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(file_or_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) models.push_back(load_app_model_file(f));
  } else {
    models.push_back(load_app_model_file(file_or_dir));
  }
  return models;
}

json app_model_to_json(const AppModel& model) {
  json screens = json::object();
  for (const auto& [id, s] : model.screens) {
    json elems = json::array();
    for (const auto& c : s.elements.children) elems.push_back(element_to_model_json(c));
    json transitions = json::array();
    for (const auto& t : s.transitions) {
      json tj{{"on", {{"element", t.element_key}, {"action", action_kind_id(t.kind)}}}, {"to", t.destination}};
      if (t.guard) tj["guard"] = guard_to_json(*t.guard);
      if (!t.effects.empty()) {
        json effs = json::array();
        for (const auto& e : t.effects) {
          json ej{{"field", e.field}, {"value", e.value}};
          if (e.screen) ej["screen"] = *e.screen;
          effs.push_back(ej);
        }
        tj["effects"] = effs;
      }
      transitions.push_back(tj);
    }
    json sj{{"elements", elems}, {"transitions", transitions}};
    if (!s.field_values.empty()) sj["fields"] = s.field_values;
    if (s.scroll) sj["scroll"] = {{"container", s.scroll->container}, {"window", s.scroll->window}};
    screens[id] = sj;
  }
  return {{"app_id", model.app_id}, {"initial_screen", model.initial_screen}, {"screens", screens}};
}

std::set<std::string> reachable_screens(const AppModel& model) {
  std::set<std::string> seen{model.initial_screen};
  std::deque<std::string> queue{model.initial_screen};
  while (!queue.empty()) {
    const auto id = queue.front();
    queue.pop_front();
    for (const auto& t : model.screen(id).transitions) {
      if (seen.insert(t.destination).second) queue.push_back(t.destination);
    }
  }
  return seen;
}

}  // namespace guiagent
