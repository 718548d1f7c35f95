#include "guiagent/simulator.hpp"

#include <functional>

namespace guiagent {

AppCatalog::AppCatalog(std::vector<AppModel> models) {
  for (auto& m : models) add(std::move(m));
}

void AppCatalog::add(AppModel model) {
  auto id = model.app_id;
  models_.insert_or_assign(std::move(id), std::move(model));
}

const AppModel* AppCatalog::find(const std::string& app_id) const {
  auto it = models_.find(app_id);
  return it == models_.end() ? nullptr : &it->second;
}

std::vector<std::string> AppCatalog::app_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, m] : models_) ids.push_back(id);
  return ids;
}

SimulatorDevice::SimulatorDevice(std::shared_ptr<const AppCatalog> catalog) : catalog_(std::move(catalog)) {}

const std::string& SimulatorDevice::current_screen() const {
  if (!current_) throw DeviceError(DeviceErrorKind::no_session, "no app has been started");
  return current_->screen;
}

SimulatorDevice::ScreenState& SimulatorDevice::screen_state(const std::string& screen_id) {
  auto it = current_->screens.find(screen_id);
  if (it != current_->screens.end()) return it->second;
  ScreenState fresh;
  fresh.fields = current_->model->screen(screen_id).field_values;
  return current_->screens.emplace(screen_id, std::move(fresh)).first->second;
}

void SimulatorDevice::open_screen(const std::string& app_id, const std::string& screen_id) {
  const AppModel* model = catalog_->find(app_id);
  if (!model) throw DeviceError(DeviceErrorKind::unknown_app, "unknown app '" + app_id + "'");
  if (!model->screens.count(screen_id)) {
    throw DeviceError(DeviceErrorKind::unknown_target, "unknown screen '" + screen_id + "' in app '" + app_id + "'");
  }
  current_ = Session{model, screen_id, {}};
}

UiState SimulatorDevice::render() const {
  const Screen& screen = current_->model->screen(current_->screen);
  UiElement root = screen.elements;

  const ScreenState* st = nullptr;
  if (auto it = current_->screens.find(current_->screen); it != current_->screens.end()) st = &it->second;
  const auto& fields = st ? st->fields : screen.field_values;

  std::function<void(UiElement&)> apply = [&](UiElement& e) {
    if (e.flags.has(ElementFlag::editable)) {
      auto f = fields.find(e.element_key);
      if (f != fields.end() && !f->second.empty()) e.text = f->second;
    }
    if (st) {
      if (auto c = st->checked.find(e.element_key); c != st->checked.end()) {
        e.flags.set(ElementFlag::checked, c->second);
      }
    }
    if (screen.scroll && e.element_key == screen.scroll->container) {
      const std::size_t offset = st ? st->scroll_offset : 0;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i < offset || i >= offset + screen.scroll->window) e.children[i].visible = false;
      }
    }
    for (auto& c : e.children) apply(c);
  };
  apply(root);
  return make_state(current_->model->app_id, current_->screen, std::move(root));
}

UiState SimulatorDevice::get_state() {
  if (!current_) throw DeviceError(DeviceErrorKind::no_session, "no app has been started");
  return render();
}

ActionResult SimulatorDevice::perform(const Action& action) {
  try {
    action.validate();
  } catch (const std::invalid_argument& e) {
    throw DeviceError(DeviceErrorKind::invalid_action, e.what());
  }

  if (action.kind == ActionKind::start_app) {
    const AppModel* model = catalog_->find(*action.app_id);
    if (!model) throw DeviceError(DeviceErrorKind::unknown_app, "unknown app '" + *action.app_id + "'");
    current_ = Session{model, model->initial_screen, {}};
    return {true, render().state_digest};
  }

  if (!current_) throw DeviceError(DeviceErrorKind::no_session, "no app has been started");
  const UiState before = render();
  auto target = find_visible_element(before, *action.target);
  if (!target) {
    throw DeviceError(DeviceErrorKind::unknown_target,
                      "no visible element '" + *action.target + "' on screen '" + current_->screen + "'");
  }
  if (!supports(*target, action.kind)) {
    throw DeviceError(DeviceErrorKind::unsupported_kind, "view '" + element_display_name(*target) + "' cannot " +
                                                             std::string(action_kind_label(action.kind)));
  }

  const std::string source = current_->screen;
  const Screen& screen = current_->model->screen(source);
  ScreenState& st = screen_state(source);

  switch (action.kind) {
    case ActionKind::edit:
      st.fields[*action.target] = *action.text;
      break;
    case ActionKind::check:
      st.checked[*action.target] = !target->flags.has(ElementFlag::checked);
      break;
    case ActionKind::scroll_up:
    case ActionKind::scroll_down:
      if (screen.scroll && screen.scroll->container == *action.target) {
        std::size_t count = 0;
        std::function<const UiElement*(const UiElement&)> find = [&](const UiElement& e) -> const UiElement* {
          if (e.element_key == *action.target) return &e;
          for (const auto& c : e.children) {
            if (auto* r = find(c)) return r;
          }
          return nullptr;
        };
        if (const auto* container = find(screen.elements)) count = container->children.size();
        const std::size_t max_offset = count > screen.scroll->window ? count - screen.scroll->window : 0;
        if (action.kind == ActionKind::scroll_down && st.scroll_offset < max_offset) ++st.scroll_offset;
        if (action.kind == ActionKind::scroll_up && st.scroll_offset > 0) --st.scroll_offset;
      }
      break;
    default:
      break;
  }

  for (const auto& t : screen.transitions) {
    if (t.element_key != *action.target || t.kind != action.kind) continue;
    if (t.guard && !t.guard->holds(st.fields)) continue;
    for (const auto& eff : t.effects) {
      screen_state(eff.screen.value_or(source)).fields[eff.field] = eff.value;
    }
    current_->screen = t.destination;
    break;
  }

  return {true, render().state_digest};
}

}  // namespace guiagent
