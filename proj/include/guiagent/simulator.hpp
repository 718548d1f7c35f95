#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guiagent/app_model.hpp"
#include "guiagent/device.hpp"

namespace guiagent {

// Immutable set of app models shared by simulator sessions.
class AppCatalog {
 public:
  AppCatalog() = default;
  explicit AppCatalog(std::vector<AppModel> models);

  void add(AppModel model);
  const AppModel* find(const std::string& app_id) const;
  std::vector<std::string> app_ids() const;

 private:
  std::map<std::string, AppModel> models_;
};

// In-process device driven by declarative app models. Each instance is one
// session; start_app resets all per-session state for that app.
class SimulatorDevice final : public Device {
 public:
  explicit SimulatorDevice(std::shared_ptr<const AppCatalog> catalog);

  UiState get_state() override;
  ActionResult perform(const Action& action) override;

  bool has_session() const { return current_.has_value(); }
  const std::string& current_screen() const;
  // Jumps straight to a screen; used by prompt dumps and tests.
  void open_screen(const std::string& app_id, const std::string& screen_id);

 private:
  struct ScreenState {
    std::map<std::string, std::string> fields;
    std::map<std::string, bool> checked;
    std::size_t scroll_offset = 0;
  };
  struct Session {
    const AppModel* model = nullptr;
    std::string screen;
    std::map<std::string, ScreenState> screens;
  };

  ScreenState& screen_state(const std::string& screen_id);
  UiState render() const;

  std::shared_ptr<const AppCatalog> catalog_;
  std::optional<Session> current_;
};

}  // namespace guiagent
