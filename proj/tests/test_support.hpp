#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "guiagent/app_model.hpp"
#include "guiagent/simulator.hpp"
#include "guiagent/ui_model.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return GUIAGENT_DATA_DIR; }
inline std::filesystem::path test_dir() { return GUIAGENT_TEST_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const guiagent::AppCatalog> bundled_catalog() {
  static auto catalog = std::make_shared<const guiagent::AppCatalog>(guiagent::load_app_models(data_dir() / "apps"));
  return catalog;
}

inline guiagent::UiElement leaf(std::string key, std::optional<std::string> text, guiagent::ElementFlags flags,
                                std::optional<std::string> desc = std::nullopt) {
  guiagent::UiElement e;
  e.element_key = std::move(key);
  e.class_name = "View";
  e.text = std::move(text);
  e.content_description = std::move(desc);
  e.bounds = {0, 0, 10, 10};
  e.flags = flags;
  return e;
}

// Random tree with at most max_nodes nodes. Keys are "n0", "n1", ... in
// creation order so tests can refer to them.
class TreeGen {
 public:
  explicit TreeGen(std::uint32_t seed) : rng_(seed) {}

  guiagent::UiElement tree(int max_nodes) {
    budget_ = 1 + static_cast<int>(rng_() % static_cast<unsigned>(max_nodes));
    next_ = 0;
    return node();
  }

  std::mt19937& rng() { return rng_; }

 private:
  guiagent::UiElement node() {
    guiagent::UiElement e;
    e.element_key = "n" + std::to_string(next_++);
    --budget_;
    e.class_name = pick({"View", "Button", "TextView", ""});
    if (coin(2)) e.text = pick({"OK", "Sort by", "city, country", "", "a b c"});
    if (coin(3)) e.content_description = pick({"Add city", "Extras", ""});
    e.flags = guiagent::ElementFlags::from_bits(static_cast<std::uint8_t>(rng_() & 0x7f));
    if (!e.flags.has(guiagent::ElementFlag::checkable)) e.flags.set(guiagent::ElementFlag::checked, false);
    e.visible = !coin(4);
    e.bounds = {0, 0, 100, 40};
    while (budget_ > 0 && coin(2)) e.children.push_back(node());
    return e;
  }

  bool coin(unsigned one_in) { return rng_() % one_in == 0; }

  std::string pick(std::initializer_list<const char*> options) {
    auto it = options.begin();
    std::advance(it, rng_() % options.size());
    return *it;
  }

  std::mt19937 rng_;
  int budget_ = 0;
  int next_ = 0;
};

}  // namespace testing_support
