#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "guiagent/agent.hpp"
#include "guiagent/bench.hpp"
#include "guiagent/json_io.hpp"
#include "guiagent/simulator.hpp"

namespace py = pybind11;
using namespace guiagent;
using nlohmann::json;

// Structured values cross the boundary as JSON text; the Python package
// wraps these functions with json.loads/json.dumps.
namespace {

std::string dump(const json& j) { return j.dump(); }

std::string trace_ndjson(const TaskTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

std::vector<OracleRule> rules_from(const std::string& rules_json) { return oracle_rules_from_json(json::parse(rules_json)); }

AgentConfig config_from(const std::string& config_json) {
  auto cfg = agent_config_from_json(config_json.empty() ? json::object() : json::parse(config_json));
  cfg.validate();
  return cfg;
}

class Simulator {
 public:
  explicit Simulator(const std::filesystem::path& models)
      : catalog_(std::make_shared<AppCatalog>(load_app_models(models))), device_(catalog_) {}

  std::string state() { return dump(state_to_json(device_.get_state())); }
  std::string perform(const std::string& action_json) {
    auto r = device_.perform(action_from_json(json::parse(action_json)));
    return dump({{"success", r.success}, {"state_digest", r.state_digest}});
  }
  void open_screen(const std::string& app_id, const std::string& screen_id) { device_.open_screen(app_id, screen_id); }
  std::vector<std::string> app_ids() const { return catalog_->app_ids(); }

  std::string run_task(const std::string& task, const std::string& app_id, const std::string& rules_json,
                       const std::string& config_json) {
    ScriptedClient oracle(rules_from(rules_json));
    SimulatorDevice fresh(catalog_);
    return trace_ndjson(guiagent::run_task(task, app_id, fresh, oracle, config_from(config_json)));
  }

  std::string run_suite(const std::string& suite_json, const std::string& rules_json, const std::string& config_json,
                        std::size_t jobs) {
    auto suite = suite_from_json(json::parse(suite_json));
    ScriptedClient oracle(rules_from(rules_json));
    auto catalog = catalog_;
    auto run = guiagent::run_suite(
        suite, [catalog] { return std::make_unique<SimulatorDevice>(catalog); }, oracle, config_from(config_json), jobs);
    json traces = json::array();
    for (const auto& t : run.traces) traces.push_back(trace_ndjson(t));
    return dump({{"report", report_to_json(run.report)}, {"text", render_report_text(run.report)}, {"traces", traces}});
  }

 private:
  std::shared_ptr<AppCatalog> catalog_;
  SimulatorDevice device_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "guiagent core bindings";

  py::register_exception<DeviceError>(m, "DeviceError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("describe_state", [](const std::string& state_json, std::size_t max_words) {
    auto sd = describe_state(state_from_json(json::parse(state_json)), max_words);
    json bindings = json::array();
    for (const auto& b : sd.bindings) {
      bindings.push_back({{"action_id", b.action_id}, {"element_key", b.element_key}, {"kind", action_kind_id(b.kind)}});
    }
    return dump({{"text", sd.text}, {"bindings", bindings}, {"source_digest", sd.source_digest}});
  }, py::arg("state_json"), py::arg("max_words") = kDefaultMaxWords);

  m.def("choice_prompt", [](const std::string& task, const std::string& state_json,
                            const std::vector<std::string>& history) {
    return synthesize_choice_prompt(task, describe_state(state_from_json(json::parse(state_json))), history).rendered;
  }, py::arg("task"), py::arg("state_json"), py::arg("history") = std::vector<std::string>{});

  m.def("edit_prompt", [](const std::string& task, const std::string& state_json, const std::string& element_key,
                          const std::vector<std::string>& history) {
    const auto state = state_from_json(json::parse(state_json));
    const auto e = find_visible_element(state, element_key);
    if (!e) throw py::key_error("no visible element '" + element_key + "'");
    const auto sd = describe_state(state);
    return synthesize_edit_prompt(*e, task, &sd, history).rendered;
  }, py::arg("task"), py::arg("state_json"), py::arg("element_key"), py::arg("history") = std::vector<std::string>{});

  // Returns the action id, or -1 when the model says the task is complete.
  m.def("parse_choice", [](const std::string& reply, int num_actions) {
    auto d = parse_choice(reply, num_actions);
    if (const auto* c = std::get_if<Choice>(&d)) return c->action_id;
    return -1;
  }, py::arg("reply"), py::arg("num_actions"));

  m.def("parse_edit_text", [](const std::string& reply) { return std::get<EditText>(parse_edit_text(reply)).content; });

  m.def("action_equal", &action_equal);
  m.def("completion_progress", [](const std::vector<std::string>& reference, const std::vector<std::string>& predicted) {
    auto p = completion_progress(reference, predicted);
    return std::make_pair(p.matched, p.total);
  });
  m.def("complexity_bucket", &complexity_bucket);
  m.def("faithful_oracle_rules", [](const std::string& suite_json) {
    return dump(oracle_rules_to_json(faithful_oracle_rules(suite_from_json(json::parse(suite_json)))));
  });

  py::class_<Simulator>(m, "Simulator")
      .def(py::init<const std::filesystem::path&>(), py::arg("models"))
      .def("state", &Simulator::state)
      .def("perform", &Simulator::perform)
      .def("open_screen", &Simulator::open_screen)
      .def("app_ids", &Simulator::app_ids)
      .def("run_task", &Simulator::run_task, py::arg("task"), py::arg("app_id"), py::arg("rules_json"),
           py::arg("config_json") = "")
      .def("run_suite", &Simulator::run_suite, py::arg("suite_json"), py::arg("rules_json"),
           py::arg("config_json") = "", py::arg("jobs") = 1);
}
