#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>

#include "guiagent/agent.hpp"
#include "guiagent/app_model.hpp"
#include "guiagent/bench.hpp"
#include "guiagent/bridge.hpp"
#include "guiagent/simulator.hpp"

namespace guiagent::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string backend;
  std::string device;
  std::string out_dir;
  std::string record_path;
  std::optional<int> max_steps;
};

struct Settings {
  std::string backend;
  std::string device;
  fs::path out_dir = "guiagent-out";
  std::string record_path;
  AgentConfig agent;
  json http = json::object();
};

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed ") + what + " " + path.string() + ": " + e.what());
  }
}

// Config file keys: backend, device, out, record, agent{...}, http{...}.
// Flags override the file.
Settings resolve(const Options& opt) {
  Settings s;
  if (!opt.config_path.empty()) {
    json doc = read_json_file(opt.config_path, "config file");
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
      s.backend = doc.value("backend", std::string{});
      s.device = doc.value("device", std::string{});
      s.out_dir = doc.value("out", s.out_dir.string());
      s.record_path = doc.value("record", std::string{});
      if (doc.contains("agent")) s.agent = agent_config_from_json(doc["agent"]);
      if (doc.contains("http")) s.http = doc["http"];
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
  }
  if (!opt.backend.empty()) s.backend = opt.backend;
  if (!opt.device.empty()) s.device = opt.device;
  if (!opt.out_dir.empty()) s.out_dir = opt.out_dir;
  if (!opt.record_path.empty()) s.record_path = opt.record_path;
  if (opt.max_steps) s.agent.max_steps = *opt.max_steps;
  try {
    s.agent.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::pair<std::string, std::string> split_spec(const std::string& spec, const char* what) {
  if (spec.empty()) throw ConfigError(std::string("no ") + what + " selected");
  auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, {}};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

// Owns the backend chain (base client plus an optional recorder on top).
struct Backend {
  std::unique_ptr<LlmClient> base;
  std::unique_ptr<RecordingClient> recorder;
  fs::path record_path;

  LlmClient& client() { return recorder ? static_cast<LlmClient&>(*recorder) : *base; }

  void flush() {
    if (recorder) recorder->save(record_path);
  }
};

Backend make_backend(const Settings& s) {
  auto [kind, arg] = split_spec(s.backend, "backend");
  Backend b;
  if (kind == "http") {
    HttpConfig cfg = http_config_from_json(s.http);
    if (cfg.api_key.empty()) throw ConfigError("http backend needs an API key (GUIAGENT_API_KEY or http.api_key in the config file)");
    b.base = std::make_unique<HttpChatClient>(cfg);
  } else if (kind == "scripted") {
    if (arg.empty()) throw ConfigError("scripted backend needs a rules file: scripted:<path>");
    try {
      b.base = std::make_unique<ScriptedClient>(load_oracle_rules(arg));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (kind == "replay") {
    if (arg.empty()) throw ConfigError("replay backend needs a transcript: replay:<path>");
    if (!fs::exists(arg)) throw ConfigError("transcript not found: " + arg);
    try {
      b.base = std::make_unique<ReplayClient>(load_transcript(arg));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown backend '" + s.backend + "' (expected http, scripted:<rules> or replay:<transcript>)");
  }
  if (!s.record_path.empty()) {
    b.recorder = std::make_unique<RecordingClient>(*b.base);
    b.record_path = s.record_path;
  }
  return b;
}

struct DeviceSetup {
  std::shared_ptr<const AppCatalog> catalog;  // set for sim devices
  std::optional<BridgeAddress> bridge;

  DeviceFactory factory() const {
    if (catalog) {
      auto c = catalog;
      return [c] { return std::make_unique<SimulatorDevice>(c); };
    }
    auto addr = *bridge;
    return [addr] { return std::make_unique<BridgeClient>(addr); };
  }
};

DeviceSetup make_device(const Settings& s) {
  auto [kind, arg] = split_spec(s.device, "device");
  DeviceSetup d;
  if (kind == "sim") {
    if (arg.empty()) throw ConfigError("sim device needs an app model path: sim:<file or dir>");
    if (!fs::exists(arg)) throw ConfigError("app model path not found: " + arg);
    try {
      d.catalog = std::make_shared<const AppCatalog>(load_app_models(arg));
    } catch (const ModelError& e) {
      throw ConfigError(e.what());
    }
  } else if (kind == "bridge") {
    try {
      d.bridge = parse_bridge_address(arg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown device '" + s.device + "' (expected sim:<path> or bridge:<host:port>)");
  }
  return d;
}

std::vector<TaskSpec> read_suite(const std::string& path) {
  try {
    return load_suite(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

void write_reports(const fs::path& dir, const ProgressReport& report) {
  fs::create_directories(dir);
  write_text(dir / "report.txt", render_report_text(report));
  write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
}

int cmd_run(const Options& opt, const std::string& task, const std::string& app_id, const std::string& trace_name,
            std::ostream& out, std::ostream& err) {
  Settings s = resolve(opt);
  Backend backend = make_backend(s);
  DeviceSetup dev = make_device(s);
  if (dev.catalog && dev.catalog->find(app_id) == nullptr) throw ConfigError("no app model for '" + app_id + "'");

  auto device = dev.factory()();
  TaskTrace trace = run_task(task, app_id, *device, backend.client(), s.agent,
                             [&out](const TraceStep& step) { out << step.action << "\n" << std::flush; });
  backend.flush();

  fs::create_directories(s.out_dir);
  const fs::path trace_path = s.out_dir / trace_name;
  save_trace(trace_path, trace);
  out << "termination: " << termination_id(trace.termination);
  if (!trace.termination_detail.empty()) out << " (" << trace.termination_detail << ")";
  out << "\ntrace: " << trace_path.string() << "\n";
  if (trace.termination == Termination::model_declared_complete) return kOk;
  err << "task did not complete: " << termination_id(trace.termination) << "\n";
  return kTaskFailure;
}

int cmd_bench(const Options& opt, const std::string& suite_path, std::size_t jobs, std::ostream& out) {
  auto suite = read_suite(suite_path);
  Settings s = resolve(opt);
  Backend backend = make_backend(s);
  DeviceSetup dev = make_device(s);
  if (dev.bridge && jobs > 1) throw ConfigError("a bridge device serves one session; use --jobs 1");

  SuiteRun run = run_suite(suite, dev.factory(), backend.client(), s.agent, jobs);
  backend.flush();

  const fs::path traces = s.out_dir / "traces";
  fs::create_directories(traces);
  for (std::size_t i = 0; i < suite.size(); ++i) save_trace(traces / (suite[i].task_id + ".ndjson"), run.traces[i]);
  write_reports(s.out_dir, run.report);
  out << render_report_text(run.report);
  return kOk;
}

// Re-scores saved traces (<dir>/<task_id>.ndjson) without touching a device.
int cmd_score(const std::string& suite_path, const std::string& traces_dir, const std::string& out_dir,
              std::ostream& out) {
  auto suite = read_suite(suite_path);
  std::vector<TaskResult> results;
  for (const auto& spec : suite) {
    const fs::path p = fs::path(traces_dir) / (spec.task_id + ".ndjson");
    if (!fs::exists(p)) throw ConfigError("missing trace " + p.string());
    TaskTrace t = load_trace(p);
    results.push_back(score_task(spec, t.actions(), t.termination));
  }
  ProgressReport report = aggregate(suite, results);
  if (!out_dir.empty()) write_reports(out_dir, report);
  out << render_report_text(report);
  return kOk;
}

int cmd_prompt(const Options& opt, const std::string& app_id, const std::string& screen_id, const std::string& task,
               std::ostream& out) {
  Settings s = resolve(opt);
  DeviceSetup dev = make_device(s);
  if (!dev.catalog) throw ConfigError("prompt needs a sim device");
  const AppModel* model = dev.catalog->find(app_id);
  if (model == nullptr) throw ConfigError("no app model for '" + app_id + "'");
  if (!model->screens.contains(screen_id)) throw ConfigError("app '" + app_id + "' has no screen '" + screen_id + "'");

  SimulatorDevice device(dev.catalog);
  device.open_screen(app_id, screen_id);
  const StateDescription sd = describe_state(device.get_state(), static_cast<std::size_t>(s.agent.truncation_words));
  out << synthesize_choice_prompt(task, sd, {}).rendered << "\n";
  return kOk;
}

int cmd_inspect(const Options& opt, std::ostream& out) {
  Settings s = resolve(opt);
  DeviceSetup dev = make_device(s);
  if (!dev.catalog) throw ConfigError("inspect needs a sim device");
  for (const auto& id : dev.catalog->app_ids()) {
    const AppModel& m = *dev.catalog->find(id);
    const auto reachable = reachable_screens(m);
    std::size_t transitions = 0;
    for (const auto& [_, screen] : m.screens) transitions += screen.transitions.size();
    out << id << ": " << m.screens.size() << " screens, " << transitions << " transitions, initial '"
        << m.initial_screen << "'\n";
    for (const auto& [sid, screen] : m.screens) {
      out << "  " << sid << (reachable.contains(sid) ? "" : " (unreachable)") << ": "
          << normalize_tree(screen.elements).size() << " views\n";
    }
  }
  return kOk;
}

int cmd_make_oracle(const std::string& suite_path, const std::string& output, std::ostream& out) {
  auto suite = read_suite(suite_path);
  json rules = {{"rules", oracle_rules_to_json(faithful_oracle_rules(suite))}};
  if (output.empty() || output == "-") {
    out << rules.dump(2) << "\n";
  } else {
    write_text(output, rules.dump(2) + "\n");
  }
  return kOk;
}

int cmd_serve_bridge(const Options& opt, const std::string& app_id, std::uint16_t port, std::ostream& out) {
  Settings s = resolve(opt);
  DeviceSetup dev = make_device(s);
  if (!dev.catalog) throw ConfigError("serve-bridge needs a sim device");
  SimulatorDevice device(dev.catalog);
  if (!app_id.empty()) device.perform(Action::start_app(app_id));
  BridgeServer server(device, port);
  out << "listening on 127.0.0.1:" << server.port() << "\n" << std::flush;
  server.wait();
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LLM-driven GUI task automation"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--backend", opt.backend, "http | scripted:<rules> | replay:<transcript>");
  app.add_option("--device", opt.device, "sim:<model file or dir> | bridge:<host:port>");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--record", opt.record_path, "write an NDJSON transcript of every exchange");
  app.add_option("--max-steps", opt.max_steps, "maximum model-chosen actions per task")->check(CLI::PositiveNumber);

  std::string task, app_id, screen_id, suite_path, traces_dir, output, trace_name = "trace.ndjson";
  std::size_t jobs = 1;
  std::uint16_t port = 0;

  auto* run = app.add_subcommand("run", "run one task");
  run->add_option("--task", task, "task description")->required();
  run->add_option("--app", app_id, "app id")->required();
  run->add_option("--trace-name", trace_name, "trace file name inside --out");

  auto* bench = app.add_subcommand("bench", "run a task suite and write reports");
  bench->add_option("--suite,--seed-suite", suite_path, "task suite JSON")->required();
  bench->add_option("--jobs", jobs, "tasks run in parallel")->check(CLI::PositiveNumber);

  auto* score = app.add_subcommand("score", "re-score saved traces");
  score->add_option("--suite,--seed-suite", suite_path, "task suite JSON")->required();
  score->add_option("--traces", traces_dir, "directory of <task_id>.ndjson traces")->required();

  auto* prompt = app.add_subcommand("prompt", "print the choice prompt for a simulator screen");
  prompt->add_option("--app", app_id, "app id")->required();
  prompt->add_option("--screen", screen_id, "screen id")->required();
  prompt->add_option("--task", task, "task description")->required();

  auto* inspect = app.add_subcommand("inspect", "summarize app models");

  auto* oracle = app.add_subcommand("make-oracle", "write scripted rules that follow a suite's references");
  oracle->add_option("--suite,--seed-suite", suite_path, "task suite JSON")->required();
  oracle->add_option("-o,--output", output, "rules file (stdout when omitted)");

  auto* serve = app.add_subcommand("serve-bridge", "serve a simulator session over the bridge protocol");
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--app", app_id, "start this app before serving");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(opt, task, app_id, trace_name, out, err);
    if (*bench) return cmd_bench(opt, suite_path, jobs, out);
    if (*score) return cmd_score(suite_path, traces_dir, opt.out_dir, out);
    if (*prompt) return cmd_prompt(opt, app_id, screen_id, task, out);
    if (*inspect) return cmd_inspect(opt, out);
    if (*oracle) return cmd_make_oracle(suite_path, output, out);
    if (*serve) return cmd_serve_bridge(opt, app_id, port, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kTaskFailure;
  }
  return kConfigError;
}

}  // namespace guiagent::cli
