#include "guiagent/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace guiagent {

using nlohmann::json;

std::vector<TaskSpec> suite_from_json(const json& j) {
  const json& list = j.is_object() ? j.at("tasks") : j;
  if (!list.is_array()) throw std::invalid_argument("task suite must be a JSON array");
  std::vector<TaskSpec> suite;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& t = list[i];
    const std::string where = "task[" + std::to_string(i) + "]";
    TaskSpec s;
    try {
      s.task_id = t.at("task_id").get<std::string>();
      s.description = t.at("description").get<std::string>();
      s.app_id = t.at("app_id").get<std::string>();
      s.category = t.value("category", std::string("Uncategorized"));
      s.reference_actions = t.at("reference_actions").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    if (s.reference_actions.empty()) throw std::invalid_argument(where + ": reference_actions must not be empty");
    if (s.description.empty()) throw std::invalid_argument(where + ": description must not be empty");
    if (!ids.insert(s.task_id).second) throw std::invalid_argument(where + ": duplicate task_id '" + s.task_id + "'");
    suite.push_back(std::move(s));
  }
  return suite;
}

json suite_to_json(const std::vector<TaskSpec>& suite) {
  json out = json::array();
  for (const auto& s : suite) {
    out.push_back({{"task_id", s.task_id},
                   {"description", s.description},
                   {"app_id", s.app_id},
                   {"category", s.category},
                   {"reference_actions", s.reference_actions}});
  }
  return out;
}

std::vector<TaskSpec> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open task suite " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
  }
  return suite_from_json(doc);
}

// ---------------------------------------------------------------------------

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// Lowercases everything outside quoted names. A quote opens after a space and
// closes before a space or the end, so apostrophes inside names stay put.
std::string fold_outside_quotes(std::string_view s) {
  constexpr std::string_view kStart = "start the app ";
  if (s.size() >= kStart.size() && iequals(s.substr(0, kStart.size()), kStart)) {
    return std::string(kStart) + std::string(s.substr(kStart.size()));
  }
  std::string out;
  char open = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (open == 0) {
      if ((c == '\'' || c == '"') && (i == 0 || s[i - 1] == ' ')) open = c;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      if (c == open && (i + 1 == s.size() || s[i + 1] == ' ')) open = 0;
      out += c;
    }
  }
  return out;
}

std::string percent(double fraction) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << fraction * 100.0 << '%';
  return ss.str();
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

void finish_row(ReportRow& row, double progress_sum, std::size_t completed) {
  if (row.count == 0) return;
  row.average_progress = progress_sum / static_cast<double>(row.count);
  row.full_completion_rate = static_cast<double>(completed) / static_cast<double>(row.count);
}

}  // namespace

bool action_equal(std::string_view a, std::string_view b) {
  return fold_outside_quotes(collapse_whitespace(a)) == fold_outside_quotes(collapse_whitespace(b));
}

Progress completion_progress(const std::vector<std::string>& reference, const std::vector<std::string>& predicted) {
  if (reference.empty()) throw std::invalid_argument("reference sequence must not be empty");
  std::size_t i = 0;
  while (i < reference.size() && i < predicted.size() && action_equal(reference[i], predicted[i])) ++i;
  return {i, reference.size()};
}

TaskResult score_task(const TaskSpec& spec, const std::vector<std::string>& predicted,
                      std::optional<Termination> termination) {
  TaskResult r;
  r.task_id = spec.task_id;
  r.predicted_actions = predicted;
  r.progress = completion_progress(spec.reference_actions, predicted);
  r.fully_complete = r.progress.complete();
  r.termination = termination;
  return r;
}

std::string complexity_bucket(std::size_t steps) {
  if (steps <= 3) return "2~3 steps";
  if (steps <= 5) return "4~5 steps";
  return "6~13 steps";
}

ProgressReport aggregate(const std::vector<TaskSpec>& specs, const std::vector<TaskResult>& results) {
  std::map<std::string, const TaskSpec*> by_id;
  for (const auto& s : specs) {
    if (!by_id.emplace(s.task_id, &s).second) throw std::invalid_argument("duplicate task_id '" + s.task_id + "' in suite");
  }
  std::set<std::string> scored;
  for (const auto& r : results) {
    if (!by_id.count(r.task_id)) throw std::invalid_argument("result for unknown task_id '" + r.task_id + "'");
    if (!scored.insert(r.task_id).second) throw std::invalid_argument("duplicate result for task_id '" + r.task_id + "'");
  }
  for (const auto& s : specs) {
    if (!scored.count(s.task_id)) throw std::invalid_argument("missing result for task_id '" + s.task_id + "'");
  }

  struct Acc {
    ReportRow row;
    double sum = 0.0;
    std::size_t completed = 0;
  };
  auto add = [](Acc& acc, const TaskResult& r) {
    ++acc.row.count;
    acc.sum += r.progress.value();
    if (r.fully_complete) ++acc.completed;
  };

  std::vector<Acc> complexity;
  for (const char* label : {"2~3 steps", "4~5 steps", "6~13 steps"}) complexity.push_back({{label}, 0.0, 0});
  std::vector<Acc> category;
  Acc total{{"Total"}, 0.0, 0};

  for (const auto& r : results) {
    const TaskSpec& spec = *by_id.at(r.task_id);
    const auto bucket = complexity_bucket(spec.complexity());
    for (auto& acc : complexity) {
      if (acc.row.label == bucket) add(acc, r);
    }
    auto cat = std::find_if(category.begin(), category.end(), [&](const Acc& a) { return a.row.label == spec.category; });
    if (cat == category.end()) {
      category.push_back({{spec.category}, 0.0, 0});
      cat = category.end() - 1;
    }
    add(*cat, r);
    add(total, r);
  }

  // Category rows follow suite order rather than result order.
  std::vector<Acc> ordered_category;
  for (const auto& s : specs) {
    auto it = std::find_if(category.begin(), category.end(), [&](const Acc& a) { return a.row.label == s.category; });
    if (it != category.end()) {
      ordered_category.push_back(*it);
      category.erase(it);
    }
  }

  ProgressReport report;
  for (auto& acc : complexity) {
    finish_row(acc.row, acc.sum, acc.completed);
    report.complexity.push_back(acc.row);
  }
  for (auto& acc : ordered_category) {
    finish_row(acc.row, acc.sum, acc.completed);
    report.category.push_back(acc.row);
  }
  finish_row(total.row, total.sum, total.completed);
  report.total = total.row;
  report.results = results;
  return report;
}

std::string render_report_text(const ProgressReport& report) {
  auto table = [](const std::string& first_header, const std::vector<ReportRow>& rows, const ReportRow& total) {
    std::vector<std::array<std::string, 4>> cells;
    cells.push_back({first_header, "Number", "Average completion progress", "Fully completion rate"});
    for (const auto& r : rows) {
      cells.push_back({r.label, std::to_string(r.count), percent(r.average_progress), percent(r.full_completion_rate)});
    }
    cells.push_back({total.label, std::to_string(total.count), percent(total.average_progress),
                     percent(total.full_completion_rate)});
    std::array<std::size_t, 4> width{};
    for (const auto& row : cells) {
      for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    for (const auto& row : cells) {
      std::string line;
      for (std::size_t c = 0; c < 4; ++c) {
        line += row[c];
        if (c + 1 < 4) line += std::string(width[c] - row[c].size() + 3, ' ');
      }
      out << line << '\n';
    }
    return out.str();
  };
  return table("Task complexity", report.complexity, report.total) + "\n" +
         table("Task category", report.category, report.total);
}

json report_to_json(const ProgressReport& report) {
  auto row_json = [](const ReportRow& r) {
    return json{{"label", r.label},
                {"count", r.count},
                {"average_progress", round2(r.average_progress * 100.0)},
                {"full_completion_rate", round2(r.full_completion_rate * 100.0)}};
  };
  json out;
  out["complexity"] = json::array();
  for (const auto& r : report.complexity) out["complexity"].push_back(row_json(r));
  out["category"] = json::array();
  for (const auto& r : report.category) out["category"].push_back(row_json(r));
  out["total"] = row_json(report.total);
  out["tasks"] = json::array();
  for (const auto& r : report.results) {
    json t{{"task_id", r.task_id},
           {"matched", r.progress.matched},
           {"reference_length", r.progress.total},
           {"progress", r.progress.value()},
           {"fully_complete", r.fully_complete},
           {"predicted_actions", r.predicted_actions}};
    t["termination"] = r.termination ? json(termination_id(*r.termination)) : json(nullptr);
    out["tasks"].push_back(std::move(t));
  }
  return out;
}

SuiteRun run_suite(const std::vector<TaskSpec>& suite, const DeviceFactory& device_factory, LlmClient& llm,
                   const AgentConfig& cfg, std::size_t jobs) {
  std::vector<TaskTrace> traces(suite.size());
  auto run_one = [&](std::size_t i) {
    const auto& spec = suite[i];
    try {
      auto device = device_factory();
      traces[i] = run_task(spec.description, spec.app_id, *device, llm, cfg);
    } catch (const std::exception& e) {
      traces[i].task = spec.description;
      traces[i].app_id = spec.app_id;
      traces[i].config = cfg;
      traces[i].termination = Termination::device_error;
      traces[i].termination_detail = std::string("could not open a device session: ") + e.what();
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, suite.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < suite.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < suite.size(); i = next++) run_one(i);
      });
    }
    for (auto& t : workers) t.join();
  }

  std::vector<TaskResult> results;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    results.push_back(score_task(suite[i], traces[i].actions(), traces[i].termination));
  }
  return {aggregate(suite, results), std::move(traces)};
}

std::vector<OracleRule> faithful_oracle_rules(const std::vector<TaskSpec>& suite) {
  std::vector<OracleRule> rules;
  for (const auto& spec : suite) {
    const std::string task_line = "Task: " + spec.description + "\n";
    const auto& ref = spec.reference_actions;
    std::string history = "Previous actions:\n";
    for (std::size_t k = 1; k <= ref.size(); ++k) {
      history += ref[k - 1] + "\n";
      const std::string block = history + "\n";
      if (k == ref.size()) {
        rules.push_back({{task_line, block}, std::nullopt, "-1", 1});
        break;
      }
      auto next = parse_action_string(ref[k]);
      if (!next || next->kind == ActionKind::start_app) {
        throw std::invalid_argument("task " + spec.task_id + ": cannot derive an oracle reply for '" + ref[k] + "'");
      }
      rules.push_back({{task_line, block},
                       std::nullopt,
                       "{{action:" + std::string(action_kind_id(next->kind)) + ":" + next->name + "}}",
                       1});
      if (next->kind == ActionKind::edit) {
        const std::string question = "What should I enter to the view with the text '" + next->name + "'?";
        rules.push_back({{task_line, block, question}, std::nullopt, next->content.value_or(""), 2});
      }
    }
  }
  return rules;
}

}  // namespace guiagent
