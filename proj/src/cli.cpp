#include "stmcheck/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "stmcheck/explorer.hpp"
#include "stmcheck/golden.hpp"
#include "stmcheck/opacity.hpp"
#include "stmcheck/properties.hpp"
#include "stmcheck/report.hpp"

namespace stmcheck {

namespace {

struct GlobalOptions {
  std::string format = "text";
  std::size_t max_states = kDefaultMaxStates;

  bool json() const { return format == "json"; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// `arg` names a file if one exists at that path, otherwise it is the history text.
History load_history(const std::string& arg) {
  std::error_code ec;
  if (!arg.empty() && std::filesystem::is_regular_file(arg, ec)) return parse_history(read_file(arg));
  return parse_history(arg);
}

Workload load_workload(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("workload '" + path + "': " + e.what());
  }
  return workload_from_json(j);
}

Mode parse_mode(const std::string& m) { return m == "coarse" ? Mode::Coarse : Mode::Fine; }

bool wants(const std::string& definition, Definition d) {
  return definition == "both" || definition == definition_name(d);
}

int cmd_check_history(const GlobalOptions& g, const std::string& history_arg, const std::string& definition,
                      std::ostream& out) {
  const History h = load_history(history_arg);
  if (definition == "value" && !h.annotated()) throw Error("value-based opacity needs a value-annotated history");

  std::optional<Verdict> conflict;
  std::optional<Verdict> value;
  if (wants(definition, Definition::Conflict)) conflict = check_conflict_opacity(h);
  if (wants(definition, Definition::Value) && h.annotated()) value = check_value_opacity(h);
  const bool ok = (!conflict || conflict->opaque) && (!value || value->opaque);

  if (g.json()) {
    if (definition == "both") {
      out << nlohmann::json{{"conflict", verdict_to_json(*conflict)},
                            {"value", value ? verdict_to_json(*value) : nlohmann::json(nullptr)}}
                 .dump(2)
          << '\n';
    } else {
      out << verdict_to_json(conflict ? *conflict : *value).dump(2) << '\n';
    }
  } else {
    out << "history: " << render(h) << '\n';
    if (conflict) out << verdict_to_text(*conflict) << '\n';
    if (value) {
      out << verdict_to_text(*value) << '\n';
    } else if (wants(definition, Definition::Value)) {
      out << "value: skipped (history carries no values)\n";
    }
  }
  return ok ? kExitOk : kExitViolation;
}

struct OpacitySweep {
  Definition definition;
  std::size_t opaque = 0;
  std::vector<std::pair<History, Verdict>> violations;  // shortest first
};

OpacitySweep sweep(const ReachableSet& rs, Definition d) {
  OpacitySweep s{d, 0, {}};
  for (const auto& h : rs.histories) {
    auto v = d == Definition::Conflict ? check_conflict_opacity(h) : check_value_opacity(h);
    if (v.opaque) {
      ++s.opaque;
    } else {
      s.violations.emplace_back(h, std::move(v));
    }
  }
  std::stable_sort(s.violations.begin(), s.violations.end(),
                   [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
  return s;
}

int cmd_explore(const GlobalOptions& g, const std::string& workload_path, const std::string& mode,
                bool check_opacity, const std::string& definition, const std::string& out_path, std::ostream& out) {
  const Workload w = load_workload(workload_path);
  const auto rs = explore(w, parse_mode(mode), g.max_states);

  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write '" + out_path + "'");
    write_history_lines(f, rs);
  }

  std::vector<OpacitySweep> sweeps;
  if (check_opacity && !rs.partial) {
    for (auto d : {Definition::Conflict, Definition::Value}) {
      if (wants(definition, d)) sweeps.push_back(sweep(rs, d));
    }
  }
  const bool violation = std::any_of(sweeps.begin(), sweeps.end(), [](const auto& s) { return !s.violations.empty(); });

  constexpr std::size_t kListed = 20;
  if (g.json()) {
    nlohmann::json j{{"stats", stats_to_json(rs)}};
    if (check_opacity) {
      auto arr = nlohmann::json::array();
      for (const auto& s : sweeps) {
        auto listed = nlohmann::json::array();
        for (std::size_t i = 0; i < std::min(kListed, s.violations.size()); ++i) {
          listed.push_back({{"history", render(s.violations[i].first)}, {"verdict", verdict_to_json(s.violations[i].second)}});
        }
        arr.push_back({{"definition", definition_name(s.definition)},
                       {"opaque", s.opaque},
                       {"not_opaque", s.violations.size()},
                       {"violations", listed}});
      }
      j["opacity"] = arr;
    }
    out << j.dump(2) << '\n';
  } else {
    out << "mode " << mode_name(rs.mode) << ": " << rs.histories.size() << " histories, "
        << rs.stats.explored_states << " states, " << rs.stats.maximal_traces << " maximal traces"
        << (rs.partial ? " (PARTIAL: state budget exhausted)" : "") << '\n';
    for (const auto& s : sweeps) {
      out << definition_name(s.definition) << ": " << s.opaque << " opaque, " << s.violations.size() << " not opaque\n";
      if (!s.violations.empty()) {
        out << "  first violation: " << render(s.violations.front().first) << "\n  "
            << verdict_to_text(s.violations.front().second) << '\n';
      }
    }
  }
  if (rs.partial) return kExitBudget;
  return violation ? kExitViolation : kExitOk;
}

std::vector<Property> parse_properties(const std::string& list) {
  std::vector<Property> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_property(item));
  }
  if (out.empty()) throw Error("no properties requested");
  return out;
}

int cmd_check_properties(const GlobalOptions& g, const std::string& workload_path, const std::string& list,
                         std::ostream& out) {
  const auto props = parse_properties(list);
  const Workload w = load_workload(workload_path);
  const auto fine = explore(w, Mode::Fine, g.max_states);
  fine.require_complete("check-properties");

  std::vector<PropertyReport> reports;
  for (auto p : props) {
    switch (p) {
      case Property::P1: reports.push_back(check_p1(fine)); break;
      case Property::P3: reports.push_back(check_p3(fine)); break;
      case Property::P4Strict: reports.push_back(check_p4(fine, P4Interpretation::Strict, g.max_states)); break;
      case Property::P4Interleaved: reports.push_back(check_p4(fine, P4Interpretation::Interleaved)); break;
      case Property::AbortIsolation: reports.push_back(check_abort_isolation(fine, g.max_states)); break;
    }
  }
  const bool all = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.holds; });

  if (g.json()) {
    auto arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(w, r));
    out << nlohmann::json{{"stats", stats_to_json(fine)}, {"reports", arr}}.dump(2) << '\n';
  } else {
    for (const auto& r : reports) out << report_to_text(w, r);
  }
  return all ? kExitOk : kExitViolation;
}

int cmd_repro(const GlobalOptions& g, const std::string& name, std::ostream& out) {
  std::vector<golden::ReproResult> results;
  if (name == "all") {
    for (const auto& n : golden::repro_names()) results.push_back(golden::run_repro(n));
  } else {
    results.push_back(golden::run_repro(name));
  }
  const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  if (g.json()) {
    auto arr = nlohmann::json::array();
    for (const auto& r : results) arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& r : results) out << (r.passed ? "PASS " : "FAIL ") << r.name << '\n' << r.detail;
  }
  return all ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Opacity workbench for the CoreDSTM transactional memory algorithm"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--max-states", g.max_states, "State budget for explorations");

  std::string history_arg;
  std::string definition = "both";
  auto* check_history = app.add_subcommand("check-history", "Decide opacity of one history");
  check_history->add_option("--history", history_arg, "History text, or a file holding it")->required();
  check_history->add_option("--definition", definition)->check(CLI::IsMember({"conflict", "value", "both"}));

  std::string workload_path;
  std::string mode = "fine";
  bool check_opacity = false;
  std::string out_path;
  std::string explore_definition = "both";
  auto* explore_cmd = app.add_subcommand("explore", "Enumerate the histories of a workload");
  explore_cmd->add_option("--workload", workload_path, "Workload JSON file")->required();
  explore_cmd->add_option("--mode", mode)->check(CLI::IsMember({"fine", "coarse"}));
  explore_cmd->add_flag("--check-opacity", check_opacity, "Classify every explored history");
  explore_cmd->add_option("--definition", explore_definition)->check(CLI::IsMember({"conflict", "value", "both"}));
  explore_cmd->add_option("--out", out_path, "Write histories as JSON lines");

  std::string props_workload;
  std::string props = "p1,p3,p4-strict,p4-interleaved,abort-isolation";
  auto* check_props = app.add_subcommand("check-properties", "Check P1, P3, P4 and abort isolation");
  check_props->add_option("--workload", props_workload, "Workload JSON file")->required();
  check_props->add_option("--properties", props, "Comma-separated property names");

  std::string repro_name;
  auto* repro = app.add_subcommand("repro", "Run a golden case by name, or all of them");
  repro->add_option("name", repro_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*check_history) return cmd_check_history(g, history_arg, definition, out);
    if (*explore_cmd) return cmd_explore(g, workload_path, mode, check_opacity, explore_definition, out_path, out);
    if (*check_props) return cmd_check_properties(g, props_workload, props, out);
    if (*repro) return cmd_repro(g, repro_name, out);
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace stmcheck
