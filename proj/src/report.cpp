#include "stmcheck/report.hpp"

#include <ostream>
#include <sstream>
#include <type_traits>
#include <variant>

namespace stmcheck {

namespace {

nlohmann::json ids(const std::vector<TxId>& txs) {
  auto out = nlohmann::json::array();
  for (TxId t : txs) out.push_back(t.value);
  return out;
}

std::string join_ids(const std::vector<TxId>& txs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(txs[i].value);
  }
  return out;
}

std::string quoted(const History& h) { return "\"" + render(h) + "\""; }

}  // namespace

std::string_view definition_name(Definition d) { return d == Definition::Conflict ? "conflict" : "value"; }

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j;
  j["opaque"] = v.opaque;
  j["definition"] = definition_name(v.definition);
  j["witness"] = v.witness ? ids(*v.witness) : nlohmann::json(nullptr);
  j["cycle"] = v.cycle ? ids(*v.cycle) : nlohmann::json(nullptr);
  j["illegal_read_index"] = v.illegal_read ? nlohmann::json(*v.illegal_read) : nlohmann::json(nullptr);
  return j;
}

std::string verdict_to_text(const Verdict& v) {
  std::string out = std::string(definition_name(v.definition)) + ": ";
  if (v.opaque) {
    out += "opaque";
    if (v.witness) out += ", witness " + join_ids(*v.witness, "<");
  } else {
    out += "NOT opaque";
    if (v.cycle) out += ", cycle " + join_ids(*v.cycle, "->") + "->" + std::to_string(v.cycle->front().value);
    if (v.illegal_read) out += ", no order justifies the read at index " + std::to_string(*v.illegal_read);
  }
  return out;
}

nlohmann::json schedule_to_json(const std::vector<ScheduleStep>& schedule) {
  auto out = nlohmann::json::array();
  for (const auto& s : schedule) out.push_back({{"tx", s.tx.value}, {"label", s.label}});
  return out;
}

nlohmann::json counterexample_to_json(const Workload& w, const Counterexample& c) {
  return std::visit(
      [&](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, P1Failure>) {
          return {{"history", render(x.history)},
                  {"kept", ids({x.kept.begin(), x.kept.end()})},
                  {"projection", render(x.projection)}};
        } else if constexpr (std::is_same_v<T, P3Failure>) {
          return {{"history", render(x.history)},
                  {"vars", std::vector<VarId>(x.vars.begin(), x.vars.end())},
                  {"projection", render(x.projection)}};
        } else if constexpr (std::is_same_v<T, P4Instance>) {
          std::vector<std::string> candidates;
          for (const auto& h : x.candidates) candidates.push_back(render(h));
          return {{"prefix", render(x.prefix)},
                  {"statement", to_string(x.next)},
                  {"extension", render(x.prefix.appended(x.next))},
                  {"candidates", candidates}};
        } else {
          return {{"victim", x.victim.value},
                  {"observer", x.observer.value},
                  {"cell", describe(w, x.cell)},
                  {"change_step", x.change_step},
                  {"observe_step", x.observe_step},
                  {"abort_step", x.abort_step},
                  {"history", render(x.history)},
                  {"schedule", schedule_to_json(x.schedule)}};
        }
      },
      c);
}

nlohmann::json report_to_json(const Workload& w, const PropertyReport& r) {
  nlohmann::json j;
  j["property"] = property_name(r.property);
  j["holds"] = r.holds;
  j["checked_count"] = r.checked_count;
  j["failure_count"] = r.failures.size();
  j["counterexample"] = r.counterexample() ? counterexample_to_json(w, *r.counterexample()) : nlohmann::json(nullptr);
  return j;
}

std::string report_to_text(const Workload& w, const PropertyReport& r) {
  std::ostringstream os;
  os << property_name(r.property) << ": " << (r.holds ? "holds" : "FAILS") << " (" << r.checked_count
     << " instances checked";
  if (!r.holds) os << ", " << r.failures.size() << " failing";
  os << ")\n";
  if (const auto* c = r.counterexample()) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, P1Failure>) {
            os << "  history    " << quoted(x.history) << "\n  keep txs   {"
               << join_ids({x.kept.begin(), x.kept.end()}, ",") << "}\n  projection " << quoted(x.projection)
               << " is not a history of the workload\n";
          } else if constexpr (std::is_same_v<T, P3Failure>) {
            os << "  history    " << quoted(x.history) << "\n  vars       {";
            bool first = true;
            for (const auto& v : x.vars) {
              os << (first ? "" : ",") << v;
              first = false;
            }
            os << "}\n  projection " << quoted(x.projection) << " is not a history of the restricted workload\n";
          } else if constexpr (std::is_same_v<T, P4Instance>) {
            os << "  h      " << quoted(x.prefix) << "\n  s      " << to_string(x.next) << "\n";
            for (const auto& h : x.candidates) os << "  h'     " << quoted(h) << " : h'.s not admitted\n";
          } else {
            os << "  tx " << x.victim.value << " changed " << describe(w, x.cell) << " at step " << x.change_step
               << "\n  tx " << x.observer.value << " observed it at step " << x.observe_step
               << " without aborting\n  tx " << x.victim.value << " aborted at step " << x.abort_step
               << "\n  history " << quoted(x.history) << "\n  schedule:\n";
            for (std::size_t i = 0; i < x.schedule.size(); ++i) {
              os << "    " << i << ": tx" << x.schedule[i].tx.value << " " << x.schedule[i].label << "\n";
            }
          }
        },
        *c);
  }
  return os.str();
}

nlohmann::json stats_to_json(const ReachableSet& rs) {
  return {{"mode", mode_name(rs.mode)},
          {"explored_states", rs.stats.explored_states},
          {"dedup_hits", rs.stats.dedup_hits},
          {"maximal_traces", rs.stats.maximal_traces},
          {"histories", rs.histories.size()},
          {"partial", rs.partial}};
}

void write_history_lines(std::ostream& os, const ReachableSet& rs) {
  for (const auto& h : rs.histories) os << nlohmann::json(render(h)).dump() << '\n';
  os << nlohmann::json{{"stats", stats_to_json(rs)}}.dump() << '\n';
}

}  // namespace stmcheck
