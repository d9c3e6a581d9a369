#ifndef STMCHECK_REPORT_HPP
#define STMCHECK_REPORT_HPP

#include <string>

#include "json.hpp"

#include "stmcheck/explorer.hpp"
#include "stmcheck/opacity.hpp"
#include "stmcheck/properties.hpp"

namespace stmcheck {

std::string_view definition_name(Definition d);

nlohmann::json verdict_to_json(const Verdict& v);
std::string verdict_to_text(const Verdict& v);

nlohmann::json schedule_to_json(const std::vector<ScheduleStep>& schedule);
nlohmann::json counterexample_to_json(const Workload& w, const Counterexample& c);
nlohmann::json report_to_json(const Workload& w, const PropertyReport& r);
std::string report_to_text(const Workload& w, const PropertyReport& r);

nlohmann::json stats_to_json(const ReachableSet& rs);

/// One JSON string per history in the text syntax, then a stats object.
void write_history_lines(std::ostream& os, const ReachableSet& rs);

}  // namespace stmcheck

#endif  // STMCHECK_REPORT_HPP
