#ifndef STMCHECK_PROPERTIES_HPP
#define STMCHECK_PROPERTIES_HPP

// Premise checks of the (2,2) reduction over finite explored history sets,
// plus abort isolation over instrumented fine-grained traces.
//
// Membership questions ("is h a history of M") are asked of the value-free
// shapes of the explored histories, since the properties are stated for
// histories without values.

#include <cstddef>
#include <optional>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "stmcheck/explorer.hpp"
#include "stmcheck/history.hpp"

namespace stmcheck {

enum class Property { P1, P3, P4Strict, P4Interleaved, AbortIsolation };

std::string_view property_name(Property p);
/// Accepts the names printed by property_name. Throws Error otherwise.
Property parse_property(std::string_view name);

/// project_tx(history, kept) is not a history of the workload.
struct P1Failure {
  History history;
  std::set<TxId> kept;
  History projection;
};

/// project_vars(history, vars) is not a history of the restricted workload.
struct P3Failure {
  History history;
  std::set<VarId> vars;
  History projection;
};

/// prefix·next is a history, prefix is opaque with `next`'s transaction its
/// only live one, yet no sequential strictly equivalent candidate·next is admitted.
struct P4Instance {
  History prefix;
  Statement next;
  std::vector<History> candidates;
};

struct AbortIsolationViolation {
  TxId victim;    // the transaction that aborts
  TxId observer;  // reads a cell last changed by the victim, does not abort in that step
  Cell cell;
  std::size_t change_step = 0;
  std::size_t observe_step = 0;
  std::size_t abort_step = 0;
  std::vector<ScheduleStep> schedule;
  History history;
};

using Counterexample = std::variant<P1Failure, P3Failure, P4Instance, AbortIsolationViolation>;

struct PropertyReport {
  Property property = Property::P1;
  bool holds = true;
  std::size_t checked_count = 0;
  /// Every failing instance in enumeration order (abort isolation stops at the first).
  std::vector<Counterexample> failures;

  const Counterexample* counterexample() const { return failures.empty() ? nullptr : &failures.front(); }
};

PropertyReport check_p1(const ReachableSet& rs);

/// Every nonempty subset of the workload's variables, smallest first.
std::vector<std::set<VarId>> nonempty_var_subsets(const Workload& w);

/// Each V must be a nonempty subset of the workload's variables.
PropertyReport check_p3(const ReachableSet& rs, const std::vector<std::set<VarId>>& var_subsets);
PropertyReport check_p3(const ReachableSet& rs);

enum class P4Interpretation { Strict, Interleaved };

/// `fine` must be a fine-granularity set. Strict admits extensions from the
/// coarse-granularity set of the same workload (explored here), Interleaved
/// from `fine` itself.
PropertyReport check_p4(const ReachableSet& fine, P4Interpretation interpretation,
                        std::size_t max_states = kDefaultMaxStates);
PropertyReport check_p4(const ReachableSet& fine, const ReachableSet& admitting, Property as);

/// Evaluates one instance against `admitting`. Returns nullopt when some
/// candidate·next is admitted; the instance with all candidates otherwise.
/// Throws Error when the premise does not hold.
std::optional<P4Instance> check_p4_instance(const ReachableSet& admitting, const History& prefix, const Statement& next);
bool p4_premise_holds(const History& prefix, const Statement& next);

/// All abort-isolation violations visible in one replayed fine trace.
std::vector<AbortIsolationViolation> find_abort_isolation_violations(const Workload& w, const Trace& tr);

/// Searches the fine-granularity executions of rs.workload for a violation.
PropertyReport check_abort_isolation(const ReachableSet& rs, std::size_t max_states = kDefaultMaxStates);

}  // namespace stmcheck

#endif  // STMCHECK_PROPERTIES_HPP
