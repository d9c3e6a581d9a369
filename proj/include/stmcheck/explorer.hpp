#ifndef STMCHECK_EXPLORER_HPP
#define STMCHECK_EXPLORER_HPP

#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <vector>

#include "stmcheck/coredstm.hpp"
#include "stmcheck/history.hpp"
#include "stmcheck/workload.hpp"

namespace stmcheck {

inline constexpr std::size_t kDefaultMaxStates = 5'000'000;

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

struct ExploreOptions {
  Mode mode = Mode::Fine;
  std::size_t max_states = kDefaultMaxStates;
  /// Off only for cross-checking on tiny workloads: every path is expanded.
  bool memoize = true;
  /// Called for every transition taken, before memoization cuts the successor.
  std::function<void(const Config& before, TxId t, const Config& after)> on_transition;
};

struct ExploreStats {
  std::size_t explored_states = 0;  // distinct configs expanded
  std::size_t dedup_hits = 0;       // transitions into an already expanded config
  std::size_t maximal_traces = 0;   // configs with no enabled step, counted once each
};

/// Histories of a workload under one granularity, closed under prefixes.
struct ReachableSet {
  Workload workload;
  Mode mode = Mode::Fine;
  std::set<History> histories;  // value-annotated
  std::set<History> shapes;     // the same histories with values dropped
  ExploreStats stats;
  bool partial = false;         // exploration stopped at the state budget

  /// Annotated queries match exactly; unannotated ones match modulo values.
  bool contains(const History& h) const;
  /// Throws BudgetExceeded when partial.
  void require_complete(const char* who) const;
};

ReachableSet explore(const Workload& w, const ExploreOptions& opts);
ReachableSet explore(const Workload& w, Mode mode, std::size_t max_states = kDefaultMaxStates);

struct ScheduleStep {
  TxId tx;
  std::string label;

  bool operator==(const ScheduleStep&) const = default;
};

struct Trace {
  std::vector<ScheduleStep> schedule;
  std::vector<Config> configs;  // configs[0] initial, configs[i+1] after step i
  History history;
  std::vector<MetaAccess> meta_accesses;
};

/// Deterministic reconstruction of a schedule. A step whose label is empty
/// takes whatever the transaction would do next; otherwise the label must
/// match. Throws Error naming the first non-enabled position.
Trace replay(const Workload& w, std::span<const ScheduleStep> schedule, Mode mode);

/// One event per completed operation, at its completion step; an operation
/// returning A contributes only abrt.
History extract_history(const Workload& w, const Trace& tr);

/// Membership in explore(w, mode).histories. Throws BudgetExceeded.
bool admits_history(const Workload& w, const History& h, Mode mode, std::size_t max_states = kDefaultMaxStates);

}  // namespace stmcheck

#endif  // STMCHECK_EXPLORER_HPP
