#include "stmcheck/properties.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "stmcheck/opacity.hpp"

namespace stmcheck {

std::string_view property_name(Property p) {
  switch (p) {
    case Property::P1: return "p1";
    case Property::P3: return "p3";
    case Property::P4Strict: return "p4-strict";
    case Property::P4Interleaved: return "p4-interleaved";
    case Property::AbortIsolation: return "abort-isolation";
  }
  return "?";
}

Property parse_property(std::string_view name) {
  for (auto p : {Property::P1, Property::P3, Property::P4Strict, Property::P4Interleaved, Property::AbortIsolation}) {
    if (property_name(p) == name) return p;
  }
  throw Error("unknown property '" + std::string(name) + "'");
}

PropertyReport check_p1(const ReachableSet& rs) {
  rs.require_complete("check_p1");
  PropertyReport report;
  report.property = Property::P1;
  for (const auto& h : rs.shapes) {
    const auto committed = committed_txs(h);
    const auto live = live_txs(h);
    const std::vector<TxId> live_list(live.begin(), live.end());
    if (live_list.size() >= 31) throw Error("check_p1: too many live transactions");
    for (std::uint32_t mask = 0; mask < (1u << live_list.size()); ++mask) {
      std::set<TxId> kept = committed;
      for (std::size_t i = 0; i < live_list.size(); ++i) {
        if (mask & (1u << i)) kept.insert(live_list[i]);
      }
      ++report.checked_count;
      auto projection = project_tx(h, kept);
      if (!rs.shapes.contains(projection)) {
        report.failures.push_back(P1Failure{h, std::move(kept), std::move(projection)});
      }
    }
  }
  report.holds = report.failures.empty();
  return report;
}

std::vector<std::set<VarId>> nonempty_var_subsets(const Workload& w) {
  const auto k = w.vars.size();
  if (k >= 31) throw Error("nonempty_var_subsets: too many variables");
  std::vector<std::set<VarId>> out;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::set<VarId> s;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) s.insert(w.vars[i]);
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return out;
}

PropertyReport check_p3(const ReachableSet& rs, const std::vector<std::set<VarId>>& var_subsets) {
  rs.require_complete("check_p3");
  PropertyReport report;
  report.property = Property::P3;
  for (const auto& vars : var_subsets) {
    if (vars.empty()) throw Error("check_p3: the restriction to no variables is not a workload");
    for (const auto& x : vars) {
      if (std::find(rs.workload.vars.begin(), rs.workload.vars.end(), x) == rs.workload.vars.end()) {
        throw Error("check_p3: variable '" + x + "' is not declared by the workload");
      }
    }
    const auto restricted = explore(rs.workload.restricted_to(vars), rs.mode);
    restricted.require_complete("check_p3");
    for (const auto& h : rs.shapes) {
      const bool aborting = std::any_of(h.begin(), h.end(), [](const Statement& s) { return s.kind == StmtKind::Abort; });
      if (aborting) continue;
      ++report.checked_count;
      auto projection = project_vars(h, vars);
      if (!restricted.shapes.contains(projection)) {
        report.failures.push_back(P3Failure{h, vars, std::move(projection)});
      }
    }
  }
  report.holds = report.failures.empty();
  return report;
}

PropertyReport check_p3(const ReachableSet& rs) { return check_p3(rs, nonempty_var_subsets(rs.workload)); }

bool p4_premise_holds(const History& prefix, const Statement& next) {
  if (next.kind == StmtKind::Abort) return false;
  const auto live = live_txs(prefix);
  if (live.size() != 1 || *live.begin() != next.tx) return false;
  return check_conflict_opacity(prefix).opaque;
}

std::optional<P4Instance> check_p4_instance(const ReachableSet& admitting, const History& prefix, const Statement& next) {
  if (!p4_premise_holds(prefix, next)) throw Error("check_p4_instance: premise does not hold for " + render(prefix));
  const History shape = prefix.stripped();
  Statement s = next;
  s.val.reset();
  P4Instance instance{shape, s, {}};
  for (const auto& order : strictly_equivalent_orders(shape)) {
    auto candidate = sequentialize(shape, order);
    if (admitting.shapes.contains(candidate.appended(s))) return std::nullopt;
    instance.candidates.push_back(std::move(candidate));
  }
  return instance;
}

PropertyReport check_p4(const ReachableSet& fine, const ReachableSet& admitting, Property as) {
  if (fine.mode != Mode::Fine) throw Error("check_p4: the ambient history set must be fine-grained");
  fine.require_complete("check_p4");
  admitting.require_complete("check_p4");
  PropertyReport report;
  report.property = as;
  for (const auto& hs : fine.shapes) {
    if (hs.empty()) continue;
    const History prefix = hs.prefix(hs.size() - 1);
    const Statement& next = hs[hs.size() - 1];
    if (!p4_premise_holds(prefix, next)) continue;
    ++report.checked_count;
    if (auto failure = check_p4_instance(admitting, prefix, next)) report.failures.push_back(std::move(*failure));
  }
  report.holds = report.failures.empty();
  return report;
}

PropertyReport check_p4(const ReachableSet& fine, P4Interpretation interpretation, std::size_t max_states) {
  if (interpretation == P4Interpretation::Interleaved) return check_p4(fine, fine, Property::P4Interleaved);
  const auto coarse = explore(fine.workload, Mode::Coarse, max_states);
  return check_p4(fine, coarse, Property::P4Strict);
}

namespace {

std::size_t cell_ordinal(const Cell& c, std::size_t tx_slots) {
  switch (c.kind) {
    case Cell::Kind::Status: return c.index;
    case Cell::Kind::RdSet: return tx_slots + c.index;
    case Cell::Kind::Writer: return 2 * tx_slots + 3 * c.index;
    case Cell::Kind::OldVal: return 2 * tx_slots + 3 * c.index + 1;
    case Cell::Kind::NewVal: return 2 * tx_slots + 3 * c.index + 2;
  }
  return 0;
}

/// Transactions that abort in the transition before -> after: their status
/// becomes A or their operation returns A.
std::vector<TxId> aborting_in(const Config& before, const Config& after) {
  std::vector<TxId> out;
  for (std::uint32_t i = 1; i < before.frames.size(); ++i) {
    const bool status_flip = before.tm.status[i] != Status::Aborted && after.tm.status[i] == Status::Aborted;
    const bool returned = before.finished[i] != Outcome::Aborted && after.finished[i] == Outcome::Aborted;
    if (status_flip || returned) out.push_back(TxId{i});
  }
  return out;
}

/// DFS over fine configs extended with the bookkeeping abort isolation needs.
class AbortIsolationSearch {
 public:
  AbortIsolationSearch(const Workload& w, std::size_t max_states) : w_(w), max_states_(max_states) {
    slots_ = w.tx_count() + 1;
    last_changer_.assign(2 * slots_ + 3 * w.vars.size(), 0);
    aborted_.assign(slots_, false);
    pending_.assign(slots_, false);
  }

  /// Schedule of the first violating execution in DFS order, if any.
  std::optional<std::vector<ScheduleStep>> run() {
    if (dfs(init_config(w_))) return path_;
    return std::nullopt;
  }

  std::size_t explored() const { return explored_; }

 private:
  bool dfs(const Config& c) {
    c.encode(key_);
    for (auto v : last_changer_) key_.push_back(static_cast<char>(v));
    for (std::size_t i = 0; i < slots_; ++i) key_.push_back(static_cast<char>(aborted_[i] | (pending_[i] << 1)));
    if (!seen_.insert(key_).second) return false;
    if (++explored_ > max_states_) throw BudgetExceeded("check_abort_isolation: state budget exhausted");

    for (std::uint32_t i = 1; i <= w_.tx_count(); ++i) {
      const TxId t{i};
      if (!is_enabled(c, w_, t)) continue;
      const auto saved_changer = last_changer_;
      const auto saved_aborted = aborted_;
      const auto saved_pending = pending_;

      Config next = c;
      accesses_.clear();
      const std::string label = step_label(c, w_, t, Mode::Fine);
      step_in_place(next, w_, t, Mode::Fine, &accesses_, path_.size());
      path_.push_back({t, label});
      if (apply(c, next)) return true;
      if (dfs(next)) return true;
      path_.pop_back();

      last_changer_ = saved_changer;
      aborted_ = saved_aborted;
      pending_ = saved_pending;
    }
    return false;
  }

  /// Updates the bookkeeping for one step; true iff the step completes a violation.
  bool apply(const Config& before, const Config& after) {
    const auto aborting = aborting_in(before, after);
    for (TxId u : aborting) {
      if (aborted_[u.value]) continue;
      aborted_[u.value] = true;
      if (pending_[u.value]) return true;
    }
    for (const auto& a : accesses_) {
      const auto ord = cell_ordinal(a.cell, slots_);
      if (a.kind == AccessKind::Read) {
        const auto victim = last_changer_[ord];
        const bool observer_aborts = std::find(aborting.begin(), aborting.end(), a.tx) != aborting.end();
        if (victim != 0 && victim != a.tx.value && !aborted_[victim] && !observer_aborts) pending_[victim] = true;
      } else if (a.changed) {
        last_changer_[ord] = a.tx.value;
      }
    }
    return false;
  }

  const Workload& w_;
  std::size_t max_states_;
  std::size_t slots_ = 0;
  std::vector<std::uint32_t> last_changer_;
  std::vector<bool> aborted_;
  std::vector<bool> pending_;
  std::vector<ScheduleStep> path_;
  std::vector<MetaAccess> accesses_;
  std::unordered_set<std::string> seen_;
  std::string key_;
  std::size_t explored_ = 0;
};

}  // namespace

std::vector<AbortIsolationViolation> find_abort_isolation_violations(const Workload& w, const Trace& tr) {
  if (tr.configs.size() != tr.schedule.size() + 1) throw Error("find_abort_isolation_violations: trace lacks configs");
  const std::size_t slots = w.tx_count() + 1;

  std::vector<std::optional<std::size_t>> abort_step(slots);
  std::vector<std::vector<TxId>> aborting_at(tr.schedule.size());
  for (std::size_t i = 0; i < tr.schedule.size(); ++i) {
    aborting_at[i] = aborting_in(tr.configs[i], tr.configs[i + 1]);
    for (TxId u : aborting_at[i]) {
      if (!abort_step[u.value]) abort_step[u.value] = i;
    }
  }

  struct Change {
    TxId by;
    std::size_t step;
  };
  std::vector<std::optional<Change>> last(2 * slots + 3 * w.vars.size());
  std::vector<AbortIsolationViolation> out;
  for (const auto& a : tr.meta_accesses) {
    const auto ord = cell_ordinal(a.cell, slots);
    if (a.kind == AccessKind::Write) {
      if (a.changed) last[ord] = Change{a.tx, a.step};
      continue;
    }
    if (!last[ord]) continue;
    const TxId victim = last[ord]->by;
    if (victim == a.tx) continue;
    const auto& victim_abort = abort_step[victim.value];
    if (!victim_abort || a.step >= *victim_abort) continue;
    const auto& here = aborting_at[a.step];
    if (std::find(here.begin(), here.end(), a.tx) != here.end()) continue;
    out.push_back({victim, a.tx, a.cell, last[ord]->step, a.step, *victim_abort, tr.schedule, tr.history});
  }
  return out;
}

PropertyReport check_abort_isolation(const ReachableSet& rs, std::size_t max_states) {
  if (rs.mode != Mode::Fine) throw Error("check_abort_isolation: requires fine-grained executions");
  PropertyReport report;
  report.property = Property::AbortIsolation;
  AbortIsolationSearch search(rs.workload, max_states);
  const auto schedule = search.run();
  report.checked_count = search.explored();
  if (schedule) {
    const auto trace = replay(rs.workload, *schedule, Mode::Fine);
    auto violations = find_abort_isolation_violations(rs.workload, trace);
    if (violations.empty()) throw Error("check_abort_isolation: search and trace check disagree");
    report.failures.push_back(std::move(violations.front()));
  }
  report.holds = report.failures.empty();
  return report;
}

}  // namespace stmcheck
