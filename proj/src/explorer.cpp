#include "stmcheck/explorer.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace stmcheck {

bool ReachableSet::contains(const History& h) const {
  if (h.annotated() && !h.empty() && std::any_of(h.begin(), h.end(), [](const Statement& s) { return s.is_access(); })) {
    return histories.contains(h);
  }
  return shapes.contains(h.stripped());
}

void ReachableSet::require_complete(const char* who) const {
  if (partial) throw BudgetExceeded(std::string(who) + ": history set is truncated by the state budget");
}

namespace {

void encode_events(const std::vector<Event>& events, std::string& out) {
  out.clear();
  for (const auto& e : events) {
    out.push_back(static_cast<char>(e.kind));
    out.append(reinterpret_cast<const char*>(&e.tx.value), sizeof e.tx.value);
    out.append(reinterpret_cast<const char*>(&e.var), sizeof e.var);
    out.append(reinterpret_cast<const char*>(&e.val), sizeof e.val);
  }
}

class Explorer {
 public:
  Explorer(const Workload& w, const ExploreOptions& opts) : w_(w), opts_(opts) {}

  ReachableSet run() {
    ReachableSet rs;
    rs.workload = w_;
    rs.mode = opts_.mode;

    Config init = init_config(w_);
    record(init.emitted);
    visit(init);

    for (const auto& events : histories_) {
      auto h = to_history(w_, events);
      rs.shapes.insert(h.stripped());
      rs.histories.insert(std::move(h));
    }
    rs.stats = stats_;
    rs.partial = partial_;
    return rs;
  }

 private:
  void visit(const Config& c) {
    if (partial_) return;
    if (opts_.memoize) {
      c.encode(key_);
      if (!seen_.insert(key_).second) {
        ++stats_.dedup_hits;
        return;
      }
    }
    if (stats_.explored_states >= opts_.max_states) {
      partial_ = true;
      return;
    }
    ++stats_.explored_states;

    bool any = false;
    for (std::uint32_t i = 1; i <= w_.tx_count(); ++i) {
      const TxId t{i};
      if (!is_enabled(c, w_, t)) continue;
      any = true;
      Config next = c;
      step_in_place(next, w_, t, opts_.mode);
      if (opts_.on_transition) opts_.on_transition(c, t, next);
      if (next.emitted.size() != c.emitted.size()) record(next.emitted);
      visit(next);
      if (partial_) return;
    }
    if (!any) ++stats_.maximal_traces;
  }

  void record(const std::vector<Event>& events) {
    encode_events(events, hkey_);
    if (history_keys_.insert(hkey_).second) histories_.push_back(events);
  }

  const Workload& w_;
  const ExploreOptions& opts_;
  std::unordered_set<std::string> seen_;
  std::unordered_set<std::string> history_keys_;
  std::vector<std::vector<Event>> histories_;
  std::string key_;
  std::string hkey_;
  ExploreStats stats_;
  bool partial_ = false;
};

}  // namespace

ReachableSet explore(const Workload& w, const ExploreOptions& opts) {
  w.validate();
  return Explorer(w, opts).run();
}

ReachableSet explore(const Workload& w, Mode mode, std::size_t max_states) {
  ExploreOptions opts;
  opts.mode = mode;
  opts.max_states = max_states;
  return explore(w, opts);
}

Trace replay(const Workload& w, std::span<const ScheduleStep> schedule, Mode mode) {
  w.validate();
  Trace tr;
  tr.configs.push_back(init_config(w));
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& s = schedule[i];
    const Config& cur = tr.configs.back();
    if (!is_enabled(cur, w, s.tx)) {
      throw Error("replay: step " + std::to_string(i) + " (tx " + std::to_string(s.tx.value) + ") is not enabled");
    }
    const std::string label = step_label(cur, w, s.tx, mode);
    if (!s.label.empty() && s.label != label) {
      throw Error("replay: step " + std::to_string(i) + " expected '" + s.label + "' but tx " +
                  std::to_string(s.tx.value) + " is at '" + label + "'");
    }
    Config next = cur;
    step_in_place(next, w, s.tx, mode, &tr.meta_accesses, i);
    tr.schedule.push_back({s.tx, label});
    tr.configs.push_back(std::move(next));
  }
  tr.history = extract_history(w, tr);
  return tr;
}

History extract_history(const Workload& w, const Trace& tr) {
  if (tr.configs.empty()) return History{};
  return to_history(w, tr.configs.back().emitted);
}

bool admits_history(const Workload& w, const History& h, Mode mode, std::size_t max_states) {
  const auto rs = explore(w, mode, max_states);
  rs.require_complete("admits_history");
  return rs.contains(h);
}

}  // namespace stmcheck
