#include "stmcheck/opacity.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace stmcheck {

namespace {

std::map<TxId, std::set<VarId>> write_sets(const History& h) {
  std::map<TxId, std::set<VarId>> out;
  for (const auto& s : h) {
    if (s.kind == StmtKind::Write) out[s.tx].insert(*s.var);
  }
  return out;
}

std::vector<bool> global_reads(const History& h) {
  std::vector<bool> out(h.size(), false);
  std::set<std::pair<TxId, VarId>> written;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& s = h[i];
    if (s.kind == StmtKind::Write) written.emplace(s.tx, *s.var);
    if (s.kind == StmtKind::Read) out[i] = !written.contains({s.tx, *s.var});
  }
  return out;
}

std::optional<VarId> smallest_common(const std::set<VarId>& a, const std::set<VarId>& b) {
  for (const auto& x : a) {
    if (b.contains(x)) return x;
  }
  return std::nullopt;
}

/// Sequentialization plus, for each of its positions, the index in `h`.
std::pair<History, std::vector<std::size_t>> sequentialize_indexed(const History& h,
                                                                   std::span<const TxId> order) {
  std::vector<Statement> stmts;
  std::vector<std::size_t> origin;
  stmts.reserve(h.size());
  for (TxId t : order) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i].tx != t) continue;
      stmts.push_back(h[i]);
      origin.push_back(i);
    }
  }
  return {History(std::move(stmts)), std::move(origin)};
}

bool respects_real_time(const History& h, std::span<const TxId> order) {
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      // order[b] is placed before order[a]; forbidden if order[a] finished before order[b] began
      if (is_finished(h, order[a]) && precedes(h, order[a], order[b])) return false;
    }
  }
  return true;
}

void require_small(const History& h, const char* who) {
  if (h.transactions().size() > kMaxPermutationTransactions) {
    throw Error(std::string(who) + ": more than " + std::to_string(kMaxPermutationTransactions) +
                " transactions");
  }
}

}  // namespace

std::vector<Conflict> find_conflicts(const History& h) {
  const auto writes = write_sets(h);
  const auto global = global_reads(h);
  auto writes_var = [&](TxId t, const VarId& x) {
    auto it = writes.find(t);
    return it != writes.end() && it->second.contains(x);
  };
  static const std::set<VarId> kNone;
  auto wset = [&](TxId t) -> const std::set<VarId>& {
    auto it = writes.find(t);
    return it == writes.end() ? kNone : it->second;
  };

  std::vector<Conflict> out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      const auto& a = h[i];
      const auto& b = h[j];
      if (a.tx == b.tx) continue;
      if (global[i] && b.kind == StmtKind::Commit && writes_var(b.tx, *a.var)) {
        out.push_back({i, j, ConflictKind::ReadCommit, *a.var});
      } else if (global[j] && a.kind == StmtKind::Commit && writes_var(a.tx, *b.var)) {
        out.push_back({i, j, ConflictKind::ReadCommit, *b.var});
      } else if (a.kind == StmtKind::Commit && b.kind == StmtKind::Commit) {
        if (auto x = smallest_common(wset(a.tx), wset(b.tx))) {
          out.push_back({i, j, ConflictKind::CommitCommit, *x});
        }
      }
    }
  }
  return out;
}

bool strictly_equivalent(const History& h, const History& other) {
  // Projections: position of the k-th statement of t in `other`.
  std::map<TxId, std::vector<std::size_t>> pos_h;
  std::map<TxId, std::vector<std::size_t>> pos_o;
  for (std::size_t i = 0; i < h.size(); ++i) pos_h[h[i].tx].push_back(i);
  for (std::size_t i = 0; i < other.size(); ++i) pos_o[other[i].tx].push_back(i);
  if (pos_h.size() != pos_o.size()) return false;
  for (const auto& [t, idx] : pos_h) {
    auto it = pos_o.find(t);
    if (it == pos_o.end() || it->second.size() != idx.size()) return false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (!h[idx[k]].same_shape(other[it->second[k]])) return false;
    }
  }

  for (const auto& [t1, idx1] : pos_h) {
    if (!h[idx1.back()].is_terminal()) continue;
    for (const auto& [t2, idx2] : pos_h) {
      if (t1 == t2) continue;
      if (idx1.back() < idx2.front() && !(pos_o[t1].back() < pos_o[t2].front())) return false;
    }
  }

  // Occurrence number of each statement within its transaction.
  std::vector<std::size_t> occurrence(h.size());
  {
    std::map<TxId, std::size_t> seen;
    for (std::size_t i = 0; i < h.size(); ++i) occurrence[i] = seen[h[i].tx]++;
  }
  auto mapped = [&](std::size_t i) { return pos_o[h[i].tx][occurrence[i]]; };
  for (const auto& c : find_conflicts(h)) {
    if (!(mapped(c.first) < mapped(c.second))) return false;
  }
  return true;
}

const Edge* SerializationGraph::find(TxId from, TxId to) const {
  for (const auto& e : edges) {
    if (e.from == from && e.to == to) return &e;
  }
  return nullptr;
}

SerializationGraph build_serialization_graph(const History& h) {
  SerializationGraph g;
  g.nodes = h.transactions();
  std::map<std::pair<TxId, TxId>, Edge> edges;
  auto edge = [&](TxId a, TxId b) -> Edge& {
    auto [it, inserted] = edges.try_emplace({a, b});
    if (inserted) {
      it->second.from = a;
      it->second.to = b;
    }
    return it->second;
  };

  for (TxId t1 : g.nodes) {
    if (!is_finished(h, t1)) continue;
    for (TxId t2 : g.nodes) {
      if (t1 != t2 && precedes(h, t1, t2)) edge(t1, t2).real_time = true;
    }
  }
  for (auto& c : find_conflicts(h)) {
    edge(h[c.first].tx, h[c.second].tx).conflicts.push_back(std::move(c));
  }
  for (auto& [key, e] : edges) g.edges.push_back(std::move(e));
  return g;
}

History sequentialize(const History& h, std::span<const TxId> order) {
  return sequentialize_indexed(h, order).first;
}

Verdict check_conflict_opacity(const History& h) {
  const auto g = build_serialization_graph(h);
  std::map<TxId, std::size_t> indegree;
  for (TxId t : g.nodes) indegree[t] = 0;
  for (const auto& e : g.edges) ++indegree[e.to];

  Verdict v;
  v.definition = Definition::Conflict;
  std::set<TxId> ready;
  for (const auto& [t, d] : indegree) {
    if (d == 0) ready.insert(t);
  }
  std::vector<TxId> order;
  while (!ready.empty()) {
    const TxId t = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(t);
    for (const auto& e : g.edges) {
      if (e.from == t && --indegree[e.to] == 0) ready.insert(e.to);
    }
  }
  if (order.size() == g.nodes.size()) {
    v.opaque = true;
    v.witness = std::move(order);
    return v;
  }

  // Every unsorted node keeps an unsorted predecessor; walking predecessors
  // from the smallest one must revisit a node.
  std::set<TxId> remaining(g.nodes.begin(), g.nodes.end());
  for (TxId t : order) remaining.erase(t);
  auto predecessor = [&](TxId t) {
    for (TxId p : remaining) {
      if (g.has_edge(p, t)) return p;
    }
    throw Error("serialization graph: inconsistent cycle search");
  };
  std::vector<TxId> walk{*remaining.begin()};
  std::map<TxId, std::size_t> seen_at{{walk.front(), 0}};
  for (;;) {
    const TxId p = predecessor(walk.back());
    if (auto it = seen_at.find(p); it != seen_at.end()) {
      std::vector<TxId> cycle(walk.begin() + static_cast<std::ptrdiff_t>(it->second), walk.end());
      std::reverse(cycle.begin(), cycle.end());
      std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
      v.cycle = std::move(cycle);
      return v;
    }
    seen_at[p] = walk.size();
    walk.push_back(p);
  }
}

Verdict check_conflict_opacity_oracle(const History& h) {
  require_small(h, "check_conflict_opacity_oracle");
  Verdict v;
  v.definition = Definition::Conflict;
  auto order = h.transactions();
  do {
    if (strictly_equivalent(h, sequentialize(h, order))) {
      v.opaque = true;
      v.witness = order;
      return v;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return v;
}

std::vector<std::vector<TxId>> strictly_equivalent_orders(const History& h) {
  require_small(h, "strictly_equivalent_orders");
  std::vector<std::vector<TxId>> out;
  auto order = h.transactions();
  do {
    if (strictly_equivalent(h, sequentialize(h, order))) out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::optional<std::size_t> legal_sequential(const History& h) {
  if (!h.annotated()) throw Error("legal_sequential: history is not value-annotated");
  if (!is_sequential(h)) throw Error("legal_sequential: history is not sequential");

  std::map<VarId, Value> committed;
  std::map<TxId, std::map<VarId, Value>> own;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& s = h[i];
    switch (s.kind) {
      case StmtKind::Write:
        own[s.tx][*s.var] = *s.val;
        break;
      case StmtKind::Read: {
        const auto& mine = own[s.tx];
        Value expected = 0;
        if (auto it = mine.find(*s.var); it != mine.end()) {
          expected = it->second;
        } else if (auto c = committed.find(*s.var); c != committed.end()) {
          expected = c->second;
        }
        if (*s.val != expected) return i;
        break;
      }
      case StmtKind::Commit:
        for (const auto& [x, val] : own[s.tx]) committed[x] = val;
        break;
      case StmtKind::Abort:
        break;
    }
  }
  return std::nullopt;
}

Verdict check_value_opacity(const History& h) {
  if (!h.annotated()) throw Error("check_value_opacity: history is not value-annotated");
  require_small(h, "check_value_opacity");
  Verdict v;
  v.definition = Definition::Value;
  auto order = h.transactions();
  do {
    if (!respects_real_time(h, order)) continue;
    auto [seq, origin] = sequentialize_indexed(h, order);
    const auto bad = legal_sequential(seq);
    if (!bad) {
      v.opaque = true;
      v.witness = order;
      v.illegal_read.reset();
      return v;
    }
    if (!v.illegal_read) v.illegal_read = origin[*bad];
  } while (std::next_permutation(order.begin(), order.end()));
  return v;
}

}  // namespace stmcheck
