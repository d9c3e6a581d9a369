#ifndef STMCHECK_OPACITY_HPP
#define STMCHECK_OPACITY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stmcheck/history.hpp"

namespace stmcheck {

/// Largest transaction count the permutation-based checkers accept.
inline constexpr std::size_t kMaxPermutationTransactions = 8;

enum class ConflictKind { ReadCommit, CommitCommit };

/// Two statement indices in conflict, `first < second`. For commit/commit
/// conflicts `var` is the smallest commonly written variable.
struct Conflict {
  std::size_t first = 0;
  std::size_t second = 0;
  ConflictKind kind = ConflictKind::ReadCommit;
  VarId var;

  bool operator==(const Conflict&) const = default;
};

std::vector<Conflict> find_conflicts(const History& h);

/// Strict equivalence: equal per-transaction projections, real-time order of
/// finished transactions kept, order of conflicting statements kept. Value
/// annotations are ignored.
bool strictly_equivalent(const History& h, const History& other);

/// One edge per ordered transaction pair, carrying every reason it exists.
struct Edge {
  TxId from;
  TxId to;
  bool real_time = false;
  std::vector<Conflict> conflicts;
};

struct SerializationGraph {
  std::vector<TxId> nodes;
  std::vector<Edge> edges;

  const Edge* find(TxId from, TxId to) const;
  bool has_edge(TxId from, TxId to) const { return find(from, to) != nullptr; }
};

SerializationGraph build_serialization_graph(const History& h);

enum class Definition { Conflict, Value };

struct Verdict {
  bool opaque = false;
  Definition definition = Definition::Conflict;
  std::optional<std::vector<TxId>> witness;
  std::optional<std::vector<TxId>> cycle;
  /// Index into the judged history of a read no candidate order can justify.
  std::optional<std::size_t> illegal_read;
};

/// Concatenation of h|t for t in `order`.
History sequentialize(const History& h, std::span<const TxId> order);

/// Decides conflict-based opacity by serialization-graph acyclicity. The
/// witness is the topological order that always picks the lowest ready id.
Verdict check_conflict_opacity(const History& h);

/// Brute-force reference: tries every permutation of the transactions in
/// lexicographic order. Throws Error above kMaxPermutationTransactions.
Verdict check_conflict_opacity_oracle(const History& h);

/// Every transaction order whose sequentialization is strictly equivalent to
/// h, in lexicographic order.
std::vector<std::vector<TxId>> strictly_equivalent_orders(const History& h);

/// Deferred-update legality of an annotated sequential history. Returns the
/// index of the first illegal read, or nullopt when all reads are legal.
/// Throws Error when h is not sequential or not annotated.
std::optional<std::size_t> legal_sequential(const History& h);

/// Value-based opacity by permutation search. Throws Error for unannotated
/// input or more than kMaxPermutationTransactions transactions.
Verdict check_value_opacity(const History& h);

}  // namespace stmcheck

#endif  // STMCHECK_OPACITY_HPP
