#ifndef STMCHECK_WORKLOAD_HPP
#define STMCHECK_WORKLOAD_HPP

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "stmcheck/history.hpp"

namespace stmcheck {

struct Command {
  enum class Kind : std::uint8_t { Read, Write, TryCommit };

  Kind kind = Kind::TryCommit;
  std::size_t var = 0;  // index into Workload::vars
  Value val = 0;

  static Command read(std::size_t x) { return {Kind::Read, x, 0}; }
  static Command write(std::size_t x, Value v) { return {Kind::Write, x, v}; }
  static Command try_commit() { return {Kind::TryCommit, 0, 0}; }

  bool operator==(const Command&) const = default;
};

/// The program each transaction runs. Transaction i+1 runs `transactions[i]`.
struct Workload {
  std::vector<VarId> vars;
  std::set<Value> values{0};
  std::vector<std::vector<Command>> transactions;

  std::size_t tx_count() const { return transactions.size(); }
  const std::vector<Command>& program(TxId t) const { return transactions.at(t.value - 1); }
  std::size_t var_index(const VarId& x) const;

  /// Throws Error describing the first violated constraint.
  void validate() const;

  /// Keeps only variables in `keep`; commands touching other variables are dropped.
  Workload restricted_to(const std::set<VarId>& keep) const;
};

std::string describe(const Workload& w, const Command& c);

Workload workload_from_json(const nlohmann::json& j);
nlohmann::json workload_to_json(const Workload& w);

}  // namespace stmcheck

#endif  // STMCHECK_WORKLOAD_HPP
