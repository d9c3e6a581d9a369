#ifndef STMCHECK_HISTORY_HPP
#define STMCHECK_HISTORY_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stmcheck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by parse_history; `position` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class WellFormednessError : public Error {
 public:
  using Error::Error;
};

/// Transaction identifier. Id 0 is the initialising transaction t0 and never
/// appears in a history statement.
struct TxId {
  std::uint32_t value = 0;

  constexpr TxId() = default;
  constexpr explicit TxId(std::uint32_t v) : value(v) {}
  constexpr bool is_initial() const { return value == 0; }
  constexpr auto operator<=>(const TxId&) const = default;
};

inline constexpr TxId kInitialTx{0};

inline std::ostream& operator<<(std::ostream& os, TxId t) { return os << t.value; }

using VarId = std::string;
using Value = std::int64_t;

enum class StmtKind : std::uint8_t { Read, Write, Commit, Abort };

struct Statement {
  StmtKind kind = StmtKind::Commit;
  TxId tx;
  std::optional<VarId> var;
  std::optional<Value> val;

  static Statement read(TxId t, VarId x, std::optional<Value> v = std::nullopt) {
    return {StmtKind::Read, t, std::move(x), v};
  }
  static Statement write(TxId t, VarId x, std::optional<Value> v = std::nullopt) {
    return {StmtKind::Write, t, std::move(x), v};
  }
  static Statement commit(TxId t) { return {StmtKind::Commit, t, std::nullopt, std::nullopt}; }
  static Statement abort(TxId t) { return {StmtKind::Abort, t, std::nullopt, std::nullopt}; }

  bool is_access() const { return kind == StmtKind::Read || kind == StmtKind::Write; }
  bool is_terminal() const { return kind == StmtKind::Commit || kind == StmtKind::Abort; }

  /// Same statement up to the value annotation.
  bool same_shape(const Statement& o) const {
    return kind == o.kind && tx == o.tx && var == o.var;
  }

  auto operator<=>(const Statement&) const = default;
};

std::string to_string(const Statement& s);

/// A well-formed sequence of statements. Construction validates; once built a
/// History never changes.
class History {
 public:
  History() = default;
  /// Throws WellFormednessError.
  explicit History(std::vector<Statement> stmts);

  std::span<const Statement> statements() const { return stmts_; }
  std::size_t size() const { return stmts_.size(); }
  bool empty() const { return stmts_.empty(); }
  const Statement& operator[](std::size_t i) const { return stmts_[i]; }
  auto begin() const { return stmts_.begin(); }
  auto end() const { return stmts_.end(); }

  /// True iff every read and write carries a value (vacuously true without any).
  bool annotated() const { return annotated_; }

  /// Transactions occurring in the history, ascending.
  std::vector<TxId> transactions() const;
  bool contains_tx(TxId t) const;

  /// Copy with all value annotations dropped.
  History stripped() const;
  History prefix(std::size_t n) const;
  /// Throws WellFormednessError when the extension is ill-formed.
  History appended(const Statement& s) const;

  auto operator<=>(const History& o) const { return stmts_ <=> o.stmts_; }
  bool operator==(const History& o) const { return stmts_ == o.stmts_; }

 private:
  std::vector<Statement> stmts_;
  bool annotated_ = true;
};

std::string render(const History& h);
inline std::ostream& operator<<(std::ostream& os, const History& h) { return os << render(h); }

/// Parses the whitespace-separated statement syntax, e.g. `wr1(x,5) cmt1 rd2(x,5)`.
History parse_history(std::string_view text);

History project_tx(const History& h, const std::set<TxId>& txs);
/// Drops reads and writes of variables outside `vars`; commit/abort statements stay.
History project_vars(const History& h, const std::set<VarId>& vars);

/// t1 <_h t2: last statement of t1 occurs before the first statement of t2.
/// Throws Error if either transaction is absent from h.
bool precedes(const History& h, TxId t1, TxId t2);
bool is_sequential(const History& h);

enum class TxStatus { Live, Committing, Aborting };

TxStatus tx_status(const History& h, TxId t);
inline bool is_finished(const History& h, TxId t) { return tx_status(h, t) != TxStatus::Live; }
std::set<TxId> committed_txs(const History& h);
std::set<TxId> live_txs(const History& h);

std::set<VarId> writes_to(const History& h, TxId t);
/// Statement `i` must be a read. True iff its transaction has not written the
/// same variable earlier in h.
bool is_global_read(const History& h, std::size_t i);

}  // namespace stmcheck

template <>
struct std::hash<stmcheck::TxId> {
  std::size_t operator()(stmcheck::TxId t) const noexcept { return std::hash<std::uint32_t>{}(t.value); }
};

#endif  // STMCHECK_HISTORY_HPP
