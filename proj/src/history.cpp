#include "stmcheck/history.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace stmcheck {

std::string to_string(const Statement& s) {
  std::string out;
  switch (s.kind) {
    case StmtKind::Read: out = "rd"; break;
    case StmtKind::Write: out = "wr"; break;
    case StmtKind::Commit: out = "cmt"; break;
    case StmtKind::Abort: out = "abrt"; break;
  }
  out += std::to_string(s.tx.value);
  if (s.is_access()) {
    out += '(';
    out += s.var.value_or("");
    if (s.val) {
      out += ',';
      out += std::to_string(*s.val);
    }
    out += ')';
  }
  return out;
}

History::History(std::vector<Statement> stmts) : stmts_(std::move(stmts)) {
  std::set<TxId> terminated;
  bool any_annotated = false;
  bool any_unannotated = false;
  for (std::size_t i = 0; i < stmts_.size(); ++i) {
    const Statement& s = stmts_[i];
    const std::string where = " (statement " + std::to_string(i) + ")";
    if (s.tx.is_initial()) throw WellFormednessError("transaction id 0 is reserved" + where);
    if (s.is_access()) {
      if (!s.var || s.var->empty()) throw WellFormednessError("read/write without variable" + where);
      (s.val ? any_annotated : any_unannotated) = true;
    } else if (s.var || s.val) {
      throw WellFormednessError("commit/abort carries a variable or value" + where);
    }
    if (terminated.contains(s.tx)) {
      throw WellFormednessError("statement after commit/abort of transaction " +
                                std::to_string(s.tx.value) + where);
    }
    if (s.is_terminal()) terminated.insert(s.tx);
  }
  if (any_annotated && any_unannotated) {
    throw WellFormednessError("history mixes annotated and unannotated statements");
  }
  annotated_ = !any_unannotated;
}

std::vector<TxId> History::transactions() const {
  std::set<TxId> seen;
  for (const auto& s : stmts_) seen.insert(s.tx);
  return {seen.begin(), seen.end()};
}

bool History::contains_tx(TxId t) const {
  return std::any_of(stmts_.begin(), stmts_.end(), [t](const Statement& s) { return s.tx == t; });
}

History History::stripped() const {
  History out;
  out.stmts_ = stmts_;
  for (auto& s : out.stmts_) s.val.reset();
  out.annotated_ = std::none_of(out.stmts_.begin(), out.stmts_.end(),
                                [](const Statement& s) { return s.is_access(); });
  return out;
}

History History::prefix(std::size_t n) const {
  History out;
  out.stmts_.assign(stmts_.begin(), stmts_.begin() + static_cast<std::ptrdiff_t>(std::min(n, stmts_.size())));
  out.annotated_ = std::all_of(out.stmts_.begin(), out.stmts_.end(),
                               [](const Statement& s) { return !s.is_access() || s.val.has_value(); });
  return out;
}

History History::appended(const Statement& s) const {
  auto stmts = stmts_;
  stmts.push_back(s);
  return History(std::move(stmts));
}

std::string render(const History& h) {
  std::string out;
  for (const auto& s : h) {
    if (!out.empty()) out += ' ';
    out += to_string(s);
  }
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  History parse() {
    std::vector<Statement> stmts;
    skip_ws();
    while (pos_ < text_.size()) {
      stmts.push_back(statement());
      if (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError("expected whitespace between statements", pos_);
      }
      skip_ws();
    }
    return History(std::move(stmts));
  }

 private:
  Statement statement() {
    const std::size_t start = pos_;
    StmtKind kind;
    if (eat("abrt")) {
      kind = StmtKind::Abort;
    } else if (eat("cmt")) {
      kind = StmtKind::Commit;
    } else if (eat("rd")) {
      kind = StmtKind::Read;
    } else if (eat("wr")) {
      kind = StmtKind::Write;
    } else {
      throw ParseError("expected rd, wr, cmt or abrt", start);
    }
    const TxId tx = txid();
    if (kind == StmtKind::Commit || kind == StmtKind::Abort) return {kind, tx, std::nullopt, std::nullopt};

    expect('(');
    std::optional<Value> val;
    VarId var = identifier();
    if (peek() == ',') {
      ++pos_;
      val = integer();
    }
    expect(')');
    return {kind, tx, std::move(var), val};
  }

  TxId txid() {
    const std::size_t start = pos_;
    std::uint32_t id = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), id);
    if (ec != std::errc{} || ptr == text_.data() + pos_) throw ParseError("expected transaction id", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (id == 0) throw ParseError("transaction id must be >= 1", start);
    return TxId{id};
  }

  VarId identifier() {
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || !std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      throw ParseError("expected variable name", start);
    }
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return VarId(text_.substr(start, pos_ - start));
  }

  Value integer() {
    const std::size_t start = pos_;
    Value v = 0;
    const char* first = text_.data() + pos_;
    // from_chars does not accept a leading '+'
    if (peek() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), v);
    if (ec != std::errc{} || ptr == first) throw ParseError("expected integer value", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }

  bool eat(std::string_view kw) {
    if (text_.substr(pos_, kw.size()) == kw) {
      pos_ += kw.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

struct Span {
  std::size_t first;
  std::size_t last;
};

std::optional<Span> tx_span(const History& h, TxId t) {
  std::optional<Span> span;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].tx != t) continue;
    if (!span) span = Span{i, i};
    span->last = i;
  }
  return span;
}

}  // namespace

History parse_history(std::string_view text) { return Parser(text).parse(); }

History project_tx(const History& h, const std::set<TxId>& txs) {
  std::vector<Statement> out;
  for (const auto& s : h) {
    if (txs.contains(s.tx)) out.push_back(s);
  }
  return History(std::move(out));
}

History project_vars(const History& h, const std::set<VarId>& vars) {
  std::vector<Statement> out;
  for (const auto& s : h) {
    if (s.is_access() && !vars.contains(*s.var)) continue;
    out.push_back(s);
  }
  return History(std::move(out));
}

bool precedes(const History& h, TxId t1, TxId t2) {
  const auto a = tx_span(h, t1);
  const auto b = tx_span(h, t2);
  if (!a || !b) throw Error("precedes: transaction does not occur in history");
  return a->last < b->first;
}

bool is_sequential(const History& h) {
  // Sequential iff every transaction's statements form one contiguous block.
  std::set<TxId> closed;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (closed.contains(h[i].tx)) return false;
    if (i + 1 < h.size() && h[i + 1].tx != h[i].tx) closed.insert(h[i].tx);
  }
  return true;
}

TxStatus tx_status(const History& h, TxId t) {
  const auto span = tx_span(h, t);
  if (!span) throw Error("tx_status: transaction " + std::to_string(t.value) + " does not occur in history");
  switch (h[span->last].kind) {
    case StmtKind::Commit: return TxStatus::Committing;
    case StmtKind::Abort: return TxStatus::Aborting;
    default: return TxStatus::Live;
  }
}

std::set<TxId> committed_txs(const History& h) {
  std::set<TxId> out;
  for (const auto& s : h) {
    if (s.kind == StmtKind::Commit) out.insert(s.tx);
  }
  return out;
}

std::set<TxId> live_txs(const History& h) {
  std::set<TxId> out;
  for (TxId t : h.transactions()) out.insert(t);
  for (const auto& s : h) {
    if (s.is_terminal()) out.erase(s.tx);
  }
  return out;
}

std::set<VarId> writes_to(const History& h, TxId t) {
  std::set<VarId> out;
  for (const auto& s : h) {
    if (s.tx == t && s.kind == StmtKind::Write) out.insert(*s.var);
  }
  return out;
}

bool is_global_read(const History& h, std::size_t i) {
  if (i >= h.size() || h[i].kind != StmtKind::Read) throw Error("is_global_read: statement is not a read");
  const Statement& r = h[i];
  for (std::size_t j = 0; j < i; ++j) {
    if (h[j].tx == r.tx && h[j].kind == StmtKind::Write && h[j].var == r.var) return false;
  }
  return true;
}

}  // namespace stmcheck
