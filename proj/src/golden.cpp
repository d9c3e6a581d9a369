#include "stmcheck/golden.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <utility>
#include <variant>

#include "stmcheck/explorer.hpp"
#include "stmcheck/opacity.hpp"
#include "stmcheck/properties.hpp"
#include "stmcheck/report.hpp"

namespace stmcheck::golden {

History h1() { return parse_history("wr1(x) cmt1 rd2(x) cmt2"); }
History h2() { return parse_history("wr1(x) wr1(y) rd2(x) cmt1 wr2(y) cmt2"); }
History h3() { return parse_history("wr1(x,7) cmt1 rd2(x,3) cmt2"); }
History h4() { return parse_history("wr1(x,5) wr2(x,5) wr1(y,42) wr2(y,43) cmt1 rd3(x,5) cmt2 rd3(y,43) cmt3"); }
History concurrent_commits() { return parse_history("rd1(x) rd2(x) rd1(y) rd2(y) wr1(x) wr2(y) cmt1 cmt2"); }
History p4_prefix() { return parse_history("rd1(x) rd2(x) rd1(y) rd2(y) wr1(x) wr2(y) cmt1"); }
History p4_sequential() { return parse_history("rd2(x) rd2(y) wr2(y) rd1(x) rd1(y) wr1(x) cmt1"); }

Workload w2x2() {
  Workload w;
  w.vars = {"x", "y"};
  w.values = {0, 7, 8};
  w.transactions = {
      {Command::read(0), Command::read(1), Command::write(0, 7), Command::try_commit()},
      {Command::read(0), Command::read(1), Command::write(1, 8), Command::try_commit()},
  };
  return w;
}

Workload two_writers() {
  Workload w;
  w.vars = {"x"};
  w.values = {0, 1, 2};
  w.transactions = {
      {Command::write(0, 1), Command::try_commit()},
      {Command::write(0, 2), Command::try_commit()},
  };
  return w;
}

namespace {

using Ids = std::vector<TxId>;

Ids ids(std::initializer_list<std::uint32_t> xs) {
  Ids out;
  for (auto x : xs) out.push_back(TxId{x});
  return out;
}

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) passed_ = false;
    detail_ += (ok ? "  ok    " : "  FAIL  ") + what + "\n";
  }
  ReproResult result(std::string name) const { return {std::move(name), passed_, detail_}; }

 private:
  bool passed_ = true;
  std::string detail_;
};

void expect_conflict(Checker& ck, const std::string& name, const History& h, bool opaque,
                     const std::optional<Ids>& witness, const std::optional<Ids>& cycle) {
  const auto v = check_conflict_opacity(h);
  const auto oracle = check_conflict_opacity_oracle(h);
  ck.expect(v.opaque == opaque, name + " " + verdict_to_text(v));
  if (witness) ck.expect(v.witness == *witness, name + " witness order");
  if (cycle) ck.expect(v.cycle == *cycle, name + " cycle");
  ck.expect(oracle.opaque == opaque, name + " permutation oracle agrees");
}

void expect_value(Checker& ck, const std::string& name, const History& h, bool opaque, const std::optional<Ids>& witness) {
  const auto v = check_value_opacity(h);
  ck.expect(v.opaque == opaque, name + " " + verdict_to_text(v));
  if (witness) ck.expect(v.witness == *witness, name + " witness order");
}

ReproResult repro_h1() {
  Checker ck;
  expect_conflict(ck, "h1", h1(), true, ids({1, 2}), std::nullopt);
  return ck.result("h1");
}

ReproResult repro_h2() {
  Checker ck;
  expect_conflict(ck, "h2", h2(), false, std::nullopt, ids({1, 2}));
  return ck.result("h2");
}

ReproResult repro_h3() {
  Checker ck;
  expect_conflict(ck, "h3", h3(), true, ids({1, 2}), std::nullopt);
  expect_value(ck, "h3", h3(), false, std::nullopt);
  return ck.result("h3");
}

ReproResult repro_h4() {
  Checker ck;
  expect_conflict(ck, "h4", h4(), false, std::nullopt, std::nullopt);
  expect_value(ck, "h4", h4(), true, ids({1, 2, 3}));
  return ck.result("h4");
}

ReproResult repro_incomparability() {
  Checker ck;
  ck.expect(check_conflict_opacity(h3()).opaque, "h3 conflict-opaque");
  ck.expect(!check_value_opacity(h3()).opaque, "h3 not value-opaque");
  ck.expect(!check_conflict_opacity(h4()).opaque, "h4 not conflict-opaque");
  ck.expect(check_value_opacity(h4()).opaque, "h4 value-opaque");
  return ck.result("incomparability");
}

ReproResult repro_concurrent_commits() {
  Checker ck;
  expect_conflict(ck, "concurrent-commit history", concurrent_commits(), false, std::nullopt, ids({1, 2}));
  const auto rs = explore(w2x2(), Mode::Fine);
  ck.expect(!rs.partial, "w2x2 fine exploration complete (" + std::to_string(rs.stats.explored_states) + " states)");
  ck.expect(rs.contains(concurrent_commits()), "w2x2 fine exploration produces the concurrent-commit history");
  return ck.result("paper-h");
}

ReproResult repro_p4_ambiguity() {
  Checker ck;
  const auto fine = explore(w2x2(), Mode::Fine);
  const auto coarse = explore(w2x2(), Mode::Coarse);
  const auto extended = p4_sequential().appended(Statement::commit(TxId{2}));
  ck.expect(fine.contains(p4_prefix().appended(Statement::commit(TxId{2}))), "h'.cmt2 is a fine history");
  ck.expect(check_conflict_opacity(p4_prefix()).opaque, "h' is conflict-opaque");
  ck.expect(strictly_equivalent(p4_prefix(), p4_sequential()), "h'' is strictly equivalent to h'");
  ck.expect(!coarse.contains(extended), "h''.cmt2 is not a coarse history");
  ck.expect(fine.contains(extended), "h''.cmt2 is a fine history");

  const auto strict = check_p4(fine, coarse, Property::P4Strict);
  const bool listed = std::any_of(strict.failures.begin(), strict.failures.end(), [](const Counterexample& c) {
    const auto* inst = std::get_if<P4Instance>(&c);
    return inst && inst->prefix == p4_prefix() && inst->next == Statement::commit(TxId{2});
  });
  ck.expect(!strict.holds && listed, "p4-strict fails on (h', cmt2)");
  ck.expect(!check_p4_instance(fine, p4_prefix(), Statement::commit(TxId{2})).has_value(),
            "p4-interleaved admits (h', cmt2)");
  return ck.result("p4-ambiguity");
}

ReproResult repro_abort_isolation() {
  Checker ck;
  const auto rs = explore(two_writers(), Mode::Fine);
  const auto report = check_abort_isolation(rs);
  ck.expect(!report.holds, "two-writers workload is not abort isolated");
  if (const auto* c = report.counterexample()) {
    const auto& v = std::get<AbortIsolationViolation>(*c);
    const bool var_cell = v.cell.kind != Cell::Kind::Status && v.cell.kind != Cell::Kind::RdSet;
    ck.expect(var_cell && v.change_step < v.observe_step && v.observe_step < v.abort_step && v.victim != v.observer,
              "violation: tx " + std::to_string(v.victim.value) + " changes " + describe(two_writers(), v.cell) +
                  ", tx " + std::to_string(v.observer.value) + " observes it before the abort");
  }
  return ck.result("abort-isolation");
}

const std::vector<std::pair<std::string, std::function<ReproResult()>>>& cases() {
  static const std::vector<std::pair<std::string, std::function<ReproResult()>>> all = {
      {"h1", repro_h1},
      {"h2", repro_h2},
      {"h3", repro_h3},
      {"h4", repro_h4},
      {"paper-h", repro_concurrent_commits},
      {"p4-ambiguity", repro_p4_ambiguity},
      {"abort-isolation", repro_abort_isolation},
      {"incomparability", repro_incomparability},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& repro_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : cases()) out.push_back(name);
    return out;
  }();
  return names;
}

ReproResult run_repro(std::string_view name) {
  for (const auto& [n, fn] : cases()) {
    if (n == name) return fn();
  }
  throw Error("unknown repro case '" + std::string(name) + "'");
}

}  // namespace stmcheck::golden
