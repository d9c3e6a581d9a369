#include <algorithm>

#include "doctest.h"
#include "stmcheck/golden.hpp"
#include "stmcheck/opacity.hpp"
#include "stmcheck/properties.hpp"

using namespace stmcheck;

namespace {

TxId T(std::uint32_t v) { return TxId{v}; }

ReachableSet hand_built(std::initializer_list<const char*> texts, Workload w = {}) {
  ReachableSet rs;
  rs.workload = std::move(w);
  for (const char* t : texts) {
    const auto h = parse_history(t);
    rs.histories.insert(h);
    rs.shapes.insert(h.stripped());
  }
  return rs;
}

Workload single() {
  Workload w;
  w.vars = {"x"};
  w.values = {0, 1};
  w.transactions = {{Command::write(0, 1), Command::read(0), Command::try_commit()}};
  return w;
}

Workload readers() {
  Workload w;
  w.vars = {"x", "y"};
  w.values = {0};
  w.transactions = {{Command::read(0), Command::read(1), Command::try_commit()},
                    {Command::read(1), Command::read(0), Command::try_commit()}};
  return w;
}

// Independent re-check of an abort-isolation counterexample from a fresh replay.
void reverify(const Workload& w, const AbortIsolationViolation& v) {
  const auto tr = replay(w, v.schedule, Mode::Fine);
  CHECK(tr.history == v.history);
  REQUIRE(v.change_step < v.observe_step);
  REQUIRE(v.observe_step < v.abort_step);
  REQUIRE(v.abort_step < tr.schedule.size());
  CHECK(tr.schedule[v.change_step].tx == v.victim);
  CHECK(tr.schedule[v.observe_step].tx == v.observer);
  CHECK(v.victim != v.observer);

  auto accesses_at = [&](std::size_t step) {
    std::vector<MetaAccess> out;
    for (const auto& a : tr.meta_accesses) {
      if (a.step == step) out.push_back(a);
    }
    return out;
  };
  const auto changes = accesses_at(v.change_step);
  CHECK(std::any_of(changes.begin(), changes.end(), [&](const MetaAccess& a) {
    return a.kind == AccessKind::Write && a.changed && a.cell == v.cell && a.tx == v.victim;
  }));
  const auto observes = accesses_at(v.observe_step);
  CHECK(std::any_of(observes.begin(), observes.end(), [&](const MetaAccess& a) {
    return a.kind == AccessKind::Read && a.cell == v.cell && a.tx == v.observer;
  }));
  // Nobody changed the cell in between.
  for (const auto& a : tr.meta_accesses) {
    if (a.step > v.change_step && a.step < v.observe_step && a.cell == v.cell && a.kind == AccessKind::Write) {
      CHECK_FALSE(a.changed);
    }
  }
  // The victim is still running when observed and aborts at abort_step.
  const auto& at_observe = tr.configs[v.observe_step + 1];
  CHECK(at_observe.tm.status_of(v.victim) == Status::Running);
  CHECK(at_observe.finished[v.victim.value] == Outcome::Running);
  const auto& before_abort = tr.configs[v.abort_step];
  const auto& after_abort = tr.configs[v.abort_step + 1];
  const bool status_flip =
      before_abort.tm.status_of(v.victim) != Status::Aborted && after_abort.tm.status_of(v.victim) == Status::Aborted;
  const bool returned_a = before_abort.finished[v.victim.value] == Outcome::Running &&
                          after_abort.finished[v.victim.value] == Outcome::Aborted;
  CHECK((status_flip || returned_a));
  // The observer does not abort in the observing step.
  const auto& before_obs = tr.configs[v.observe_step];
  CHECK(before_obs.tm.status_of(v.observer) == at_observe.tm.status_of(v.observer));
  CHECK(at_observe.finished[v.observer.value] != Outcome::Aborted);
}

void reverify(const ReachableSet& fine, const ReachableSet& admitting, const P4Instance& inst) {
  CHECK(p4_premise_holds(inst.prefix, inst.next));
  CHECK(fine.contains(inst.prefix.appended(inst.next)));
  const auto orders = strictly_equivalent_orders(inst.prefix);
  CHECK(orders.size() == inst.candidates.size());
  for (const auto& h : inst.candidates) {
    CHECK(is_sequential(h));
    CHECK(strictly_equivalent(inst.prefix, h));
    CHECK_FALSE(admitting.contains(h.appended(inst.next)));
  }
}

}  // namespace

TEST_CASE("property names round trip") {
  for (auto p : {Property::P1, Property::P3, Property::P4Strict, Property::P4Interleaved, Property::AbortIsolation}) {
    CHECK(parse_property(property_name(p)) == p);
  }
  CHECK_THROWS_AS(parse_property("p2"), Error);
}

TEST_CASE("P1 on a single transaction holds") {
  const auto rs = explore(single(), Mode::Fine);
  const auto r = check_p1(rs);
  CHECK(r.holds);
  CHECK(r.checked_count > 0);
  CHECK(r.counterexample() == nullptr);
}

TEST_CASE("P1 on a hand-built set") {
  CHECK(check_p1(hand_built({"wr1(x) cmt1 rd2(x) cmt2", "wr1(x) cmt1"})).holds);

  // The projection onto the committed transaction is missing.
  const auto r = check_p1(hand_built({"", "rd2(x)", "rd2(x) wr1(x)", "rd2(x) wr1(x) cmt1"}));
  CHECK_FALSE(r.holds);
  REQUIRE(r.counterexample());
  const P1Failure* full = nullptr;
  for (const auto& c : r.failures) {
    const auto& f = std::get<P1Failure>(c);
    CHECK(f.projection == project_tx(f.history, f.kept));
    if (render(f.history) == "rd2(x) wr1(x) cmt1" && f.kept == std::set<TxId>{T(1)}) full = &f;
  }
  REQUIRE(full);
  CHECK(committed_txs(full->history) == std::set<TxId>{T(1)});
  CHECK(render(full->projection) == "wr1(x) cmt1");
}

TEST_CASE("P1 and P3 on w2x2 (frozen)") {
  const auto rs = explore(golden::w2x2(), Mode::Fine);
  const auto p1 = check_p1(rs);
  CHECK(p1.holds);
  CHECK(p1.checked_count == 850);
  const auto p3 = check_p3(rs);
  CHECK(p3.holds);
  CHECK(p3.checked_count == 699);
  const auto px = check_p3(rs, {{"x"}});
  CHECK(px.holds);
}

TEST_CASE("P1 and P3 on two writers (frozen)") {
  const auto rs = explore(golden::two_writers(), Mode::Fine);
  CHECK(check_p1(rs).holds);
  CHECK(check_p1(rs).checked_count == 75);
  CHECK(check_p3(rs).holds);
}

TEST_CASE("P3 with all variables is the identity projection") {
  const auto rs = explore(golden::w2x2(), Mode::Coarse);
  const auto r = check_p3(rs, {{"x", "y"}});
  CHECK(r.holds);
  CHECK(r.checked_count > 0);
}

TEST_CASE("P3 on a hand-built set decided by membership in the restricted workload") {
  Workload w;
  w.vars = {"x", "y"};
  w.values = {0, 1, 2};
  w.transactions = {{Command::write(0, 1), Command::write(1, 1), Command::try_commit()},
                    {Command::read(0), Command::write(1, 2), Command::try_commit()}};
  auto rs = hand_built({"wr1(x) wr1(y) rd2(x) cmt1 wr2(y) cmt2"}, w);
  const auto r = check_p3(rs, {{"x"}});
  const bool member = admits_history(w.restricted_to({"x"}), parse_history("wr1(x) rd2(x) cmt1 cmt2"), Mode::Fine);
  CHECK(r.holds == member);
  CHECK(r.checked_count == 1);
}

TEST_CASE("P3 rejects bad variable sets and skips aborting histories") {
  const auto rs = explore(golden::two_writers(), Mode::Fine);
  CHECK_THROWS_AS(check_p3(rs, {{}}), Error);
  CHECK_THROWS_AS(check_p3(rs, {{"q"}}), Error);
  const auto r = check_p3(rs, {{"x"}});
  std::size_t abort_free = 0;
  for (const auto& h : rs.shapes) {
    abort_free += std::none_of(h.begin(), h.end(), [](const Statement& s) { return s.kind == StmtKind::Abort; });
  }
  CHECK(r.checked_count == abort_free);
}

TEST_CASE("nonempty_var_subsets") {
  const auto s = nonempty_var_subsets(golden::w2x2());
  REQUIRE(s.size() == 3);
  CHECK(s[0].size() == 1);
  CHECK(s[2] == std::set<VarId>{"x", "y"});
}

TEST_CASE("P4 premise") {
  CHECK(p4_premise_holds(golden::p4_prefix(), Statement::commit(T(2))));
  CHECK_FALSE(p4_premise_holds(golden::p4_prefix(), Statement::abort(T(2))));
  CHECK_FALSE(p4_premise_holds(golden::p4_prefix(), Statement::commit(T(1))));
  CHECK_FALSE(p4_premise_holds(golden::concurrent_commits().prefix(4), Statement::read(T(1), "x")));
  CHECK_THROWS_AS(check_p4_instance(explore(golden::w2x2(), Mode::Fine), golden::h2(), Statement::commit(T(2))),
                  Error);
}

TEST_CASE("P4 on w2x2: the strict reading fails on the concurrent-commit instance, the interleaved one does not") {
  const auto fine = explore(golden::w2x2(), Mode::Fine);
  const auto coarse = explore(golden::w2x2(), Mode::Coarse);
  const auto cmt2 = Statement::commit(T(2));

  const auto strict_inst = check_p4_instance(coarse, golden::p4_prefix(), cmt2);
  REQUIRE(strict_inst);
  REQUIRE(strict_inst->candidates.size() == 1);
  CHECK(strict_inst->candidates[0] == golden::p4_sequential());
  CHECK_FALSE(check_p4_instance(fine, golden::p4_prefix(), cmt2));

  const auto strict = check_p4(fine, P4Interpretation::Strict);
  const auto interleaved = check_p4(fine, P4Interpretation::Interleaved);
  CHECK(strict.property == Property::P4Strict);
  CHECK(interleaved.property == Property::P4Interleaved);
  CHECK_FALSE(strict.holds);
  CHECK(strict.checked_count == interleaved.checked_count);

  auto is_obs4 = [&](const Counterexample& c) {
    const auto& i = std::get<P4Instance>(c);
    return i.prefix == golden::p4_prefix() && i.next == cmt2;
  };
  CHECK(std::any_of(strict.failures.begin(), strict.failures.end(), is_obs4));
  CHECK(std::none_of(interleaved.failures.begin(), interleaved.failures.end(), is_obs4));

  // Monotonicity: every interleaved failure is also a strict failure.
  for (const auto& c : interleaved.failures) {
    const auto& i = std::get<P4Instance>(c);
    CHECK(std::any_of(strict.failures.begin(), strict.failures.end(), [&](const Counterexample& d) {
      const auto& j = std::get<P4Instance>(d);
      return j.prefix == i.prefix && j.next == i.next;
    }));
  }

  // Frozen counts; the interleaved failures all involve an aborted transaction.
  CHECK(strict.checked_count == 186);
  CHECK(strict.failures.size() == 138);
  CHECK(interleaved.failures.size() == 14);
  for (const auto& c : interleaved.failures) {
    const auto& i = std::get<P4Instance>(c);
    CHECK(std::any_of(i.prefix.begin(), i.prefix.end(), [](const Statement& s) { return s.kind == StmtKind::Abort; }));
  }

  for (const auto& c : strict.failures) reverify(fine, coarse, std::get<P4Instance>(c));
  for (const auto& c : interleaved.failures) reverify(fine, fine, std::get<P4Instance>(c));
}

TEST_CASE("P4 holds on a single transaction") {
  const auto fine = explore(single(), Mode::Fine);
  CHECK(check_p4(fine, P4Interpretation::Strict).holds);
  CHECK(check_p4(fine, P4Interpretation::Interleaved).holds);
  CHECK(check_p4(fine, P4Interpretation::Interleaved).checked_count > 0);
}

TEST_CASE("P4 requires a fine ambient set") {
  const auto coarse = explore(single(), Mode::Coarse);
  CHECK_THROWS_AS(check_p4(coarse, P4Interpretation::Interleaved), Error);
}

TEST_CASE("abort isolation fails on two writers with the writer-field pattern") {
  const auto w = golden::two_writers();
  const auto r = check_abort_isolation(explore(w, Mode::Fine));
  CHECK(r.property == Property::AbortIsolation);
  CHECK_FALSE(r.holds);
  REQUIRE(r.counterexample());
  const auto& v = std::get<AbortIsolationViolation>(*r.counterexample());
  CHECK(v.cell.kind == Cell::Kind::Writer);
  CHECK(v.cell.index == 0);
  CHECK(v.victim == T(1));
  CHECK(v.observer == T(2));
  CHECK(v.schedule[v.change_step].label == "write: b:=state(x).CAS(st,st')");
  CHECK(v.schedule[v.observe_step].label == "write: st:=state(x)");
  reverify(w, v);

  // The trace scanner finds the same violation on the replayed schedule.
  const auto tr = replay(w, v.schedule, Mode::Fine);
  const auto found = find_abort_isolation_violations(w, tr);
  CHECK(std::any_of(found.begin(), found.end(), [&](const AbortIsolationViolation& f) {
    return f.victim == v.victim && f.observer == v.observer && f.cell == v.cell && f.observe_step == v.observe_step;
  }));
}

TEST_CASE("abort isolation on w2x2 fails and re-verifies") {
  const auto w = golden::w2x2();
  const auto r = check_abort_isolation(explore(w, Mode::Fine));
  CHECK_FALSE(r.holds);
  reverify(w, std::get<AbortIsolationViolation>(*r.counterexample()));
}

TEST_CASE("abort isolation holds vacuously without a second transaction or without aborts") {
  CHECK(check_abort_isolation(explore(single(), Mode::Fine)).holds);
  const auto rs = explore(readers(), Mode::Fine);
  for (const auto& h : rs.histories) {
    CHECK(std::none_of(h.begin(), h.end(), [](const Statement& s) { return s.kind == StmtKind::Abort; }));
  }
  CHECK(check_abort_isolation(rs).holds);
}

TEST_CASE("abort isolation requires a fine set") {
  CHECK_THROWS_AS(check_abort_isolation(explore(single(), Mode::Coarse)), Error);
}

TEST_CASE("trace scanner on a hand-made schedule") {
  // tx 1 installs itself as writer of x; tx 2 loads state(x) and later aborts tx 1.
  const auto w = golden::two_writers();
  std::vector<ScheduleStep> schedule;
  Config c = init_config(w);
  auto run_to = [&](std::uint32_t t, Pc pc) {
    while (c.frame(T(t)).idle() || c.frame(T(t)).pc != pc) {
      schedule.push_back({T(t), step_label(c, w, T(t), Mode::Fine)});
      step_in_place(c, w, T(t), Mode::Fine);
    }
  };
  run_to(1, Pc::WriteIfCas);
  run_to(2, Pc::SvStatusAgain);
  const auto tr = replay(w, schedule, Mode::Fine);
  const auto found = find_abort_isolation_violations(w, tr);
  REQUIRE_FALSE(found.empty());
  for (const auto& v : found) {
    CHECK(v.victim == T(1));
    CHECK(v.observer == T(2));
    reverify(w, v);
  }

  // Without the abort there is no violation.
  std::vector<ScheduleStep> shorter(schedule.begin(), schedule.end() - 2);
  CHECK(find_abort_isolation_violations(w, replay(w, shorter, Mode::Fine)).empty());
}
