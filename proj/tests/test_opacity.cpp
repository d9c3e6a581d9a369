#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stmcheck/golden.hpp"
#include "stmcheck/opacity.hpp"

using namespace stmcheck;

namespace {

TxId T(std::uint32_t v) { return TxId{v}; }
std::vector<TxId> ids(std::initializer_list<std::uint32_t> xs) {
  std::vector<TxId> out;
  for (auto x : xs) out.push_back(T(x));
  return out;
}

// Every consecutive pair of the cycle, closing back to the start, is a graph edge.
void check_cycle_sound(const History& h, const std::vector<TxId>& cycle) {
  const auto g = build_serialization_graph(h);
  REQUIRE(cycle.size() >= 2);
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const auto* e = g.find(cycle[i], cycle[(i + 1) % cycle.size()]);
    REQUIRE(e != nullptr);
    CHECK((e->real_time || !e->conflicts.empty()));
    if (e->real_time) {
      CHECK(oracle::finished(h, e->from));
      CHECK(oracle::precedes(h, e->from, e->to));
    }
    for (const auto& c : e->conflicts) {
      CHECK(oracle::conflict(h, c.first, c.second));
      CHECK(h[c.first].tx == e->from);
      CHECK(h[c.second].tx == e->to);
    }
  }
}

}  // namespace

TEST_CASE("find_conflicts on the reference histories") {
  const auto c1 = find_conflicts(golden::h1());
  REQUIRE(c1.size() == 1);
  CHECK(c1[0] == Conflict{1, 2, ConflictKind::ReadCommit, "x"});

  const auto c2 = find_conflicts(golden::h2());
  REQUIRE(c2.size() == 2);
  CHECK(c2[0] == Conflict{2, 3, ConflictKind::ReadCommit, "x"});
  CHECK(c2[1] == Conflict{3, 5, ConflictKind::CommitCommit, "y"});

  CHECK(find_conflicts(parse_history("wr1(x) cmt1")).empty());
  // A read of one's own write is not global and conflicts with nothing.
  CHECK(find_conflicts(parse_history("wr1(x) rd1(x) wr2(x) cmt2 cmt1")).size() == 1);
}

TEST_CASE("find_conflicts matches the pairwise definition") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto h = oracle::random_history(rng, 4, 10, {"x", "y"});
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& c : find_conflicts(h)) {
      CHECK(c.first < c.second);
      got.insert({c.first, c.second});
    }
    CHECK(got == oracle::conflict_pairs(h));
  }
}

TEST_CASE("strictly_equivalent") {
  CHECK(strictly_equivalent(golden::h1(), golden::h1()));
  CHECK(strictly_equivalent(golden::p4_prefix(), golden::p4_sequential()));
  CHECK_FALSE(strictly_equivalent(golden::h1(), parse_history("rd2(x) cmt2 wr1(x) cmt1")));
  // Values are ignored.
  CHECK(strictly_equivalent(golden::h3(), golden::h1()));
}

TEST_CASE("strictly_equivalent agrees with the clause-by-clause oracle") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1500; ++i) {
    const auto h = oracle::random_history(rng, 3, 8, {"x", "y"});
    auto order = h.transactions();
    do {
      const auto s = oracle::concat(h, order);
      CHECK(strictly_equivalent(h, s) == oracle::strictly_equivalent(h, s));
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

TEST_CASE("serialization graph edges") {
  const auto g2 = build_serialization_graph(golden::h2());
  CHECK(g2.has_edge(T(2), T(1)));
  CHECK(g2.has_edge(T(1), T(2)));
  CHECK_FALSE(g2.find(T(1), T(2))->real_time);

  const auto g4 = build_serialization_graph(golden::h4());
  CHECK(g4.has_edge(T(3), T(2)));
  CHECK(g4.has_edge(T(2), T(3)));

  const auto g1 = build_serialization_graph(golden::h1());
  REQUIRE(g1.edges.size() == 1);
  CHECK(g1.edges[0].from == T(1));
  CHECK(g1.edges[0].to == T(2));
  CHECK(g1.edges[0].real_time);
  CHECK(g1.edges[0].conflicts.size() == 1);
}

TEST_CASE("real-time edges only from finished transactions") {
  const auto g = build_serialization_graph(parse_history("wr1(x) rd2(y) cmt2"));
  CHECK_FALSE(g.has_edge(T(1), T(2)));
  const auto g2 = build_serialization_graph(parse_history("wr1(x) abrt1 rd2(y) cmt2"));
  CHECK(g2.has_edge(T(1), T(2)));
}

TEST_CASE("check_conflict_opacity on the reference histories") {
  const auto v1 = check_conflict_opacity(golden::h1());
  CHECK(v1.opaque);
  CHECK(v1.witness == ids({1, 2}));
  CHECK_FALSE(v1.cycle);

  const auto v2 = check_conflict_opacity(golden::h2());
  CHECK_FALSE(v2.opaque);
  CHECK(v2.cycle == ids({1, 2}));
  CHECK_FALSE(v2.witness);

  const auto vh = check_conflict_opacity(golden::concurrent_commits());
  CHECK_FALSE(vh.opaque);
  CHECK(vh.cycle == ids({1, 2}));

  CHECK(check_conflict_opacity(History{}).opaque);
  CHECK_FALSE(check_conflict_opacity(golden::h4()).opaque);
  CHECK(check_conflict_opacity(golden::p4_prefix()).opaque);
  CHECK(check_conflict_opacity(golden::p4_prefix()).witness == ids({2, 1}));
}

TEST_CASE("permutation oracle on the reference histories") {
  CHECK(check_conflict_opacity_oracle(golden::h1()).opaque);
  CHECK_FALSE(check_conflict_opacity_oracle(golden::h4()).opaque);
  CHECK_FALSE(check_conflict_opacity_oracle(golden::h2()).opaque);
  std::vector<Statement> nine;
  for (std::uint32_t t = 1; t <= 9; ++t) nine.push_back(Statement::commit(T(t)));
  CHECK_THROWS_AS(check_conflict_opacity_oracle(History(nine)), Error);
  CHECK(check_conflict_opacity(History(nine)).opaque);
}

TEST_CASE("graph decision equals both permutation oracles on random histories") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 3000; ++i) {
    const auto h = oracle::random_history(rng, 4, 10, {"x", "y"});
    const bool graph = check_conflict_opacity(h).opaque;
    CHECK(graph == check_conflict_opacity_oracle(h).opaque);
    CHECK(graph == oracle::conflict_opaque(h));
  }
}

TEST_CASE("graph decision equals the test oracle exhaustively on short histories") {
  std::size_t n = 0;
  oracle::for_each_history(2, {"x", "y"}, 4, [&](const History& h) {
    ++n;
    if (check_conflict_opacity(h).opaque != oracle::conflict_opaque(h)) FAIL_CHECK(render(h));
  });
  CHECK(n > 10000);
}

TEST_CASE("witness and cycle soundness") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 2000; ++i) {
    const auto h = oracle::random_history(rng, 4, 10, {"x", "y"});
    const auto v = check_conflict_opacity(h);
    if (v.opaque) {
      REQUIRE(v.witness);
      CHECK(v.witness->size() == h.transactions().size());
      const auto seq = sequentialize(h, *v.witness);
      CHECK(seq == oracle::concat(h, *v.witness));
      CHECK(is_sequential(seq));
      CHECK(oracle::strictly_equivalent(h, seq));
    } else {
      REQUIRE(v.cycle);
      CHECK(v.cycle->front() == *std::min_element(v.cycle->begin(), v.cycle->end()));
      check_cycle_sound(h, *v.cycle);
    }
  }
}

TEST_CASE("sequential histories are conflict-opaque with their own order") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 500; ++i) {
    const auto h = oracle::random_history(rng, 4, 10, {"x", "y"});
    auto order = h.transactions();
    const auto seq = oracle::concat(h, order);
    const auto v = check_conflict_opacity(seq);
    CHECK(v.opaque);
    CHECK(v.witness == oracle::txs_in_order_of_appearance(seq));
  }
}

TEST_CASE("strictly_equivalent_orders lists exactly the passing permutations") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 500; ++i) {
    const auto h = oracle::random_history(rng, 3, 8, {"x", "y"});
    std::set<std::vector<TxId>> expected;
    auto order = h.transactions();
    do {
      if (oracle::strictly_equivalent(h, oracle::concat(h, order))) expected.insert(order);
    } while (std::next_permutation(order.begin(), order.end()));
    const auto got = strictly_equivalent_orders(h);
    CHECK(std::set<std::vector<TxId>>(got.begin(), got.end()) == expected);
  }
  const auto p4 = strictly_equivalent_orders(golden::p4_prefix());
  REQUIRE(p4.size() == 1);
  CHECK(sequentialize(golden::p4_prefix(), p4[0]) == golden::p4_sequential());
}

TEST_CASE("legal_sequential") {
  CHECK_FALSE(legal_sequential(sequentialize(golden::h4(), ids({1, 2, 3}))));
  CHECK(legal_sequential(golden::h3()) == std::optional<std::size_t>{2});
  CHECK_FALSE(legal_sequential(parse_history("wr1(x,5) rd1(x,5) cmt1")));
  CHECK(legal_sequential(parse_history("rd1(x,1) cmt1")) == std::optional<std::size_t>{0});
  // Writes of aborted and live transactions stay invisible.
  CHECK(legal_sequential(parse_history("wr1(x,4) abrt1 rd2(x,4)")) == std::optional<std::size_t>{2});
  CHECK_FALSE(legal_sequential(parse_history("wr1(x,4) abrt1 rd2(x,0)")));
  CHECK_THROWS_AS(legal_sequential(golden::h1()), Error);
  CHECK_THROWS_AS(legal_sequential(parse_history("wr1(x,1) rd2(x,0) cmt1")), Error);
}

TEST_CASE("check_value_opacity") {
  const auto v4 = check_value_opacity(golden::h4());
  CHECK(v4.opaque);
  CHECK(v4.witness == ids({1, 2, 3}));

  const auto v3 = check_value_opacity(golden::h3());
  CHECK_FALSE(v3.opaque);
  CHECK(v3.illegal_read == std::optional<std::size_t>{2});

  CHECK(check_value_opacity(parse_history("wr1(x,7) cmt1 rd2(x,7) cmt2")).opaque);
  CHECK(check_value_opacity(History{}).opaque);
  CHECK_THROWS_AS(check_value_opacity(golden::h1()), Error);
}

TEST_CASE("value opacity agrees with the brute-force legality oracle") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 3000; ++i) {
    const auto h = oracle::random_history(rng, 3, 8, {"x", "y"}, true, {0, 1, 2});
    const auto v = check_value_opacity(h);
    CHECK(v.opaque == oracle::value_opaque(h));
    if (v.opaque) {
      REQUIRE(v.witness);
      CHECK(oracle::legal(oracle::concat(h, *v.witness)));
    } else {
      REQUIRE(v.illegal_read);
      CHECK(h[*v.illegal_read].kind == StmtKind::Read);
    }
  }
}

TEST_CASE("conflict and value opacity are incomparable") {
  CHECK(check_conflict_opacity(golden::h3()).opaque);
  CHECK_FALSE(check_value_opacity(golden::h3()).opaque);
  CHECK_FALSE(check_conflict_opacity(golden::h4()).opaque);
  CHECK(check_value_opacity(golden::h4()).opaque);
}
