#ifndef STMCHECK_GOLDEN_HPP
#define STMCHECK_GOLDEN_HPP

// Reference histories and workloads with known outcomes, and the `repro`
// cases that check them.

#include <string>
#include <string_view>
#include <vector>

#include "stmcheck/history.hpp"
#include "stmcheck/workload.hpp"

namespace stmcheck::golden {

// wr1(x) cmt1 rd2(x) cmt2
History h1();
// wr1(x) wr1(y) rd2(x) cmt1 wr2(y) cmt2
History h2();
// wr1(x,7) cmt1 rd2(x,3) cmt2
History h3();
// wr1(x,5) wr2(x,5) wr1(y,42) wr2(y,43) cmt1 rd3(x,5) cmt2 rd3(y,43) cmt3
History h4();
/// Both transactions read x and y, write one each, and commit concurrently.
History concurrent_commits();
/// concurrent_commits() without the final cmt2.
History p4_prefix();
/// The only sequential history strictly equivalent to p4_prefix().
History p4_sequential();

/// Two transactions: read x, read y, write (x:=7 resp. y:=8), commit.
Workload w2x2();
/// Two transactions: write x (1 resp. 2), commit.
Workload two_writers();

struct ReproResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

const std::vector<std::string>& repro_names();
/// Throws Error for an unknown name.
ReproResult run_repro(std::string_view name);

}  // namespace stmcheck::golden

#endif  // STMCHECK_GOLDEN_HPP
