#ifndef STMCHECK_COREDSTM_HPP
#define STMCHECK_COREDSTM_HPP

// Operational model of CoreDSTM. A Config is a plain value; every step is a
// deterministic function of (Config, transaction, granularity).
//
// Fine granularity executes one pseudocode line per step. Each line touches
// at most the meta-data cells it names, and a CAS compares and sets in that
// single step. Calls into stableValue/validate are inlined into the caller's
// control flow; the call itself is not a step. Coarse granularity executes a
// whole read/write/commit operation per step.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stmcheck/history.hpp"
#include "stmcheck/workload.hpp"

namespace stmcheck {

enum class Status : std::uint8_t { Committed, Aborted, Running };

char status_char(Status s);

struct VarState {
  TxId writer;
  Value old_val = 0;
  Value new_val = 0;

  bool operator==(const VarState&) const = default;
};

struct ReadEntry {
  std::size_t var = 0;
  Value val = 0;

  bool operator==(const ReadEntry&) const = default;
};

/// Shared meta-data. Vectors indexed by transaction id include t0 at index 0.
struct TMState {
  std::vector<Status> status;
  std::vector<std::vector<ReadEntry>> rd_set;  // insertion order, no duplicate pairs
  std::vector<VarState> var_state;

  Status status_of(TxId t) const { return status.at(t.value); }
  bool operator==(const TMState&) const = default;
};

/// Program counter: the next line a frame executes.
enum class Pc : std::uint8_t {
  Idle,
  ReadStatus,
  ReadIfAborted,
  ReadReturnAborted,
  ReadLoadState,
  ReadWriter,
  ReadIfForeign,
  ReadAddRdSet,
  ReadIfInvalid,
  ReadReturnInvalid,
  ReadReturnValue,
  WriteStatus,
  WriteIfAborted,
  WriteReturnAborted,
  WriteLoadState,
  WriteWriter,
  WriteIfOwn,
  WriteSetNewVal,
  WriteReturnOwn,
  WriteMakeState,
  WriteCas,
  WriteIfCas,
  WriteReturnOk,
  WriteReturnCasFailed,
  CommitIfInvalid,
  CommitReturnInvalid,
  CommitCas,
  CommitIfCas,
  CommitReturnCommitted,
  CommitReturnCasFailed,
  SvWriter,
  SvStatus,
  SvIfRunning,
  SvCas,
  SvStatusAgain,
  SvIfAborted,
  SvOldVal,
  SvNewVal,
  SvReturn,
  ValLoop,
  ValLoadState,
  ValWriter,
  ValStatus,
  ValIfCommitted,
  ValNewVal,
  ValOldVal,
  ValIfMismatch,
  ValReturnFalse,
  ValOwnStatus,
  ValReturn,
};

/// Pseudocode text of the line at `pc`, e.g. "commit: b:=status(t).CAS(R,C)".
std::string_view pc_label(Pc pc);
bool is_cas_line(Pc pc);

/// Local registers. Caller-level, stableValue and validate registers are kept
/// apart because the procedures have separate scopes; callee registers are
/// cleared when the callee returns.
struct Registers {
  Status s = Status::Running;
  VarState st;
  Value v = 0;
  TxId wr;
  bool valid = false;
  bool b = false;
  Value v_stable = 0;  // write's v'
  VarState st_new;     // write's st'

  TxId sv_writer;
  Status sv_s1 = Status::Running;
  Status sv_s2 = Status::Running;
  Value sv_v = 0;

  std::uint8_t val_cursor = 0;
  std::size_t val_x = 0;
  Value val_v = 0;
  VarState val_st;
  TxId val_writer;
  Status val_s1 = Status::Running;
  Value val_v1 = 0;
  Status val_s = Status::Running;

  bool operator==(const Registers&) const = default;
};

struct Frame {
  Pc pc = Pc::Idle;
  Pc ret = Pc::Idle;  // continuation after an inlined stableValue/validate
  Command op;
  Registers regs;

  bool idle() const { return pc == Pc::Idle; }
  bool operator==(const Frame&) const = default;
};

enum class Outcome : std::uint8_t { Running, Committed, Aborted };

/// A completed operation, kept with variable indices; names come from the workload.
struct Event {
  StmtKind kind = StmtKind::Commit;
  TxId tx;
  std::size_t var = 0;
  Value val = 0;

  bool operator==(const Event&) const = default;
};

struct Config {
  TMState tm;
  std::vector<Frame> frames;         // indexed by tx id, [0] unused
  std::vector<std::size_t> cursor;   // commands completed per tx
  std::vector<Outcome> finished;     // indexed by tx id
  std::vector<Event> emitted;

  std::size_t tx_count() const { return frames.size() - 1; }
  const Frame& frame(TxId t) const { return frames.at(t.value); }

  /// Canonical byte encoding; equal configs encode equally.
  void encode(std::string& out) const;
  bool operator==(const Config&) const = default;
};

Config init_config(std::size_t tx_count, std::size_t var_count);
Config init_config(const Workload& w);

History to_history(const Workload& w, const std::vector<Event>& events);

enum class Mode { Fine, Coarse };

std::string_view mode_name(Mode m);

struct Cell {
  enum class Kind : std::uint8_t { Status, RdSet, Writer, OldVal, NewVal };
  Kind kind = Kind::Status;
  std::uint32_t index = 0;  // tx id for Status/RdSet, var index otherwise

  auto operator<=>(const Cell&) const = default;
};

std::string describe(const Workload& w, const Cell& c);

enum class AccessKind : std::uint8_t { Read, Write };

struct MetaAccess {
  std::size_t step = 0;
  TxId tx;
  Cell cell;
  AccessKind kind = AccessKind::Read;
  bool changed = false;  // writes only: stored value differs afterwards

  bool operator==(const MetaAccess&) const = default;
};

struct EnabledStep {
  TxId tx;
  std::string label;

  bool operator==(const EnabledStep&) const = default;
};

bool is_enabled(const Config& c, const Workload& w, TxId t);
std::string step_label(const Config& c, const Workload& w, TxId t, Mode mode);
/// Ascending by transaction id.
std::vector<EnabledStep> enabled_steps(const Config& c, const Workload& w, Mode mode);

/// Advances `t` by one step, appending touched cells to `log` when given.
/// Throws Error when `t` is not enabled.
void step_in_place(Config& c, const Workload& w, TxId t, Mode mode, std::vector<MetaAccess>* log = nullptr,
                   std::size_t step_index = 0);
Config step(const Config& c, const Workload& w, TxId t, Mode mode);

struct OpResult {
  enum class Kind { Ok, Value, Committed, Aborted };
  Kind kind = Kind::Ok;
  Value value = 0;

  bool operator==(const OpResult&) const = default;
};

/// Runs `cmd` for `t` to completion with no interleaving. Requires an idle,
/// unfinished frame.
std::pair<Config, OpResult> run_operation(const Config& c, TxId t, const Command& cmd);

}  // namespace stmcheck

#endif  // STMCHECK_COREDSTM_HPP
