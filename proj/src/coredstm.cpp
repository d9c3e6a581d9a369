#include "stmcheck/coredstm.hpp"

#include <algorithm>
#include <optional>

namespace stmcheck {

char status_char(Status s) {
  switch (s) {
    case Status::Committed: return 'C';
    case Status::Aborted: return 'A';
    case Status::Running: return 'R';
  }
  return '?';
}

std::string_view pc_label(Pc pc) {
  switch (pc) {
    case Pc::Idle: return "idle";
    case Pc::ReadStatus: return "read: s:=status(t)";
    case Pc::ReadIfAborted: return "read: if (s=A)";
    case Pc::ReadReturnAborted: return "read: return A";
    case Pc::ReadLoadState: return "read: st:=state(x)";
    case Pc::ReadWriter: return "read: wr:=st.writer";
    case Pc::ReadIfForeign: return "read: if (wr!=t)";
    case Pc::ReadAddRdSet: return "read: rdSet(t).add((x,v))";
    case Pc::ReadIfInvalid: return "read: if (!valid)";
    case Pc::ReadReturnInvalid: return "read: return A (invalid)";
    case Pc::ReadReturnValue: return "read: return v";
    case Pc::WriteStatus: return "write: s:=status(t)";
    case Pc::WriteIfAborted: return "write: if (s=A)";
    case Pc::WriteReturnAborted: return "write: return A";
    case Pc::WriteLoadState: return "write: st:=state(x)";
    case Pc::WriteWriter: return "write: wr:=st.writer";
    case Pc::WriteIfOwn: return "write: if (wr=t)";
    case Pc::WriteSetNewVal: return "write: st.newVal:=v";
    case Pc::WriteReturnOwn: return "write: return ok (own)";
    case Pc::WriteMakeState: return "write: st':=(t,v',v)";
    case Pc::WriteCas: return "write: b:=state(x).CAS(st,st')";
    case Pc::WriteIfCas: return "write: if (b)";
    case Pc::WriteReturnOk: return "write: return ok";
    case Pc::WriteReturnCasFailed: return "write: return A (CAS failed)";
    case Pc::CommitIfInvalid: return "commit: if (!valid)";
    case Pc::CommitReturnInvalid: return "commit: return A (invalid)";
    case Pc::CommitCas: return "commit: b:=status(t).CAS(R,C)";
    case Pc::CommitIfCas: return "commit: if (b)";
    case Pc::CommitReturnCommitted: return "commit: return C";
    case Pc::CommitReturnCasFailed: return "commit: return A (CAS failed)";
    case Pc::SvWriter: return "stableValue: t':=st.writer";
    case Pc::SvStatus: return "stableValue: s':=status(t')";
    case Pc::SvIfRunning: return "stableValue: if (t'!=t and s'=R)";
    case Pc::SvCas: return "stableValue: status(t').CAS(R,A)";
    case Pc::SvStatusAgain: return "stableValue: s'':=status(t')";
    case Pc::SvIfAborted: return "stableValue: if (s''=A)";
    case Pc::SvOldVal: return "stableValue: v:=st.oldVal";
    case Pc::SvNewVal: return "stableValue: v:=st.newVal";
    case Pc::SvReturn: return "stableValue: return v";
    case Pc::ValLoop: return "validate: forall (x,v) in rdSet(t)";
    case Pc::ValLoadState: return "validate: st:=state(x)";
    case Pc::ValWriter: return "validate: t':=st.writer";
    case Pc::ValStatus: return "validate: s':=status(t')";
    case Pc::ValIfCommitted: return "validate: if (s'=C)";
    case Pc::ValNewVal: return "validate: v':=st.newVal";
    case Pc::ValOldVal: return "validate: v':=st.oldVal";
    case Pc::ValIfMismatch: return "validate: if (v!=v')";
    case Pc::ValReturnFalse: return "validate: return false";
    case Pc::ValOwnStatus: return "validate: s:=status(t)";
    case Pc::ValReturn: return "validate: return (s=R)";
  }
  return "?";
}

bool is_cas_line(Pc pc) { return pc == Pc::WriteCas || pc == Pc::CommitCas || pc == Pc::SvCas; }

std::string_view mode_name(Mode m) { return m == Mode::Fine ? "fine" : "coarse"; }

std::string describe(const Workload& w, const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::Status: return "status(" + std::to_string(c.index) + ")";
    case Cell::Kind::RdSet: return "rdSet(" + std::to_string(c.index) + ")";
    case Cell::Kind::Writer: return "state(" + w.vars.at(c.index) + ").writer";
    case Cell::Kind::OldVal: return "state(" + w.vars.at(c.index) + ").oldVal";
    case Cell::Kind::NewVal: return "state(" + w.vars.at(c.index) + ").newVal";
  }
  return "?";
}

namespace {

void put(std::string& out, std::uint64_t v) {
  // LEB128
  do {
    std::uint8_t byte = v & 0x7f;
    v >>= 7;
    if (v != 0) byte |= 0x80;
    out.push_back(static_cast<char>(byte));
  } while (v != 0);
}

void put_value(std::string& out, Value v) {
  put(out, (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63));
}

void put_state(std::string& out, const VarState& st) {
  put(out, st.writer.value);
  put_value(out, st.old_val);
  put_value(out, st.new_val);
}

void put_regs(std::string& out, const Registers& r) {
  out.push_back(static_cast<char>(r.s));
  put_state(out, r.st);
  put_value(out, r.v);
  put(out, r.wr.value);
  out.push_back(static_cast<char>(r.valid | (r.b << 1)));
  put_value(out, r.v_stable);
  put_state(out, r.st_new);
  put(out, r.sv_writer.value);
  out.push_back(static_cast<char>(r.sv_s1));
  out.push_back(static_cast<char>(r.sv_s2));
  put_value(out, r.sv_v);
  put(out, r.val_cursor);
  put(out, r.val_x);
  put_value(out, r.val_v);
  put_state(out, r.val_st);
  put(out, r.val_writer.value);
  out.push_back(static_cast<char>(r.val_s1));
  put_value(out, r.val_v1);
  out.push_back(static_cast<char>(r.val_s));
}

struct Recorder {
  std::vector<MetaAccess>* log;
  std::size_t step;
  TxId tx;

  void read(Cell c) const {
    if (log) log->push_back({step, tx, c, AccessKind::Read, false});
  }
  void write(Cell c, bool changed) const {
    if (log) log->push_back({step, tx, c, AccessKind::Write, changed});
  }
  void read_state(std::size_t x) const {
    const auto i = static_cast<std::uint32_t>(x);
    read({Cell::Kind::Writer, i});
    read({Cell::Kind::OldVal, i});
    read({Cell::Kind::NewVal, i});
  }
};

Cell status_cell(TxId t) { return {Cell::Kind::Status, t.value}; }

void begin_operation(Frame& f, const Command& cmd) {
  f.op = cmd;
  switch (cmd.kind) {
    case Command::Kind::Read: f.pc = Pc::ReadStatus; break;
    case Command::Kind::Write: f.pc = Pc::WriteStatus; break;
    case Command::Kind::TryCommit:
      f.pc = Pc::ValLoop;
      f.ret = Pc::CommitIfInvalid;
      break;
  }
}

void clear_stable_value_regs(Registers& r) {
  r.sv_writer = TxId{};
  r.sv_s1 = r.sv_s2 = Status::Running;
  r.sv_v = 0;
}

void clear_validate_iteration(Registers& r) {
  r.val_x = 0;
  r.val_v = 0;
  r.val_st = {};
  r.val_writer = TxId{};
  r.val_s1 = Status::Running;
  r.val_v1 = 0;
}

void clear_validate_regs(Registers& r) {
  clear_validate_iteration(r);
  r.val_cursor = 0;
  r.val_s = Status::Running;
}

/// Ends the current operation of `t`, emitting its history event.
Event complete(Config& c, TxId t, StmtKind kind, Value val) {
  Frame& f = c.frames[t.value];
  Event e{kind, t, f.op.var, val};
  if (kind == StmtKind::Commit || kind == StmtKind::Abort) e.var = 0;
  c.emitted.push_back(e);
  if (kind == StmtKind::Abort) c.finished[t.value] = Outcome::Aborted;
  if (kind == StmtKind::Commit) c.finished[t.value] = Outcome::Committed;
  ++c.cursor[t.value];
  f = Frame{};
  return e;
}

/// Executes the line at the frame's pc. Returns the event if the operation completed.
std::optional<Event> exec_line(Config& c, TxId t, const Recorder& rec) {
  Frame& f = c.frames[t.value];
  Registers& r = f.regs;
  TMState& tm = c.tm;
  const std::size_t x = f.op.var;

  switch (f.pc) {
    case Pc::Idle:
      throw Error("exec_line: frame is idle");

    // read_t(x)
    case Pc::ReadStatus:
      r.s = tm.status[t.value];
      rec.read(status_cell(t));
      f.pc = Pc::ReadIfAborted;
      break;
    case Pc::ReadIfAborted:
      f.pc = r.s == Status::Aborted ? Pc::ReadReturnAborted : Pc::ReadLoadState;
      break;
    case Pc::ReadReturnAborted:
      return complete(c, t, StmtKind::Abort, 0);
    case Pc::ReadLoadState:
      r.st = tm.var_state[x];
      rec.read_state(x);
      f.pc = Pc::SvWriter;
      f.ret = Pc::ReadWriter;
      break;
    case Pc::ReadWriter:
      r.wr = r.st.writer;
      f.pc = Pc::ReadIfForeign;
      break;
    case Pc::ReadIfForeign:
      if (r.wr != t) {
        f.pc = Pc::ReadAddRdSet;
      } else {
        f.pc = Pc::ValLoop;
        f.ret = Pc::ReadIfInvalid;
      }
      break;
    case Pc::ReadAddRdSet: {
      auto& rs = tm.rd_set[t.value];
      const ReadEntry entry{x, r.v};
      const bool fresh = std::find(rs.begin(), rs.end(), entry) == rs.end();
      if (fresh) rs.push_back(entry);
      rec.write({Cell::Kind::RdSet, t.value}, fresh);
      f.pc = Pc::ValLoop;
      f.ret = Pc::ReadIfInvalid;
      break;
    }
    case Pc::ReadIfInvalid:
      f.pc = r.valid ? Pc::ReadReturnValue : Pc::ReadReturnInvalid;
      break;
    case Pc::ReadReturnInvalid:
      return complete(c, t, StmtKind::Abort, 0);
    case Pc::ReadReturnValue:
      return complete(c, t, StmtKind::Read, r.v);

    // write_t(x, v)
    case Pc::WriteStatus:
      r.s = tm.status[t.value];
      rec.read(status_cell(t));
      f.pc = Pc::WriteIfAborted;
      break;
    case Pc::WriteIfAborted:
      f.pc = r.s == Status::Aborted ? Pc::WriteReturnAborted : Pc::WriteLoadState;
      break;
    case Pc::WriteReturnAborted:
      return complete(c, t, StmtKind::Abort, 0);
    case Pc::WriteLoadState:
      r.st = tm.var_state[x];
      rec.read_state(x);
      f.pc = Pc::WriteWriter;
      break;
    case Pc::WriteWriter:
      r.wr = r.st.writer;
      f.pc = Pc::WriteIfOwn;
      break;
    case Pc::WriteIfOwn:
      if (r.wr == t) {
        f.pc = Pc::WriteSetNewVal;
      } else {
        f.pc = Pc::SvWriter;
        f.ret = Pc::WriteMakeState;
      }
      break;
    case Pc::WriteSetNewVal: {
      // Updates the shared triple of x in place.
      auto& cell = tm.var_state[x].new_val;
      const bool changed = cell != f.op.val;
      cell = f.op.val;
      rec.write({Cell::Kind::NewVal, static_cast<std::uint32_t>(x)}, changed);
      f.pc = Pc::WriteReturnOwn;
      break;
    }
    case Pc::WriteReturnOwn:
      return complete(c, t, StmtKind::Write, f.op.val);
    case Pc::WriteMakeState:
      r.st_new = VarState{t, r.v_stable, f.op.val};
      f.pc = Pc::WriteCas;
      break;
    case Pc::WriteCas: {
      auto& cur = tm.var_state[x];
      rec.read_state(x);
      r.b = cur == r.st;
      if (r.b) {
        const auto i = static_cast<std::uint32_t>(x);
        rec.write({Cell::Kind::Writer, i}, cur.writer != r.st_new.writer);
        rec.write({Cell::Kind::OldVal, i}, cur.old_val != r.st_new.old_val);
        rec.write({Cell::Kind::NewVal, i}, cur.new_val != r.st_new.new_val);
        cur = r.st_new;
      }
      f.pc = Pc::WriteIfCas;
      break;
    }
    case Pc::WriteIfCas:
      f.pc = r.b ? Pc::WriteReturnOk : Pc::WriteReturnCasFailed;
      break;
    case Pc::WriteReturnOk:
      return complete(c, t, StmtKind::Write, f.op.val);
    case Pc::WriteReturnCasFailed:
      return complete(c, t, StmtKind::Abort, 0);

    // commit_t()
    case Pc::CommitIfInvalid:
      f.pc = r.valid ? Pc::CommitCas : Pc::CommitReturnInvalid;
      break;
    case Pc::CommitReturnInvalid:
      return complete(c, t, StmtKind::Abort, 0);
    case Pc::CommitCas: {
      auto& cell = tm.status[t.value];
      rec.read(status_cell(t));
      r.b = cell == Status::Running;
      if (r.b) {
        cell = Status::Committed;
        rec.write(status_cell(t), true);
      }
      f.pc = Pc::CommitIfCas;
      break;
    }
    case Pc::CommitIfCas:
      f.pc = r.b ? Pc::CommitReturnCommitted : Pc::CommitReturnCasFailed;
      break;
    case Pc::CommitReturnCommitted:
      return complete(c, t, StmtKind::Commit, 0);
    case Pc::CommitReturnCasFailed:
      return complete(c, t, StmtKind::Abort, 0);

    // stableValue_t(st); st is the caller's register
    case Pc::SvWriter:
      r.sv_writer = r.st.writer;
      f.pc = Pc::SvStatus;
      break;
    case Pc::SvStatus:
      r.sv_s1 = tm.status[r.sv_writer.value];
      rec.read(status_cell(r.sv_writer));
      f.pc = Pc::SvIfRunning;
      break;
    case Pc::SvIfRunning:
      f.pc = (r.sv_writer != t && r.sv_s1 == Status::Running) ? Pc::SvCas : Pc::SvStatusAgain;
      break;
    case Pc::SvCas: {
      auto& cell = tm.status[r.sv_writer.value];
      rec.read(status_cell(r.sv_writer));
      if (cell == Status::Running) {
        cell = Status::Aborted;
        rec.write(status_cell(r.sv_writer), true);
      }
      f.pc = Pc::SvStatusAgain;
      break;
    }
    case Pc::SvStatusAgain:
      r.sv_s2 = tm.status[r.sv_writer.value];
      rec.read(status_cell(r.sv_writer));
      f.pc = Pc::SvIfAborted;
      break;
    case Pc::SvIfAborted:
      f.pc = r.sv_s2 == Status::Aborted ? Pc::SvOldVal : Pc::SvNewVal;
      break;
    case Pc::SvOldVal:
      r.sv_v = r.st.old_val;
      f.pc = Pc::SvReturn;
      break;
    case Pc::SvNewVal:
      r.sv_v = r.st.new_val;
      f.pc = Pc::SvReturn;
      break;
    case Pc::SvReturn:
      if (f.ret == Pc::ReadWriter) {
        r.v = r.sv_v;
      } else {
        r.v_stable = r.sv_v;
      }
      clear_stable_value_regs(r);
      f.pc = f.ret;
      f.ret = Pc::Idle;
      break;

    // validate_t()
    case Pc::ValLoop: {
      const auto& rs = tm.rd_set[t.value];
      rec.read({Cell::Kind::RdSet, t.value});
      if (r.val_cursor < rs.size()) {
        r.val_x = rs[r.val_cursor].var;
        r.val_v = rs[r.val_cursor].val;
        f.pc = Pc::ValLoadState;
      } else {
        f.pc = Pc::ValOwnStatus;
      }
      break;
    }
    case Pc::ValLoadState:
      r.val_st = tm.var_state[r.val_x];
      rec.read_state(r.val_x);
      f.pc = Pc::ValWriter;
      break;
    case Pc::ValWriter:
      r.val_writer = r.val_st.writer;
      f.pc = Pc::ValStatus;
      break;
    case Pc::ValStatus:
      r.val_s1 = tm.status[r.val_writer.value];
      rec.read(status_cell(r.val_writer));
      f.pc = Pc::ValIfCommitted;
      break;
    case Pc::ValIfCommitted:
      f.pc = r.val_s1 == Status::Committed ? Pc::ValNewVal : Pc::ValOldVal;
      break;
    case Pc::ValNewVal:
      r.val_v1 = r.val_st.new_val;
      f.pc = Pc::ValIfMismatch;
      break;
    case Pc::ValOldVal:
      r.val_v1 = r.val_st.old_val;
      f.pc = Pc::ValIfMismatch;
      break;
    case Pc::ValIfMismatch:
      if (r.val_v != r.val_v1) {
        f.pc = Pc::ValReturnFalse;
      } else {
        clear_validate_iteration(r);
        ++r.val_cursor;
        f.pc = Pc::ValLoop;
      }
      break;
    case Pc::ValReturnFalse:
      r.valid = false;
      clear_validate_regs(r);
      f.pc = f.ret;
      f.ret = Pc::Idle;
      break;
    case Pc::ValOwnStatus:
      r.val_s = tm.status[t.value];
      rec.read(status_cell(t));
      f.pc = Pc::ValReturn;
      break;
    case Pc::ValReturn:
      r.valid = r.val_s == Status::Running;
      clear_validate_regs(r);
      f.pc = f.ret;
      f.ret = Pc::Idle;
      break;
  }
  return std::nullopt;
}

Event run_to_completion(Config& c, TxId t, const Recorder& rec) {
  for (;;) {
    if (auto e = exec_line(c, t, rec)) return *e;
  }
}

}  // namespace

void Config::encode(std::string& out) const {
  out.clear();
  put(out, tm.status.size());
  for (auto s : tm.status) out.push_back(static_cast<char>(s));
  for (const auto& rs : tm.rd_set) {
    put(out, rs.size());
    for (const auto& e : rs) {
      put(out, e.var);
      put_value(out, e.val);
    }
  }
  for (const auto& st : tm.var_state) put_state(out, st);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const auto& f = frames[t];
    out.push_back(static_cast<char>(f.pc));
    out.push_back(static_cast<char>(f.ret));
    out.push_back(static_cast<char>(f.op.kind));
    put(out, f.op.var);
    put_value(out, f.op.val);
    if (!f.idle()) put_regs(out, f.regs);
    put(out, cursor[t]);
    out.push_back(static_cast<char>(finished[t]));
  }
  put(out, emitted.size());
  for (const auto& e : emitted) {
    out.push_back(static_cast<char>(e.kind));
    put(out, e.tx.value);
    put(out, e.var);
    put_value(out, e.val);
  }
}

Config init_config(std::size_t tx_count, std::size_t var_count) {
  if (tx_count == 0 || var_count == 0) throw Error("init_config: need at least one transaction and one variable");
  Config c;
  c.tm.status.assign(tx_count + 1, Status::Running);
  c.tm.status[0] = Status::Committed;  // t0
  c.tm.rd_set.assign(tx_count + 1, {});
  c.tm.var_state.assign(var_count, VarState{kInitialTx, 0, 0});
  c.frames.assign(tx_count + 1, Frame{});
  c.cursor.assign(tx_count + 1, 0);
  c.finished.assign(tx_count + 1, Outcome::Running);
  return c;
}

Config init_config(const Workload& w) { return init_config(w.tx_count(), w.vars.size()); }

History to_history(const Workload& w, const std::vector<Event>& events) {
  std::vector<Statement> stmts;
  stmts.reserve(events.size());
  for (const auto& e : events) {
    switch (e.kind) {
      case StmtKind::Read: stmts.push_back(Statement::read(e.tx, w.vars.at(e.var), e.val)); break;
      case StmtKind::Write: stmts.push_back(Statement::write(e.tx, w.vars.at(e.var), e.val)); break;
      case StmtKind::Commit: stmts.push_back(Statement::commit(e.tx)); break;
      case StmtKind::Abort: stmts.push_back(Statement::abort(e.tx)); break;
    }
  }
  return History(std::move(stmts));
}

bool is_enabled(const Config& c, const Workload& w, TxId t) {
  if (t.value == 0 || t.value > c.tx_count()) return false;
  if (c.finished[t.value] != Outcome::Running) return false;
  return !c.frames[t.value].idle() || c.cursor[t.value] < w.program(t).size();
}

std::string step_label(const Config& c, const Workload& w, TxId t, Mode mode) {
  const Frame& f = c.frames.at(t.value);
  if (mode == Mode::Coarse) return describe(w, w.program(t).at(c.cursor[t.value]));
  if (!f.idle()) return std::string(pc_label(f.pc));
  Frame next;
  begin_operation(next, w.program(t).at(c.cursor[t.value]));
  return std::string(pc_label(next.pc));
}

std::vector<EnabledStep> enabled_steps(const Config& c, const Workload& w, Mode mode) {
  std::vector<EnabledStep> out;
  for (std::uint32_t i = 1; i <= c.tx_count(); ++i) {
    const TxId t{i};
    if (is_enabled(c, w, t)) out.push_back({t, step_label(c, w, t, mode)});
  }
  return out;
}

void step_in_place(Config& c, const Workload& w, TxId t, Mode mode, std::vector<MetaAccess>* log,
                   std::size_t step_index) {
  if (!is_enabled(c, w, t)) throw Error("step: transaction " + std::to_string(t.value) + " is not enabled");
  if (mode == Mode::Coarse && !c.frames[t.value].idle()) {
    throw Error("step: coarse step on a transaction in the middle of an operation");
  }
  const Recorder rec{log, step_index, t};
  Frame& f = c.frames[t.value];
  if (f.idle()) begin_operation(f, w.program(t)[c.cursor[t.value]]);
  if (mode == Mode::Fine) {
    exec_line(c, t, rec);
  } else {
    run_to_completion(c, t, rec);
  }
}

Config step(const Config& c, const Workload& w, TxId t, Mode mode) {
  Config out = c;
  step_in_place(out, w, t, mode);
  return out;
}

std::pair<Config, OpResult> run_operation(const Config& c, TxId t, const Command& cmd) {
  if (t.value == 0 || t.value > c.tx_count()) throw Error("run_operation: unknown transaction");
  if (!c.frames[t.value].idle()) throw Error("run_operation: transaction is mid-operation");
  if (c.finished[t.value] != Outcome::Running) throw Error("run_operation: transaction has finished");
  if (cmd.kind != Command::Kind::TryCommit && cmd.var >= c.tm.var_state.size()) {
    throw Error("run_operation: unknown variable");
  }
  Config out = c;
  begin_operation(out.frames[t.value], cmd);
  const Event e = run_to_completion(out, t, Recorder{nullptr, 0, t});
  OpResult res;
  switch (e.kind) {
    case StmtKind::Read: res = {OpResult::Kind::Value, e.val}; break;
    case StmtKind::Write: res = {OpResult::Kind::Ok, 0}; break;
    case StmtKind::Commit: res = {OpResult::Kind::Committed, 0}; break;
    case StmtKind::Abort: res = {OpResult::Kind::Aborted, 0}; break;
  }
  return {std::move(out), res};
}

}  // namespace stmcheck
