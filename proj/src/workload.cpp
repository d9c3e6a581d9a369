#include "stmcheck/workload.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace stmcheck {

std::size_t Workload::var_index(const VarId& x) const {
  auto it = std::find(vars.begin(), vars.end(), x);
  if (it == vars.end()) throw Error("undeclared variable '" + x + "'");
  return static_cast<std::size_t>(it - vars.begin());
}

void Workload::validate() const {
  if (vars.empty()) throw Error("workload declares no variables");
  if (transactions.empty()) throw Error("workload declares no transactions");
  if (transactions.size() > 250) throw Error("workload has too many transactions");
  if (!values.contains(0)) throw Error("value domain must contain 0");
  std::set<VarId> seen;
  for (const auto& x : vars) {
    if (x.empty() || !std::isalpha(static_cast<unsigned char>(x.front())) ||
        !std::all_of(x.begin(), x.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
      throw Error("invalid variable name '" + x + "'");
    }
    if (!seen.insert(x).second) throw Error("duplicate variable '" + x + "'");
  }
  for (std::size_t t = 0; t < transactions.size(); ++t) {
    const auto& prog = transactions[t];
    const std::string who = "transaction " + std::to_string(t + 1);
    for (std::size_t i = 0; i < prog.size(); ++i) {
      const auto& c = prog[i];
      if (c.kind == Command::Kind::TryCommit) {
        if (i + 1 != prog.size()) throw Error(who + ": commit must be the last command");
        continue;
      }
      if (c.var >= vars.size()) throw Error(who + ": command references undeclared variable");
      if (c.kind == Command::Kind::Write && !values.contains(c.val)) {
        throw Error(who + ": value " + std::to_string(c.val) + " outside the value domain");
      }
    }
  }
}

Workload Workload::restricted_to(const std::set<VarId>& keep) const {
  Workload out;
  out.values = values;
  std::vector<std::optional<std::size_t>> remap(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (keep.contains(vars[i])) {
      remap[i] = out.vars.size();
      out.vars.push_back(vars[i]);
    }
  }
  for (const auto& prog : transactions) {
    auto& kept = out.transactions.emplace_back();
    for (const auto& c : prog) {
      if (c.kind == Command::Kind::TryCommit) {
        kept.push_back(c);
      } else if (remap[c.var]) {
        kept.push_back({c.kind, *remap[c.var], c.val});
      }
    }
  }
  return out;
}

std::string describe(const Workload& w, const Command& c) {
  switch (c.kind) {
    case Command::Kind::Read: return "read(" + w.vars.at(c.var) + ")";
    case Command::Kind::Write: return "write(" + w.vars.at(c.var) + "," + std::to_string(c.val) + ")";
    case Command::Kind::TryCommit: return "commit";
  }
  return "?";
}

Workload workload_from_json(const nlohmann::json& j) {
  try {
    Workload w;
    w.vars = j.at("vars").get<std::vector<VarId>>();
    w.values.clear();
    if (j.contains("values")) {
      for (Value v : j.at("values").get<std::vector<Value>>()) w.values.insert(v);
    } else {
      w.values.insert(0);
    }

    const auto& txs = j.at("transactions");
    std::vector<std::optional<std::vector<Command>>> slots(txs.size());
    for (const auto& tj : txs) {
      const auto id = tj.at("id").get<std::int64_t>();
      if (id < 1 || static_cast<std::size_t>(id) > txs.size()) {
        throw Error("transaction ids must be 1..n, got " + std::to_string(id));
      }
      auto& slot = slots[static_cast<std::size_t>(id - 1)];
      if (slot) throw Error("duplicate transaction id " + std::to_string(id));
      slot.emplace();
      for (const auto& op : tj.at("ops")) {
        if (op.is_string()) {
          if (op.get<std::string>() != "commit") throw Error("unknown op '" + op.get<std::string>() + "'");
          slot->push_back(Command::try_commit());
        } else if (op.contains("read")) {
          slot->push_back(Command::read(w.var_index(op.at("read").get<VarId>())));
        } else if (op.contains("write")) {
          const auto& args = op.at("write");
          if (!args.is_array() || args.size() != 2) throw Error("write expects [var, value]");
          slot->push_back(Command::write(w.var_index(args[0].get<VarId>()), args[1].get<Value>()));
        } else {
          throw Error("unknown op " + op.dump());
        }
      }
    }
    for (auto& slot : slots) w.transactions.push_back(std::move(*slot));
    w.validate();
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed workload JSON: ") + e.what());
  }
}

nlohmann::json workload_to_json(const Workload& w) {
  nlohmann::json txs = nlohmann::json::array();
  for (std::size_t t = 0; t < w.transactions.size(); ++t) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& c : w.transactions[t]) {
      switch (c.kind) {
        case Command::Kind::Read: ops.push_back({{"read", w.vars[c.var]}}); break;
        case Command::Kind::Write: ops.push_back({{"write", {w.vars[c.var], c.val}}}); break;
        case Command::Kind::TryCommit: ops.push_back("commit"); break;
      }
    }
    txs.push_back({{"id", t + 1}, {"ops", std::move(ops)}});
  }
  return {{"vars", w.vars}, {"values", std::vector<Value>(w.values.begin(), w.values.end())}, {"transactions", txs}};
}

}  // namespace stmcheck
