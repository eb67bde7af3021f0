// Copyright 2026 The Patchsmith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patchsmith/ir.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "patchsmith/frontend.hpp"

namespace patchsmith {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Load: return "Load";
    case Opcode::Store: return "Store";
    case Opcode::GetElementField: return "GetElementField";
    case Opcode::GetElementIndex: return "GetElementIndex";
    case Opcode::BinOp: return "BinOp";
    case Opcode::CmpOp: return "CmpOp";
    case Opcode::Allocate: return "Allocate";
    case Opcode::Branch: return "Branch";
    case Opcode::CondBranch: return "CondBranch";
    case Opcode::Call: return "Call";
    case Opcode::Ret: return "Ret";
  }
  return "?";
}

const char* bin_symbol(BinKind k) {
  switch (k) {
    case BinKind::Add: return "+";
    case BinKind::Sub: return "-";
    case BinKind::Mul: return "*";
    case BinKind::Div: return "/";
    case BinKind::Rem: return "%";
    case BinKind::Shl: return "<<";
    case BinKind::Shr: return ">>";
    case BinKind::And: return "&";
    case BinKind::Or: return "|";
    case BinKind::Xor: return "^";
    case BinKind::Cast: return "cast";
  }
  return "?";
}

const char* cmp_symbol(CmpKind k) {
  switch (k) {
    case CmpKind::Eq: return "==";
    case CmpKind::Ne: return "!=";
    case CmpKind::Lt: return "<";
    case CmpKind::Le: return "<=";
    case CmpKind::Gt: return ">";
    case CmpKind::Ge: return ">=";
  }
  return "?";
}

int Function::block_index(const std::string& label) const {
  auto it = label_to_block.find(label);
  return it == label_to_block.end() ? -1 : it->second;
}

const BasicBlock& Function::block(const std::string& label) const {
  int i = block_index(label);
  if (i < 0) throw Error("no block " + label + " in " + name);
  return blocks[static_cast<size_t>(i)];
}

std::vector<int> Function::successors(int b) const {
  std::vector<int> out;
  const auto& insts = blocks[static_cast<size_t>(b)].insts;
  if (insts.empty()) return out;
  const Instruction& t = insts.back();
  if (t.op == Opcode::Branch) {
    out.push_back(block_index(t.target));
  } else if (t.op == Opcode::CondBranch) {
    out.push_back(block_index(t.target));
    int f = block_index(t.target2);
    if (f != out.back()) out.push_back(f);
  }
  out.erase(std::remove(out.begin(), out.end(), -1), out.end());
  return out;
}

std::vector<std::vector<int>> Function::predecessors() const {
  std::vector<std::vector<int>> preds(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b)
    for (int s : successors(static_cast<int>(b))) preds[static_cast<size_t>(s)].push_back(static_cast<int>(b));
  return preds;
}

bool Function::is_param(const std::string& v) const {
  for (const auto& p : params)
    if (p.name == v) return true;
  return false;
}

TypeRef Function::var_type(const std::string& v) const {
  for (const auto& p : params)
    if (p.name == v) return p.type;
  auto it = locals.find(v);
  if (it != locals.end()) return it->second;
  return nullptr;
}

const Instruction* Function::def_of(int value) const {
  if (value < 0 || static_cast<size_t>(value) >= value_defs.size()) return nullptr;
  return value_defs[static_cast<size_t>(value)];
}

const Function* Program::find(const std::string& name) const {
  auto it = functions.find(name);
  return it == functions.end() ? nullptr : &it->second;
}

const GlobalVar* Program::find_global(const std::string& name) const {
  for (const auto& g : globals)
    if (g.name == name) return &g;
  return nullptr;
}

const Instruction* Program::inst(int uid) const {
  InstLoc l = locate(uid);
  if (!l.func) return nullptr;
  return &l.func->blocks[static_cast<size_t>(l.block)].insts[static_cast<size_t>(l.index)];
}

InstLoc Program::locate(int uid) const {
  if (uid < 0 || static_cast<size_t>(uid) >= locations.size()) return {};
  return locations[static_cast<size_t>(uid)];
}

const Stmt* Program::stmt(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= tu->stmts.size()) return nullptr;
  return tu->stmts[static_cast<size_t>(id)];
}

void Program::finalize() {
  locations.clear();
  for (auto& [name, f] : functions) {
    f.label_to_block.clear();
    f.value_defs.assign(static_cast<size_t>(f.num_values), nullptr);
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      f.label_to_block[f.blocks[b].label] = static_cast<int>(b);
      for (size_t i = 0; i < f.blocks[b].insts.size(); ++i) {
        const Instruction& in = f.blocks[b].insts[i];
        if (in.uid >= 0) {
          if (static_cast<size_t>(in.uid) >= locations.size()) locations.resize(static_cast<size_t>(in.uid) + 1);
          locations[static_cast<size_t>(in.uid)] = {&f, static_cast<int>(b), static_cast<int>(i)};
        }
        if (in.result >= 0 && static_cast<size_t>(in.result) < f.value_defs.size())
          f.value_defs[static_cast<size_t>(in.result)] = &in;
      }
    }
  }
}

bool is_intrinsic(const std::string& name) { return extern_signature(name) != nullptr; }

ValidationReport validate_program(const Program& p) {
  ValidationReport r;
  auto add = [&](std::string v) { r.violations.push_back(std::move(v)); };
  if (!p.find(p.entry)) add("missing entry function " + p.entry);
  for (const auto& name : p.order) {
    const Function& f = p.functions.at(name);
    for (const auto& param : f.params)
      if (f.locals.count(param.name)) add(name + ": parameter " + param.name + " shadowed by a local");
    std::set<int> defined;
    std::set<std::string> labels;
    for (const auto& b : f.blocks)
      if (!labels.insert(b.label).second) add(name + ": duplicate block label " + b.label);
    for (const auto& b : f.blocks) {
      if (b.insts.empty() || !b.insts.back().is_terminator()) {
        add(name + ": block " + b.label + " lacks a terminator");
      }
      for (size_t i = 0; i < b.insts.size(); ++i) {
        const Instruction& in = b.insts[i];
        if (in.is_terminator() && i + 1 != b.insts.size())
          add(name + ": terminator in the middle of block " + b.label);
        if (in.result >= 0 && !defined.insert(in.result).second)
          add(name + ": SSA value %" + std::to_string(in.result) + " defined twice");
        if (in.stmt < 0) add(name + ": instruction " + std::to_string(in.uid) + " has no statement");
        switch (in.op) {
          case Opcode::Branch:
            if (in.target.empty() || !labels.count(in.target))
              add(name + ": branch to unknown block " + in.target);
            break;
          case Opcode::CondBranch:
            if (in.target.empty() || in.target2.empty())
              add(name + ": conditional branch needs two labels");
            else if (!labels.count(in.target) || !labels.count(in.target2))
              add(name + ": branch to unknown block");
            break;
          case Opcode::GetElementField:
            if (!is_pointer(in.a.type) || !is_struct(in.a.type->elem))
              add(name + ": GetElementField base is not a struct address");
            break;
          case Opcode::GetElementIndex:
            if (!is_pointer(in.a.type) && !is_array(in.a.type))
              add(name + ": GetElementIndex base is not a pointer or array");
            break;
          case Opcode::Call:
            if (!p.find(in.callee) && !is_intrinsic(in.callee))
              add("unresolved callee " + in.callee);
            break;
          default:
            break;
        }
      }
    }
  }
  return r;
}

std::vector<const CallEdge*> CallGraph::callers_of(const std::string& f) const {
  std::vector<const CallEdge*> out;
  for (const auto& e : edges)
    if (e.callee == f) out.push_back(&e);
  return out;
}

std::vector<const CallEdge*> CallGraph::callees_of(const std::string& f) const {
  std::vector<const CallEdge*> out;
  for (const auto& e : edges)
    if (e.caller == f) out.push_back(&e);
  return out;
}

CallGraph build_call_graph(const Program& p) {
  CallGraph g;
  g.nodes = p.order;
  std::set<std::string> externs;
  for (const auto& name : p.order) {
    const Function& f = p.functions.at(name);
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        if (in.op == Opcode::Call) {
          g.edges.push_back({name, in.uid, in.callee});
          if (!p.find(in.callee)) externs.insert(in.callee);
        }
  }
  for (const auto& e : externs) g.nodes.push_back(e);
  return g;
}

namespace {

std::vector<int> reverse_postorder(const Function& f) {
  std::vector<int> order;
  std::vector<char> seen(f.blocks.size(), 0);
  std::function<void(int)> dfs = [&](int b) {
    seen[static_cast<size_t>(b)] = 1;
    for (int s : f.successors(b))
      if (!seen[static_cast<size_t>(s)]) dfs(s);
    order.push_back(b);
  };
  if (!f.blocks.empty()) dfs(0);
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

std::vector<int> dominators(const Function& f) {
  const size_t n = f.blocks.size();
  std::vector<int> idom(n, -1);
  if (n == 0) return idom;
  auto rpo = reverse_postorder(f);
  std::vector<int> rank(n, -1);
  for (size_t i = 0; i < rpo.size(); ++i) rank[static_cast<size_t>(rpo[i])] = static_cast<int>(i);
  auto preds = f.predecessors();
  idom[0] = 0;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rank[static_cast<size_t>(a)] > rank[static_cast<size_t>(b)]) a = idom[static_cast<size_t>(a)];
      while (rank[static_cast<size_t>(b)] > rank[static_cast<size_t>(a)]) b = idom[static_cast<size_t>(b)];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b : rpo) {
      if (b == 0) continue;
      int nd = -1;
      for (int p : preds[static_cast<size_t>(b)]) {
        if (idom[static_cast<size_t>(p)] < 0) continue;
        nd = nd < 0 ? p : intersect(p, nd);
      }
      if (nd != idom[static_cast<size_t>(b)]) {
        idom[static_cast<size_t>(b)] = nd;
        changed = true;
      }
    }
  }
  return idom;
}

bool dominates(const std::vector<int>& idom, int a, int b) {
  if (b < 0 || idom[static_cast<size_t>(b)] < 0) return false;
  while (true) {
    if (a == b) return true;
    int up = idom[static_cast<size_t>(b)];
    if (up == b) return false;
    b = up;
  }
}

std::vector<LoopInfo> find_loops(const Function& f) {
  auto idom = dominators(f);
  auto preds = f.predecessors();
  const int n = static_cast<int>(f.blocks.size());

  // Retreating edges from a DFS; back edges are those whose target dominates
  // the source. Retreating edges that are not back edges mark irreducible
  // regions.
  std::vector<int> state(static_cast<size_t>(n), 0);
  std::vector<std::pair<int, int>> retreating;
  std::function<void(int)> dfs = [&](int b) {
    state[static_cast<size_t>(b)] = 1;
    for (int s : f.successors(b)) {
      if (state[static_cast<size_t>(s)] == 1) retreating.emplace_back(b, s);
      else if (state[static_cast<size_t>(s)] == 0) dfs(s);
    }
    state[static_cast<size_t>(b)] = 2;
  };
  if (n > 0) dfs(0);

  std::map<int, LoopInfo> by_header;
  std::map<int, int> backedge_count;
  std::set<int> irreducible_headers;
  for (auto [src, hdr] : retreating) {
    bool natural = dominates(idom, hdr, src);
    LoopInfo& l = by_header[hdr];
    l.header = hdr;
    l.body.insert(hdr);
    if (!natural) irreducible_headers.insert(hdr);
    ++backedge_count[hdr];
    l.backedge_src = src;
    std::vector<int> work = {src};
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      if (l.body.count(b)) continue;
      if (idom[static_cast<size_t>(b)] < 0) continue;
      l.body.insert(b);
      for (int p : preds[static_cast<size_t>(b)]) work.push_back(p);
    }
  }

  std::vector<LoopInfo> loops;
  for (auto& [hdr, l] : by_header) {
    for (int b : l.body)
      for (int s : f.successors(b))
        if (!l.body.count(s)) {
          l.exits.insert(s);
          l.exiting.insert(b);
        }
    std::vector<int> outside;
    for (int p : preds[static_cast<size_t>(hdr)])
      if (!l.body.count(p)) outside.push_back(p);
    if (outside.size() == 1 && f.successors(outside[0]).size() == 1) l.preheader = outside[0];
    if (backedge_count[hdr] != 1) l.backedge_src = -1;
    bool single_exit = l.exiting.size() == 1 &&
                       f.blocks[static_cast<size_t>(*l.exiting.begin())].insts.back().op == Opcode::CondBranch;
    l.normalized = !irreducible_headers.count(hdr) && l.preheader >= 0 && l.backedge_src >= 0 && single_exit;
    loops.push_back(l);
  }
  std::stable_sort(loops.begin(), loops.end(), [](const LoopInfo& a, const LoopInfo& b) {
    if (a.body.size() != b.body.size()) return a.body.size() < b.body.size();
    return a.header < b.header;
  });
  for (size_t i = 0; i < loops.size(); ++i) {
    for (size_t j = i + 1; j < loops.size(); ++j) {
      const auto& outer = loops[j].body;
      if (outer.size() > loops[i].body.size() &&
          std::includes(outer.begin(), outer.end(), loops[i].body.begin(), loops[i].body.end())) {
        loops[i].parent = static_cast<int>(j);
        break;
      }
    }
  }
  return loops;
}

namespace {

std::string fmt_operand(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::None: return "_";
    case Operand::Kind::Value: return "%" + std::to_string(o.id);
    case Operand::Kind::Const: return std::to_string(o.imm);
    case Operand::Kind::Str: {
      std::string s = "\"";
      for (char c : o.str) {
        if (c == '\n') s += "\\n";
        else if (c == '"') s += "\\\"";
        else if (static_cast<unsigned char>(c) < 32) s += "\\x" + std::to_string(static_cast<int>(c));
        else s += c;
      }
      return s + "\"";
    }
  }
  return "?";
}

}  // namespace

std::string format_instruction(const Instruction& in) {
  std::ostringstream o;
  if (in.result >= 0) o << "%" << in.result << " = ";
  o << opcode_name(in.op);
  switch (in.op) {
    case Opcode::Load:
      if (!in.var.empty()) o << " " << in.var;
      else o << " *" << fmt_operand(in.a);
      break;
    case Opcode::Store:
      if (!in.var.empty()) o << " " << in.var;
      else o << " *" << fmt_operand(in.a);
      o << ", " << fmt_operand(in.b);
      break;
    case Opcode::GetElementField:
      o << " " << fmt_operand(in.a) << ", ." << in.field << " (+" << in.offset << ")";
      break;
    case Opcode::GetElementIndex:
      o << " " << fmt_operand(in.a) << ", [" << fmt_operand(in.b) << "] x" << in.scale;
      break;
    case Opcode::BinOp:
      if (in.bin == BinKind::Cast) o << " cast " << fmt_operand(in.a) << " to " << type_name(in.type);
      else o << " " << bin_symbol(in.bin) << " " << fmt_operand(in.a) << ", " << fmt_operand(in.b);
      break;
    case Opcode::CmpOp:
      o << " " << cmp_symbol(in.cmp) << " " << fmt_operand(in.a) << ", " << fmt_operand(in.b);
      break;
    case Opcode::Allocate:
      o << " " << in.var;
      break;
    case Opcode::Branch:
      o << " " << in.target;
      break;
    case Opcode::CondBranch:
      o << " " << fmt_operand(in.a) << ", " << in.target << ", " << in.target2;
      break;
    case Opcode::Call: {
      o << " " << in.callee << "(";
      for (size_t i = 0; i < in.args.size(); ++i) o << (i ? ", " : "") << fmt_operand(in.args[i]);
      o << ")";
      break;
    }
    case Opcode::Ret:
      if (in.a.kind != Operand::Kind::None) o << " " << fmt_operand(in.a);
      break;
  }
  if (in.type && !is_void(in.type) && in.op != Opcode::BinOp) o << " : " << type_name(in.type);
  return o.str();
}

std::string dump_ir(const Program& p) {
  std::ostringstream o;
  for (const auto& g : p.globals) o << "global " << type_name(g.type) << " " << g.name << "\n";
  for (const auto& name : p.order) {
    const Function& f = p.functions.at(name);
    o << "function " << name << "(";
    for (size_t i = 0; i < f.params.size(); ++i)
      o << (i ? ", " : "") << type_name(f.params[i].type) << " " << f.params[i].name;
    o << ") -> " << type_name(f.ret) << "\n";
    for (const auto& b : f.blocks) {
      o << b.label << ":\n";
      for (const auto& in : b.insts) o << "  " << format_instruction(in) << "\n";
    }
  }
  return o.str();
}

std::set<std::string> address_vars(const Function& f, const Instruction& access) {
  std::set<std::string> vars;
  std::vector<const Operand*> work;
  std::set<int> seen;
  if (access.op == Opcode::Call) {
    for (const auto& a : access.args) work.push_back(&a);
  } else {
    work.push_back(&access.a);
  }
  while (!work.empty()) {
    const Operand* o = work.back();
    work.pop_back();
    if (!o->is_value() || !seen.insert(o->id).second) continue;
    const Instruction* d = f.def_of(o->id);
    if (!d) continue;
    if (d->op == Opcode::Load && !d->var.empty()) {
      vars.insert(d->var);
      continue;
    }
    if (d->op == Opcode::Allocate || d->op == Opcode::Call) continue;
    work.push_back(&d->a);
    work.push_back(&d->b);
  }
  return vars;
}

bool address_updated_in_loop(const Function& f, const Instruction& access) {
  int blk = -1;
  for (size_t b = 0; b < f.blocks.size() && blk < 0; ++b)
    for (const auto& in : f.blocks[b].insts)
      if (&in == &access || in.uid == access.uid) blk = static_cast<int>(b);
  if (blk < 0) return false;
  auto vars = address_vars(f, access);
  for (const auto& l : find_loops(f)) {
    if (!l.contains(blk)) continue;
    for (int b : l.body)
      for (const auto& in : f.blocks[static_cast<size_t>(b)].insts)
        if (in.op == Opcode::Store && !in.var.empty() && vars.count(in.var)) return true;
  }
  return false;
}

}  // namespace patchsmith
