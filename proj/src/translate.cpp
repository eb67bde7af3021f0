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


#include "patchsmith/translate.hpp"

#include <algorithm>

#include "patchsmith/dataflow.hpp"

namespace patchsmith {

const ScopeEntry* ScopeMap::find(const std::string& func) const {
  for (const auto& e : entries)
    if (e.func == func) return &e;
  return nullptr;
}

std::vector<std::string> ScopeMap::scopes() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.func);
  return out;
}

namespace {

bool is_global(const Program& p, const Function& f, const std::string& var) {
  return !f.is_param(var) && !f.is_local(var) && p.find_global(var);
}

// Address of a local: meaningless outside its frame.
bool takes_local_address(const Function& f, const SymRef& e) {
  if (e->kind == SymKind::AddrOf && e->kids[0]->kind == SymKind::Var && f.is_local(e->kids[0]->name)) return true;
  if (e->kind == SymKind::Var && is_array(e->type) && f.is_local(e->name)) return true;
  for (const auto& k : e->kids)
    if (takes_local_address(f, k)) return true;
  return false;
}

SymRef nonlocal(const Program& p, const Function& f, int uid, const SymRef& e, const ExprCache& ex, int depth);

SymRef def_for_var(const Program& p, const Function& f, int uid, const std::string& var, const ExprCache& ex,
                   int depth) {
  if (depth > 64) return nullptr;
  auto defs = ReachingDefs(f).before(uid, var);
  if (defs.size() != 1) return nullptr;
  int d = *defs.begin();
  if (d == kEntryDef) {
    if (f.is_param(var)) return sym_var(var, f.var_type(var), f.name);
    if (is_global(p, f, var)) return sym_var(var, p.find_global(var)->type, "");
    return nullptr;
  }
  const Instruction* in = p.inst(d);
  if (!in || in->op != Opcode::Store) return nullptr;
  SymRef rhs = ex.inst(d);
  if (!rhs || contains_call(rhs)) return nullptr;
  SymRef out = nonlocal(p, f, d, rhs, ex, depth + 1);
  if (!out) return nullptr;
  // The stored value converts to the variable's type.
  TypeRef vt = f.var_type(var);
  if (!vt && is_global(p, f, var)) vt = p.find_global(var)->type;
  if (vt && out->type && !same_type(vt, out->type) && is_scalar(vt)) out = sym_cast(vt, out);
  return out;
}

SymRef nonlocal(const Program& p, const Function& f, int uid, const SymRef& e, const ExprCache& ex, int depth) {
  if (!e || contains_call(e) || takes_local_address(f, e)) return nullptr;
  std::map<std::string, SymRef> repl;
  for (const auto& v : sym_vars(e)) {
    if (is_nonlocal_var(p, f, uid, v)) continue;
    SymRef d = def_for_var(p, f, uid, v, ex, depth);
    if (!d) return nullptr;
    repl[v] = d;
  }
  return repl.empty() ? e : simplify(substitute(e, repl));
}

}  // namespace

bool is_nonlocal_var(const Program& p, const Function& f, int uid, const std::string& var) {
  if (!f.is_param(var) && !is_global(p, f, var)) return false;
  return ReachingDefs(f).before(uid, var) == std::set<int>{kEntryDef};
}

SymRef make_nonlocal_expr(const Program& p, const Function& f, int uid, const SymRef& e, const ExprCache& ex) {
  return nonlocal(p, f, uid, e, ex, 0);
}

SymRef find_nonlocal_def_for_var(const Program& p, const Function& f, int uid, const std::string& var,
                                 const ExprCache& ex) {
  return def_for_var(p, f, uid, var, ex, 0);
}

SymRef substitute_parms_with_args(const Program& p, const Instruction& call, const SymRef& e, const ExprCache& ex) {
  const Function* callee = p.find(call.callee);
  if (!callee || callee->params.size() != call.args.size())
    throw Error("argument count mismatch in call to " + call.callee);
  std::map<std::string, SymRef> repl;
  for (size_t i = 0; i < call.args.size(); ++i) {
    SymRef a = ex.operand(call.uid, call.args[i]);
    if (!a) throw Error("unbound argument in call to " + call.callee);
    repl[callee->params[i].name] = a;
  }
  return simplify(substitute(e, repl));
}

ScopeMap translate_se_to_scopes(const Program& p, const std::vector<int>& stack, const SymRef& e, int uid,
                                const ExprCache& ex) {
  ScopeMap m;
  InstLoc loc = p.locate(uid);
  if (!loc.func || !e) return m;
  m.entries.push_back({loc.func->name, uid, e});
  SymRef cur = make_nonlocal_expr(p, *loc.func, uid, e, ex);
  if (!cur) return m;
  for (int c : stack) {
    const Instruction* call = p.inst(c);
    InstLoc cl = p.locate(c);
    if (!call || !cl.func) break;
    cur = substitute_parms_with_args(p, *call, cur, ex);
    m.entries.push_back({cl.func->name, c, cur});
    cur = make_nonlocal_expr(p, *cl.func, c, cur, ex);
    if (!cur) break;
  }
  return m;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return "{" + s + "}";
}

}  // namespace

Convergence converge(const Program& p, const ScopeMap& lo, const ScopeMap& hi, const ScopeMap& size,
                     const FaultRecord& fault, const AllocationRecord& alloc) {
  // Frames match when their functions agree and the calls above them are the
  // same.
  auto suffix = [](const std::vector<int>& v, size_t from) {
    return from >= v.size() ? std::vector<int>{} : std::vector<int>(v.begin() + static_cast<long>(from), v.end());
  };
  size_t n_access = std::min(lo.entries.size(), hi.entries.size());
  for (size_t k = 0; k < n_access; ++k) {
    const std::string& g = lo.entries[k].func;
    if (hi.entries[k].func != g) break;
    auto above = suffix(fault.call_stack, k);
    for (size_t j = 0; j < size.entries.size(); ++j) {
      if (size.entries[j].func != g || suffix(alloc.call_stack, j + 1) != above) continue;
      Convergence c;
      c.func = g;
      c.access_frame = static_cast<int>(k);
      c.alloc_frame = static_cast<int>(j);
      c.access_lo = lo.entries[k].expr;
      c.access_hi = hi.entries[k].expr;
      c.alloc_size = size.entries[j].expr;
      c.access_uid = lo.entries[k].at_uid;
      c.alloc_uid = alloc.call_stack.empty() ? size.entries[j].at_uid : alloc.call_stack[j];
      c.placement_stmt = p.inst(c.alloc_uid)->stmt;
      return c;
    }
  }
  throw Abort("converge", "no convergence: access range translates to " + join(lo.scopes()) +
                              ", allocation size to " + join(size.scopes()));
}

std::string placement_conflict(const Program& p, const ExecResult& r, const std::string& func, int stmt,
                               const std::vector<int>& uids, const std::set<std::string>& vars, bool memory) {
  const auto& t = r.trace;
  long end = -1;
  for (long i = static_cast<long>(t.size()) - 1; i >= 0 && end < 0; --i)
    if (std::find(uids.begin(), uids.end(), t[static_cast<size_t>(i)].uid) != uids.end()) end = i;
  if (end < 0) return "access point not on the trace";
  int depth = t[static_cast<size_t>(end)].depth;
  long begin = -1;
  bool seen = false;
  for (long i = end; i >= 0; --i) {
    const auto& e = t[static_cast<size_t>(i)];
    if (e.depth < depth) break;
    if (e.depth != depth) continue;
    const Instruction* in = p.inst(e.uid);
    if (in->stmt == stmt) {
      seen = true;
      begin = i;
    } else if (seen) {
      break;
    }
  }
  if (!seen) return "placement statement does not run before the access in " + func;
  const Function* f = p.find(func);
  for (long i = begin; i <= end; ++i) {
    const auto& e = t[static_cast<size_t>(i)];
    const Instruction* in = p.inst(e.uid);
    if (in->op == Opcode::Store && !in->var.empty() && vars.count(in->var)) {
      bool global = p.find_global(in->var) && !p.locate(e.uid).func->is_local(in->var) &&
                    !p.locate(e.uid).func->is_param(in->var);
      if (global || (e.depth == depth && f && (f->is_local(in->var) || f->is_param(in->var))))
        return in->var + " is assigned at line " + std::to_string(in->span.line) + " after the placement point";
    }
    if (memory && ((in->op == Opcode::Store && in->var.empty()) || (in->op == Opcode::Call && in->callee == "memcpy")))
      return "memory is written at line " + std::to_string(in->span.line) + " after the placement point";
  }
  return "";
}

}  // namespace patchsmith
