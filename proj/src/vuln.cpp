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


#include "patchsmith/vuln.hpp"

#include <functional>
#include <set>

#include "patchsmith/dataflow.hpp"

namespace patchsmith {

const char* vuln_class_name(VulnClass c) {
  switch (c) {
    case VulnClass::BufferOverflow: return "buffer_overflow";
    case VulnClass::BadCast: return "bad_cast";
    case VulnClass::IntegerOverflow: return "integer_overflow";
  }
  return "?";
}

const char* alias_verdict_name(AliasVerdict v) {
  switch (v) {
    case AliasVerdict::MustAlias: return "must_alias";
    case AliasVerdict::MayAlias: return "may_alias";
    case AliasVerdict::MustNotAlias: return "must_not_alias";
  }
  return "?";
}

const Term* VulnReport::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return &t;
  return nullptr;
}

namespace {

SymRef need(SymRef e, const std::string& what) {
  if (!e) throw Abort("classify", "no expression for " + what);
  return e;
}

int line_of(const Program& p, int uid) {
  const Instruction* in = p.inst(uid);
  return in ? in->span.line : 0;
}

void collect_vars(const SymRef& e, std::vector<const SymExpr*>& out) {
  if (e->kind == SymKind::Var) out.push_back(e.get());
  for (const auto& k : e->kids) collect_vars(k, out);
}

// Block reachability: can control flow from (sb, si) arrive at (ub, ui)?
bool reaches(const Function& f, int sb, int si, int ub, int ui) {
  if (sb == ub && si < ui) return true;
  std::vector<char> seen(f.blocks.size(), 0);
  std::vector<int> work = f.successors(sb);
  while (!work.empty()) {
    int b = work.back();
    work.pop_back();
    if (seen[static_cast<size_t>(b)]) continue;
    seen[static_cast<size_t>(b)] = 1;
    if (b == ub) return true;
    for (int s : f.successors(b)) work.push_back(s);
  }
  return false;
}

SymRef strip_pointer_casts(SymRef e) {
  while (e->kind == SymKind::Cast && is_pointer(e->type) && is_pointer(decay(e->kids[0]->type))) e = e->kids[0];
  return e;
}

}  // namespace

VulnReport classify(const Program& p, const ExecResult& r, const ExprCache& exprs) {
  if (r.status != ExecResult::Status::Faulted) throw Abort("classify", "no fault to classify");
  VulnReport v;
  v.fault = r.fault;
  if (const AllocationRecord* a = r.alloc(r.fault.alloc_id)) v.alloc = *a;

  if (r.fault.kind == FaultKind::ZeroSizeAllocOverflow) {
    const Instruction* op = p.inst(r.fault.overflow_uid);
    if (!op || op->op != Opcode::BinOp) throw Abort("classify", "outside vulnerability domain");
    v.cls = VulnClass::IntegerOverflow;
    v.point_uid = op->uid;
    v.func = p.locate(op->uid).func->name;
    v.terms.push_back({"lhs", v.func, op->uid, need(exprs.operand(op->uid, op->a), "overflow operand")});
    v.terms.push_back({"rhs", v.func, op->uid, need(exprs.operand(op->uid, op->b), "overflow operand")});
    const Instruction* site = p.inst(r.fault.inst_uid);
    v.terms.push_back({"size", r.fault.func, site->uid, need(exprs.operand(site->uid, site->args.at(0)), "size")});
    return v;
  }

  if (r.fault.kind != FaultKind::OobRead && r.fault.kind != FaultKind::OobWrite)
    throw Abort("classify", "outside vulnerability domain");
  const Instruction* in = p.inst(r.fault.inst_uid);
  InstLoc loc = p.locate(r.fault.inst_uid);
  if (!in || !loc.func || in->op == Opcode::Call) throw Abort("classify", "outside vulnerability domain");
  v.point_uid = in->uid;
  v.func = loc.func->name;
  FaultRecord f = detect_bad_cast(p, r);
  if (f.kind == FaultKind::BadCastAccess) {
    v.cls = VulnClass::BadCast;
  } else if (address_updated_in_loop(*loc.func, *in)) {
    v.cls = VulnClass::BufferOverflow;
  } else {
    throw Abort("classify", "outside vulnerability domain");
  }
  v.terms.push_back({"access_ptr", v.func, in->uid, need(exprs.operand(in->uid, in->a), "access pointer")});
  return v;
}

void check_reaching_definitions(const Program& p, const ExecResult& r, const std::vector<Term>& terms) {
  std::map<std::string, ReachingDefs> rds;
  for (const auto& t : terms) {
    const Function* f = p.find(t.func);
    if (!f || !t.expr) continue;
    auto it = rds.try_emplace(t.func, *f).first;
    std::vector<const SymExpr*> vars;
    collect_vars(t.expr, vars);
    for (const SymExpr* var : vars) {
      for (int d : it->second.before(t.at_uid, var->name)) {
        if (d == kEntryDef || r.ran(d)) continue;
        throw Abort("reaching_definitions", "variable " + var->name + " in " + t.func +
                                                " has a reaching definition at line " +
                                                std::to_string(line_of(p, d)) +
                                                " that did not execute; the patch produced may be unsound");
      }
    }
  }
}

std::vector<SymRef> read_locations(const SymRef& e) {
  std::vector<SymRef> out;
  std::function<void(const SymRef&)> walk = [&](const SymRef& x) {
    switch (x->kind) {
      case SymKind::Var:
        if (is_scalar(x->type)) out.push_back(x);
        return;
      case SymKind::Field:
      case SymKind::Index:
      case SymKind::Deref:
        out.push_back(x);
        break;
      case SymKind::AddrOf:
        // &x reads no memory of x itself, only what its address uses.
        if (x->kids[0]->kind == SymKind::Var) return;
        for (const auto& k : x->kids[0]->kids) walk(k);
        return;
      default:
        break;
    }
    for (const auto& k : x->kids) walk(k);
  };
  walk(e);
  return out;
}

namespace {

bool global_address_taken(const Program& p, const std::string& name) {
  for (const auto& [fname, f] : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        if (in.op == Opcode::Allocate && in.var == name && !f.is_param(name) && !f.is_local(name)) return true;
  return false;
}

}  // namespace

AliasVerdict alias_query(const Program& p, const Function& f, const Instruction& store, const SymRef& location,
                         const ExprCache& exprs) {
  SymRef lhs = store.op == Opcode::Store ? exprs.store_lhs(store.uid) : nullptr;
  if (location->kind == SymKind::Var) {
    bool local = f.is_param(location->name) || f.is_local(location->name);
    bool taken = local ? address_taken(f).count(location->name) != 0 : global_address_taken(p, location->name);
    if (!taken) return AliasVerdict::MustNotAlias;
    if (lhs && lhs->kind == SymKind::Var && lhs->name == location->name) return AliasVerdict::MustAlias;
    // `*r = ...` where r's only reaching definition is `r = &x`.
    if (lhs && lhs->kind == SymKind::Deref && lhs->kids[0]->kind == SymKind::Var) {
      auto defs = ReachingDefs(f).before(store.uid, lhs->kids[0]->name);
      if (defs.size() == 1 && *defs.begin() != kEntryDef) {
        SymRef rhs = exprs.inst(*defs.begin());
        if (rhs && rhs->kind == SymKind::AddrOf && rhs->kids[0]->kind == SymKind::Var)
          return rhs->kids[0]->name == location->name ? AliasVerdict::MustAlias : AliasVerdict::MustNotAlias;
      }
    }
    return AliasVerdict::MayAlias;
  }
  if (!lhs) return AliasVerdict::MayAlias;
  if (sym_equal(lhs, location)) return AliasVerdict::MustAlias;
  if (location->kind == SymKind::Var) return AliasVerdict::MayAlias;
  // Field-sensitive: distinct fields of struct objects never overlap.
  if (lhs->kind == SymKind::Field && location->kind == SymKind::Field && lhs->name != location->name)
    return AliasVerdict::MustNotAlias;
  return AliasVerdict::MayAlias;
}

void alias_check(const Program& p, const std::vector<Term>& terms, const ExprCache& exprs) {
  for (const auto& t : terms) {
    const Function* f = p.find(t.func);
    if (!f || !t.expr) continue;
    InstLoc use = p.locate(t.at_uid);
    if (use.func != f) continue;
    auto locs = read_locations(t.expr);
    if (locs.empty()) continue;
    for (size_t b = 0; b < f->blocks.size(); ++b) {
      const auto& insts = f->blocks[b].insts;
      for (size_t i = 0; i < insts.size(); ++i) {
        const Instruction& st = insts[i];
        bool pointer_store = st.op == Opcode::Store && st.var.empty();
        if (!pointer_store) continue;
        if (!reaches(*f, static_cast<int>(b), static_cast<int>(i), use.block, use.index)) continue;
        for (const auto& loc : locs) {
          AliasVerdict v = alias_query(p, *f, st, loc, exprs);
          if (v == AliasVerdict::MustNotAlias) continue;
          throw Abort("alias", "store at line " + std::to_string(st.span.line) + " " + alias_verdict_name(v) +
                                   " with " + render(loc) + " in " + t.func);
        }
      }
    }
  }
}

BasePointer find_base_pointer(const Program& p, const VulnReport& v, const ExprCache& exprs) {
  const Instruction* in = p.inst(v.point_uid);
  InstLoc loc = p.locate(v.point_uid);
  if (!in || !loc.func || !in->a.is_value()) throw Abort("base_pointer", "fault has no address operand");
  const Function* f = loc.func;
  uint64_t offset = 0;
  const Instruction* d = f->def_of(in->a.id);
  int base_uid = in->uid;
  Operand base = in->a;
  while (d && d->op == Opcode::GetElementField) {
    offset += d->offset;
    base = d->a;
    base_uid = d->uid;
    d = base.is_value() ? f->def_of(base.id) : nullptr;
  }
  if (d && d->op == Opcode::GetElementIndex) throw Abort("base_pointer", "unmodeled operation in base chain");
  SymRef e = exprs.operand(base_uid, base);
  if (!e) throw Abort("base_pointer", "unmodeled operation in base chain");
  BasePointer bp;
  bp.offset = offset;
  bp.value = v.fault.address - offset;
  e = strip_pointer_casts(e);
  std::string func = f->name;
  int at = v.point_uid;
  for (int call_uid : v.fault.call_stack) {
    const Function* cur = p.find(func);
    if (e->kind != SymKind::Var || !cur->is_param(e->name)) break;
    size_t idx = 0;
    while (cur->params[idx].name != e->name) ++idx;
    const Instruction* call = p.inst(call_uid);
    if (!call || idx >= call->args.size()) throw Abort("base_pointer", "argument mismatch at call");
    SymRef arg = exprs.operand(call_uid, call->args[idx]);
    if (!arg) throw Abort("base_pointer", "unmodeled operation in base chain");
    e = strip_pointer_casts(arg);
    func = p.locate(call_uid).func->name;
    at = call_uid;
  }
  bp.term = {"base_ptr", func, at, e};
  if (bp.value != v.alloc.base)
    throw Abort("base_pointer", "base pointer does not address the start of the allocation");
  return bp;
}

}  // namespace patchsmith
