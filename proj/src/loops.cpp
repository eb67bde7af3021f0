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


#include "patchsmith/loops.hpp"

#include <algorithm>

#include "patchsmith/dataflow.hpp"

namespace patchsmith {

namespace {

void fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
}

std::set<std::string> stored_vars(const Function& f, const std::set<int>& blocks) {
  std::set<std::string> out;
  for (int b : blocks)
    for (const auto& in : f.blocks[static_cast<size_t>(b)].insts)
      if (in.op == Opcode::Store && !in.var.empty()) out.insert(in.var);
  return out;
}

bool mentions_any(const SymRef& e, const std::set<std::string>& vars) {
  for (const auto& v : sym_vars(e))
    if (vars.count(v)) return true;
  return false;
}

CmpKind negate(CmpKind k) {
  switch (k) {
    case CmpKind::Eq: return CmpKind::Ne;
    case CmpKind::Ne: return CmpKind::Eq;
    case CmpKind::Lt: return CmpKind::Ge;
    case CmpKind::Le: return CmpKind::Gt;
    case CmpKind::Gt: return CmpKind::Le;
    case CmpKind::Ge: return CmpKind::Lt;
  }
  return k;
}

CmpKind mirror(CmpKind k) {
  switch (k) {
    case CmpKind::Lt: return CmpKind::Gt;
    case CmpKind::Le: return CmpKind::Ge;
    case CmpKind::Gt: return CmpKind::Lt;
    case CmpKind::Ge: return CmpKind::Le;
    default: return k;
  }
}

SymRef add(SymRef a, SymRef b) { return simplify(make_bin_op(SymOp::Add, std::move(a), std::move(b), nullptr)); }

// Value of `var` on entry to the loop whose preheader is `pre`.
SymRef entry_value(const Function& f, int pre, const std::string& var, const ExprCache& ex) {
  auto defs = ReachingDefs(f).at_end(pre, var);
  if (defs.size() != 1) return nullptr;
  int d = *defs.begin();
  if (d == kEntryDef) {
    if (!f.is_param(var)) return nullptr;
    return sym_var(var, f.var_type(var), f.name);
  }
  return ex.inst(d);
}

bool is_var(const SymRef& e) { return e && e->kind == SymKind::Var; }

bool is_negative(const SymRef& e) {
  if (e->kind == SymKind::Const) return e->value < 0;
  return e->kind == SymKind::BinOp && e->op == SymOp::Mul &&
         ((e->kids[0]->kind == SymKind::Const && e->kids[0]->value < 0) ||
          (e->kids[1]->kind == SymKind::Const && e->kids[1]->value < 0));
}

SymRef negated(const SymRef& e) {
  if (e->kind == SymKind::Const) return sym_const(-e->value, e->type);
  return simplify(make_bin_op(SymOp::Mul, sym_const(-1), e, nullptr));
}

}  // namespace

int block_of(const Function& f, int uid) {
  for (size_t b = 0; b < f.blocks.size(); ++b)
    for (const auto& in : f.blocks[b].insts)
      if (in.uid == uid) return static_cast<int>(b);
  return -1;
}

std::vector<LoopInfo> enclosing_loops(const Function& f, int b) {
  std::vector<LoopInfo> out;
  for (auto& l : find_loops(f))
    if (l.contains(b)) out.push_back(l);
  std::stable_sort(out.begin(), out.end(),
                   [](const LoopInfo& a, const LoopInfo& c) { return a.body.size() < c.body.size(); });
  return out;
}

std::optional<LoopBounds> find_loop_bounds(const Function& f, const LoopInfo& l, const ExprCache& ex,
                                           std::string* why) {
  if (!l.normalized || l.exiting.size() != 1) {
    fail(why, "loop is not normalized");
    return std::nullopt;
  }
  const BasicBlock& exit = f.blocks[static_cast<size_t>(*l.exiting.begin())];
  const Instruction& br = exit.insts.back();
  bool true_stays = l.contains(f.block_index(br.target));
  const auto& fx = ex.of(f.name);
  auto stored = stored_vars(f, l.body);
  for (auto it = exit.insts.rbegin(); it != exit.insts.rend(); ++it) {
    if (it->op != Opcode::CmpOp) continue;
    auto a = fx.values.find(it->a.is_value() ? it->a.id : -1);
    SymRef lhs = a == fx.values.end() ? nullptr : a->second;
    SymRef rhs = ex.operand(it->uid, it->b);
    if (!is_var(lhs)) continue;
    CmpKind k = it->cmp;
    // A loop-invariant variable on the left with the induction variable on
    // the right: read the comparison mirrored.
    if (!stored.count(lhs->name) && is_var(rhs) && stored.count(rhs->name)) {
      std::swap(lhs, rhs);
      k = mirror(k);
    }
    if (!rhs) break;
    // The condition under which the loop continues.
    if (it->result != br.a.id || !br.a.is_value()) {
      fail(why, "exit condition is not a single comparison");
      return std::nullopt;
    }
    if (!true_stays) k = negate(k);
    LoopBounds lb;
    lb.iter = lhs->name;
    if (k == CmpKind::Le) lb.end = add(rhs, sym_const(1));
    else if (k == CmpKind::Ge) lb.end = simplify(make_bin_op(SymOp::Sub, rhs, sym_const(1), nullptr));
    else if (k == CmpKind::Eq) {
      fail(why, "loop continues on equality");
      return std::nullopt;
    } else lb.end = rhs;
    if (l.preheader < 0) {
      fail(why, "loop has no preheader");
      return std::nullopt;
    }
    lb.initial = entry_value(f, l.preheader, lb.iter, ex);
    if (!lb.initial) {
      fail(why, "no unique initial value for " + lb.iter);
      return std::nullopt;
    }
    return lb;
  }
  fail(why, "no exit comparison on a variable");
  return std::nullopt;
}

LoopUpdates find_loop_updates(const Function& f, const LoopInfo& l, std::set<int>& visited, const ExprCache& ex) {
  LoopUpdates u;
  auto stored = stored_vars(f, l.body);
  const auto& fx = ex.of(f.name);
  for (int b : l.body) {
    if (!visited.insert(b).second) continue;
    const auto& insts = f.blocks[static_cast<size_t>(b)].insts;
    for (auto it = insts.rbegin(); it != insts.rend(); ++it) {
      if (it->op != Opcode::Store || it->var.empty()) continue;
      auto s = fx.stores.find(it->uid);
      SymRef rhs = s == fx.stores.end() ? nullptr : s->second.second;
      SymRef amount;
      if (rhs && rhs->kind == SymKind::BinOp && (rhs->op == SymOp::Add || rhs->op == SymOp::Sub)) {
        const SymRef& x = rhs->kids[0];
        const SymRef& y = rhs->kids[1];
        auto fixed = [&](const SymRef& e) { return !mentions_any(e, stored) && !contains_call(e); };
        if (is_var(x) && x->name == it->var && fixed(y))
          amount = rhs->op == SymOp::Add ? y : simplify(make_bin_op(SymOp::Sub, sym_const(0), y, nullptr));
        else if (rhs->op == SymOp::Add && is_var(y) && y->name == it->var && fixed(x))
          amount = x;
      }
      if (!amount) {
        u.reset.insert(it->var);
        continue;
      }
      if (u.updates.count(it->var)) {
        u.ok = false;
        u.why = "more than one update to " + it->var;
      }
      u.updates[it->var] = simplify(amount);
    }
  }
  return u;
}

std::optional<AccessRange> analyze_access_range(const Function& f, const Instruction& inst, const ExprCache& ex,
                                                std::string* why) {
  auto nest = enclosing_loops(f, block_of(f, inst.uid));
  if (nest.empty()) {
    fail(why, "access is not inside a loop");
    return std::nullopt;
  }
  if (!inst.a.is_value()) {
    fail(why, "access has no address operand");
    return std::nullopt;
  }

  // The variable that moves the access: a pointer variable, or an index
  // into a loop-invariant base.
  const auto& fx = ex.of(f.name);
  auto nest_stored = stored_vars(f, nest.back().body);
  std::string ptr;
  SymRef base;      // index mode only
  SymRef offset = sym_const(0);
  const Instruction* d = f.def_of(inst.a.id);
  auto value = [&](const Operand& o) -> SymRef { return ex.operand(d->uid, o); };
  if (d && d->op == Opcode::Load && !d->var.empty() && is_pointer(d->type)) {
    ptr = d->var;
  } else if (d && (d->op == Opcode::GetElementIndex || (d->op == Opcode::BinOp && d->bin == BinKind::Add &&
                                                        is_pointer(d->type)))) {
    SymRef b = value(d->a), i = value(d->b);
    if (b && i && is_var(b) && nest_stored.count(b->name) && !mentions_any(i, nest_stored)) {
      ptr = b->name;
      offset = i;
    } else if (b && i && is_var(i) && !mentions_any(b, nest_stored)) {
      ptr = i->name;
      base = b;
    }
  }
  if (ptr.empty()) {
    fail(why, "access address is not an induction variable");
    return std::nullopt;
  }

  AccessRange r;
  r.func = f.name;
  r.ptr = ptr;
  std::map<std::string, SymRef> acc;
  std::set<int> visited;
  SymRef restart;
  for (size_t li = 0; li < nest.size(); ++li) {
    const LoopInfo& l = nest[li];
    auto lu = find_loop_updates(f, l, visited, ex);
    if (lu.reset.count(ptr)) {
      // The pointer restarts at every iteration of this loop. If it restarts
      // at the same nest-invariant value, the inner range is the range of
      // the whole nest.
      if (li == 0 || lu.updates.count(ptr)) {
        fail(why, ptr + " is reassigned inside the loop nest");
        return std::nullopt;
      }
      const LoopInfo& inner = nest[li - 1];
      auto defs = inner.preheader < 0 ? std::set<int>{} : ReachingDefs(f).at_end(inner.preheader, ptr);
      SymRef rhs;
      if (defs.size() == 1 && l.body.count(block_of(f, *defs.begin()))) {
        auto s = fx.stores.find(*defs.begin());
        if (s != fx.stores.end()) rhs = s->second.second;
      }
      if (!rhs || contains_call(rhs) || mentions_any(rhs, nest_stored)) {
        fail(why, ptr + " is reassigned inside the loop nest");
        return std::nullopt;
      }
      restart = rhs;
      nest.resize(li);
      break;
    }
    if (!l.normalized) {
      fail(why, "loop at " + f.blocks[static_cast<size_t>(l.header)].label + " is not normalized");
      return std::nullopt;
    }
    auto lb = find_loop_bounds(f, l, ex, why);
    if (!lb) return std::nullopt;
    if (!lu.ok) {
      fail(why, lu.why);
      return std::nullopt;
    }
    if (lu.reset.count(lb->iter) && li == 0) {
      fail(why, lb->iter + " is reassigned inside its loop");
      return std::nullopt;
    }
    auto loop_stored = stored_vars(f, l.body);
    if (mentions_any(lb->end, loop_stored) || contains_call(lb->end)) {
      fail(why, "loop bound changes inside the loop");
      return std::nullopt;
    }
    // Inner trip counts must not vary across iterations of the outer loops.
    auto outer_stored = li + 1 < nest.size() ? nest_stored : std::set<std::string>{};
    bool varies = mentions_any(lb->end, outer_stored) || mentions_any(lb->initial, outer_stored);
    for (const auto& [var, upd] : lu.updates) varies = varies || mentions_any(upd, outer_stored);
    if (varies) {
      fail(why, "trip count of the loop at " + f.blocks[static_cast<size_t>(l.header)].label +
                    " varies inside the nest");
      return std::nullopt;
    }
    AraStep step;
    step.header = l.header;
    step.bounds = *lb;
    step.updates = lu.updates;
    for (const auto& [var, upd] : lu.updates) acc[var] = acc.count(var) ? add(acc[var], upd) : upd;
    if (!acc.count(lb->iter)) {
      fail(why, "no update to loop iterator " + lb->iter);
      return std::nullopt;
    }
    SymRef stride = acc[lb->iter];
    if (is_negative(stride))
      step.count = simplify(make_bin_op(SymOp::Div, make_bin_op(SymOp::Sub, lb->initial, lb->end, nullptr),
                                        negated(stride), nullptr));
    else
      step.count = simplify(make_bin_op(SymOp::Div, make_bin_op(SymOp::Sub, lb->end, lb->initial, nullptr),
                                        stride, nullptr));
    for (auto& [var, a] : acc) {
      // Variables reinitialized by this loop's own code restart every
      // iteration; their accumulated update is per iteration only.
      if (lu.reset.count(var)) continue;
      a = simplify(make_bin_op(SymOp::Mul, a, step.count, nullptr));
    }
    step.acc = acc;
    r.steps.push_back(std::move(step));
  }
  if (!acc.count(ptr)) {
    fail(why, "no update to " + ptr);
    return std::nullopt;
  }
  const LoopInfo& outer = nest.back();
  if (outer.preheader < 0) {
    fail(why, "outermost loop has no preheader");
    return std::nullopt;
  }
  SymRef init = restart ? restart : entry_value(f, outer.preheader, ptr, ex);
  if (!init) {
    fail(why, "no unique definition of " + ptr + " reaches the loop");
    return std::nullopt;
  }
  SymRef total = acc[ptr];
  bool down = is_negative(total);
  if (!down) {
    for (const auto& s : r.steps) {
      auto it = s.updates.find(ptr);
      if (it != s.updates.end() && it->second->kind == SymKind::Const && it->second->value < 0) down = true;
    }
  }
  SymRef live = f.var_type(ptr) ? sym_var(ptr, f.var_type(ptr), f.name) : sym_var(ptr, type_long());
  r.cursor = base ? add(base, add(live, offset)) : add(live, offset);
  SymRef first = add(init, offset);
  SymRef last = down ? simplify(make_bin_op(SymOp::Sub, add(init, offset), negated(total), nullptr))
                     : add(add(init, total), offset);
  if (base) {
    first = add(base, first);
    last = add(base, last);
  }
  if (down) {
    r.dir = Direction::Lower;
    r.lo = add(last, sym_const(1));
    r.hi = add(first, sym_const(1));
  } else {
    r.lo = first;
    r.hi = last;
  }
  r.at_uid = f.blocks[static_cast<size_t>(outer.preheader)].insts.back().uid;
  return r;
}

}  // namespace patchsmith
