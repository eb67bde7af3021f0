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


#include "patchsmith/symexpr.hpp"

namespace patchsmith {

namespace {

SymOp sym_op(BinKind k) {
  switch (k) {
    case BinKind::Add: return SymOp::Add;
    case BinKind::Sub: return SymOp::Sub;
    case BinKind::Mul: return SymOp::Mul;
    case BinKind::Div: return SymOp::Div;
    case BinKind::Rem: return SymOp::Rem;
    case BinKind::Shl: return SymOp::Shl;
    case BinKind::Shr: return SymOp::Shr;
    case BinKind::And: return SymOp::And;
    case BinKind::Or: return SymOp::Or;
    case BinKind::Xor: return SymOp::Xor;
    case BinKind::Cast: break;
  }
  return SymOp::Add;
}

SymRef named_var(const Function& f, const std::string& v, const TypeRef& fallback) {
  TypeRef t = f.var_type(v);
  if (t) return sym_var(v, t, f.name);
  return sym_var(v, fallback, "");
}

}  // namespace

SymRef build_expression(const Instruction& in, const Function& f,
                        const std::function<SymRef(int)>& value_of) {
  auto operand = [&](const Operand& o) -> SymRef {
    switch (o.kind) {
      case Operand::Kind::Const: return sym_const(o.imm, o.type);
      case Operand::Kind::Str: return sym_str(o.str);
      case Operand::Kind::Value: {
        SymRef e = value_of(o.id);
        if (!e) throw Abort("expr", "incomplete expression");
        return e;
      }
      case Operand::Kind::None: break;
    }
    throw Abort("expr", "incomplete expression");
  };
  switch (in.op) {
    case Opcode::Load:
      if (!in.var.empty()) return named_var(f, in.var, in.type);
      return make_deref(operand(in.a));
    case Opcode::Store:
      return operand(in.b);
    case Opcode::GetElementField: {
      SymRef base = operand(in.a);
      SymRef fld = base->kind == SymKind::AddrOf ? make_struct_op(base->kids[0], in.field, false)
                                                 : make_struct_op(base, in.field, true);
      return is_array(fld->type) ? fld : sym_addr_of(fld);
    }
    case Opcode::GetElementIndex: {
      SymRef idx = make_array_op(operand(in.a), operand(in.b));
      return is_array(idx->type) ? idx : sym_addr_of(idx);
    }
    case Opcode::BinOp:
      if (in.bin == BinKind::Cast) return sym_cast(in.type, operand(in.a));
      return make_bin_op(sym_op(in.bin), operand(in.a), operand(in.b), in.type);
    case Opcode::CmpOp:
      return make_cmp_op(in.cmp, operand(in.a), operand(in.b));
    case Opcode::Allocate: {
      TypeRef vt = in.type && in.type->elem ? in.type->elem : type_long();
      SymRef v = named_var(f, in.var, vt);
      return is_array(v->type) ? v : sym_addr_of(v);
    }
    case Opcode::Call: {
      std::vector<SymRef> args;
      for (const auto& a : in.args) args.push_back(operand(a));
      return make_call(in.callee, std::move(args), in.type, true);
    }
    case Opcode::CondBranch:
      return operand(in.a);
    case Opcode::Ret:
      return in.a.kind == Operand::Kind::None ? nullptr : operand(in.a);
    case Opcode::Branch:
      return nullptr;
  }
  return nullptr;
}

FunctionExprs build_function_exprs(const Function& f) {
  FunctionExprs out;
  auto value_of = [&](int id) -> SymRef {
    auto it = out.values.find(id);
    return it == out.values.end() ? nullptr : it->second;
  };
  for (const auto& b : f.blocks) {
    for (const auto& in : b.insts) {
      SymRef e;
      try {
        e = build_expression(in, f, value_of);
      } catch (const Abort&) {
        // Leave the value unbound; users of it abort when they ask for it.
        continue;
      }
      if (e) out.insts[in.uid] = e;
      if (in.result >= 0 && e) out.values[in.result] = e;
      if (in.op == Opcode::Store) {
        SymRef addr = in.var.empty() ? value_of(in.a.id) : nullptr;
        if (in.var.empty() && !addr) continue;
        SymRef lhs = addr ? make_deref(addr) : named_var(f, in.var, in.type);
        out.stores[in.uid] = {lhs, e};
      }
    }
  }
  return out;
}

ExprCache::ExprCache(const Program& p) : p_(p) {
  for (const auto& name : p.order) funcs_[name] = build_function_exprs(p.functions.at(name));
}

SymRef ExprCache::inst(int uid) const {
  InstLoc loc = p_.locate(uid);
  if (!loc.func) return nullptr;
  const auto& m = funcs_.at(loc.func->name).insts;
  auto it = m.find(uid);
  return it == m.end() ? nullptr : it->second;
}

SymRef ExprCache::store_lhs(int uid) const {
  InstLoc loc = p_.locate(uid);
  if (!loc.func) return nullptr;
  const auto& m = funcs_.at(loc.func->name).stores;
  auto it = m.find(uid);
  return it == m.end() ? nullptr : it->second.first;
}

SymRef ExprCache::operand(int uid, const Operand& o) const {
  switch (o.kind) {
    case Operand::Kind::Const: return sym_const(o.imm, o.type);
    case Operand::Kind::Str: return sym_str(o.str);
    case Operand::Kind::None: return nullptr;
    case Operand::Kind::Value: break;
  }
  InstLoc loc = p_.locate(uid);
  if (!loc.func) return nullptr;
  const auto& m = funcs_.at(loc.func->name).values;
  auto it = m.find(o.id);
  return it == m.end() ? nullptr : it->second;
}

}  // namespace patchsmith
