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

#include <algorithm>
#include <cstdio>
#include <limits>

#include "patchsmith/arith.hpp"

namespace patchsmith {

namespace {

SymRef node(SymExpr e) { return std::make_shared<const SymExpr>(std::move(e)); }

TypeRef struct_of(const TypeRef& base, bool via_pointer) {
  TypeRef t = via_pointer ? decay(base) : base;
  if (via_pointer) t = is_pointer(t) ? t->elem : nullptr;
  return is_struct(t) ? t : nullptr;
}

TypeRef elem_of(const TypeRef& t) {
  TypeRef d = decay(t);
  return is_pointer(d) ? d->elem : nullptr;
}

}  // namespace

SymRef sym_var(const std::string& name, TypeRef type, const std::string& scope) {
  SymExpr e;
  e.kind = SymKind::Var;
  e.name = name;
  e.scope = scope;
  e.type = type ? std::move(type) : type_long();
  return node(std::move(e));
}

SymRef sym_const(int64_t v, TypeRef type) {
  SymExpr e;
  e.kind = SymKind::Const;
  e.value = static_cast<int64_t>(convert(static_cast<uint64_t>(v), type));
  e.type = std::move(type);
  return node(std::move(e));
}

SymRef sym_str(const std::string& s) {
  SymExpr e;
  e.kind = SymKind::Str;
  e.str = s;
  e.type = pointer_to(type_char());
  return node(std::move(e));
}

SymRef sym_cast(TypeRef to, SymRef x) {
  SymExpr e;
  e.kind = SymKind::Cast;
  e.type = std::move(to);
  e.kids = {std::move(x)};
  return node(std::move(e));
}

SymRef sym_addr_of(SymRef x) {
  if (x->kind == SymKind::Deref) return x->kids[0];
  SymExpr e;
  e.kind = SymKind::AddrOf;
  e.type = pointer_to(x->type);
  e.kids = {std::move(x)};
  return node(std::move(e));
}

TypeRef bin_result_type(SymOp op, const TypeRef& at, const TypeRef& bt) {
  TypeRef a = decay(at), b = decay(bt);
  switch (op) {
    case SymOp::LAnd:
    case SymOp::LOr:
      return type_int();
    case SymOp::Shl:
    case SymOp::Shr:
      return is_int(a) ? promote(a) : type_long();
    case SymOp::Add:
      if (is_pointer(a)) return a;
      if (is_pointer(b)) return b;
      break;
    case SymOp::Sub:
      if (is_pointer(a) && is_pointer(b)) return type_long();
      if (is_pointer(a)) return a;
      break;
    default:
      break;
  }
  if (is_int(a) && is_int(b)) return common_type(a, b);
  return type_long();
}

SymRef make_bin_op(SymOp op, SymRef a, SymRef b, TypeRef type) {
  SymExpr e;
  e.kind = SymKind::BinOp;
  e.op = op;
  e.type = type ? std::move(type) : bin_result_type(op, a->type, b->type);
  e.kids = {std::move(a), std::move(b)};
  return node(std::move(e));
}

SymRef make_cmp_op(CmpKind k, SymRef a, SymRef b) {
  SymExpr e;
  e.kind = SymKind::Cmp;
  e.cmp = k;
  e.type = type_int();
  e.kids = {std::move(a), std::move(b)};
  return node(std::move(e));
}

SymRef make_deref(SymRef p) {
  if (p->kind == SymKind::AddrOf) return p->kids[0];
  SymExpr e;
  e.kind = SymKind::Deref;
  TypeRef el = elem_of(p->type);
  e.type = el ? el : type_long();
  e.kids = {std::move(p)};
  return node(std::move(e));
}

SymRef make_struct_op(SymRef base, const std::string& field, bool via_pointer) {
  TypeRef st = struct_of(base->type, via_pointer);
  if (!st) throw Abort("expr", "field access on non-struct value");
  const Field* f = st->def->find(field);
  if (!f) throw Abort("expr", "unknown field " + field);
  SymExpr e;
  e.kind = SymKind::Field;
  e.name = field;
  e.via_pointer = via_pointer;
  e.type = f->type;
  e.kids = {std::move(base)};
  return node(std::move(e));
}

SymRef make_array_op(SymRef base, SymRef index) {
  if (base->kind == SymKind::AddrOf && is_array(base->kids[0]->type)) base = base->kids[0];
  SymExpr e;
  e.kind = SymKind::Index;
  TypeRef el = elem_of(base->type);
  e.type = el ? el : type_long();
  e.kids = {std::move(base), std::move(index)};
  return node(std::move(e));
}

SymRef make_call(const std::string& callee, std::vector<SymRef> args, TypeRef type,
                 bool call_derived) {
  SymExpr e;
  e.kind = SymKind::Call;
  e.name = callee;
  e.type = type ? std::move(type) : type_int();
  e.call_derived = call_derived;
  e.kids = std::move(args);
  return node(std::move(e));
}

bool sym_equal(const SymExpr& a, const SymExpr& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
  switch (a.kind) {
    case SymKind::Var:
      if (a.name != b.name || a.scope != b.scope) return false;
      break;
    case SymKind::Const:
      if (a.value != b.value) return false;
      break;
    case SymKind::Str:
      if (a.str != b.str) return false;
      break;
    case SymKind::BinOp:
      if (a.op != b.op) return false;
      break;
    case SymKind::Cmp:
      if (a.cmp != b.cmp) return false;
      break;
    case SymKind::Field:
      if (a.name != b.name || a.via_pointer != b.via_pointer) return false;
      break;
    case SymKind::Call:
      if (a.name != b.name) return false;
      break;
    case SymKind::Cast:
      if (type_name(a.type) != type_name(b.type)) return false;
      break;
    default:
      break;
  }
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!sym_equal(*a.kids[i], *b.kids[i])) return false;
  return true;
}

namespace {

void collect_vars(const SymRef& e, std::set<std::string>& out) {
  if (e->kind == SymKind::Var) out.insert(e->name);
  for (const auto& k : e->kids) collect_vars(k, out);
}

}  // namespace

std::set<std::string> sym_vars(const SymRef& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

bool contains_call(const SymRef& e) {
  if (e->kind == SymKind::Call) return true;
  for (const auto& k : e->kids)
    if (contains_call(k)) return true;
  return false;
}

bool is_call_derived(const SymRef& e) {
  if (e->kind == SymKind::Call && e->call_derived) return true;
  for (const auto& k : e->kids)
    if (is_call_derived(k)) return true;
  return false;
}

namespace {

SymRef with_kids(const SymRef& e, std::vector<SymRef> kids) {
  SymExpr c = *e;
  c.kids = std::move(kids);
  return node(std::move(c));
}

SymRef with_type(const SymRef& e, TypeRef t) {
  SymExpr c = *e;
  c.type = std::move(t);
  return node(std::move(c));
}

// Conversions to int from narrower integers happen in every arithmetic
// context, so they never need to be spelled out.
bool implicit_ok(const TypeRef& from, const TypeRef& to) {
  if (same_type(from, to)) return true;
  if (is_int(from) && is_int(to)) {
    if (from->width == to->width && from->is_signed == to->is_signed) return true;
    return from->width < 32 && same_type(to, type_int());
  }
  return false;
}

SymRef coerce(const SymRef& e, const TypeRef& t) {
  if (implicit_ok(e->type, t)) return e;
  if (e->kind == SymKind::Const && is_int(t)) return sym_const(e->value, t);
  return sym_cast(t, e);
}

}  // namespace

SymRef retype(const SymRef& e) {
  if (e->kids.empty()) return e;
  std::vector<SymRef> kids;
  bool changed = false;
  for (const auto& k : e->kids) {
    kids.push_back(retype(k));
    changed |= kids.back() != k;
  }
  TypeRef t = e->type;
  switch (e->kind) {
    case SymKind::BinOp: t = bin_result_type(e->op, kids[0]->type, kids[1]->type); break;
    case SymKind::Deref: {
      TypeRef el = elem_of(kids[0]->type);
      if (el) t = el;
      break;
    }
    case SymKind::Index: {
      TypeRef el = elem_of(kids[0]->type);
      if (el) t = el;
      break;
    }
    case SymKind::Field: {
      TypeRef st = struct_of(kids[0]->type, e->via_pointer);
      if (st && st->def->find(e->name)) t = st->def->find(e->name)->type;
      break;
    }
    case SymKind::AddrOf: t = pointer_to(kids[0]->type); break;
    default: break;
  }
  if (!changed && same_type(t, e->type)) return e;
  SymExpr c = *e;
  c.kids = std::move(kids);
  c.type = t;
  return node(std::move(c));
}

SymRef substitute(const SymRef& e, const std::map<std::string, SymRef>& repl) {
  if (e->kind == SymKind::Var) {
    auto it = repl.find(e->name);
    if (it == repl.end()) return e;
    return coerce(it->second, e->type);
  }
  if (e->kids.empty()) return e;
  std::vector<SymRef> kids;
  bool changed = false;
  for (const auto& k : e->kids) {
    kids.push_back(substitute(k, repl));
    changed |= kids.back() != k;
  }
  if (!changed) return e;
  return retype(with_kids(e, std::move(kids)));
}

// ---- simplification ----

namespace {

struct Term {
  bool neg = false;
  SymRef e;
};

bool is_additive(const SymRef& e) {
  return e->kind == SymKind::BinOp && (e->op == SymOp::Add || e->op == SymOp::Sub);
}

int64_t signed_in(uint64_t bits, const TypeRef& t) {
  if (is_int(t)) return static_cast<int64_t>(normalize_int(bits, t->width, true));
  return static_cast<int64_t>(bits);
}

// Literal type C would give to a decimal constant.
TypeRef literal_type(int64_t v) {
  if (v >= std::numeric_limits<int32_t>::min() && v <= std::numeric_limits<int32_t>::max())
    return type_int();
  return type_long();
}

// True when the `links` outermost left-spine nodes of `e` all have type `t`.
bool chain_typed(const SymRef& e, const TypeRef& t, size_t links) {
  for (const SymExpr* n = e.get(); links > 0; --links, n = n->kids[0].get())
    if (!same_type(n->type, t)) return false;
  return true;
}

// Builds a left-associated chain whose every node has type `t`, adding a cast
// on the first operand when C's typing of the text would be narrower.
SymRef typed_chain(const std::vector<Term>& ops, const TypeRef& t, SymOp plus, SymOp minus) {
  auto build = [&](bool cast_first, bool typed_consts) {
    SymRef acc;
    for (size_t i = 0; i < ops.size(); ++i) {
      SymRef x = ops[i].e;
      if (x->kind == SymKind::Const && typed_consts && is_int(t)) x = sym_const(x->value, t);
      if (i == 0) {
        acc = cast_first ? coerce(x, t) : x;
        continue;
      }
      acc = make_bin_op(ops[i].neg ? minus : plus, acc, x, nullptr);
    }
    return acc;
  };
  for (int attempt = 0; attempt < 3; ++attempt) {
    SymRef r = build(attempt >= 1, attempt >= 2);
    if (chain_typed(r, t, ops.size() - 1)) return r;
  }
  // The explicit cast on every operand always types correctly.
  SymRef acc;
  for (const auto& o : ops) {
    SymRef x = coerce(o.e, t);
    acc = acc ? make_bin_op(o.neg ? minus : plus, acc, x, t) : x;
  }
  return acc;
}

SymRef simplify_node(const SymRef& e);

void collect_additive(const SymRef& e, bool neg, const TypeRef& t, std::vector<Term>& terms,
                      uint64_t& cst) {
  if (is_additive(e) && same_type(e->type, t)) {
    bool ptr = is_pointer(t);
    const auto& a = e->kids[0];
    const auto& b = e->kids[1];
    // In a pointer group only the pointer operand continues the group; the
    // integer operand counts elements.
    if (ptr) {
      if (is_pointer(decay(a->type))) {
        collect_additive(a, neg, t, terms, cst);
        collect_additive(b, e->op == SymOp::Sub ? !neg : neg, type_long(), terms, cst);
      } else {
        collect_additive(a, neg, type_long(), terms, cst);
        collect_additive(b, neg, t, terms, cst);
      }
      return;
    }
    TypeRef pa = decay(a->type), pb = decay(b->type);
    if (e->op == SymOp::Sub && is_pointer(pa) && is_pointer(pb)) {
      // Byte-pointer differences expand exactly, so `(p + n) - p` is `n`.
      if (pointee_size(pa) == 1 && pointee_size(pb) == 1 && is_int(t) && t->width == 64) {
        collect_additive(a, neg, pa, terms, cst);
        collect_additive(b, !neg, pb, terms, cst);
      } else {
        terms.push_back({neg, with_kids(e, {simplify_node(a), simplify_node(b)})});
      }
      return;
    }
    collect_additive(a, neg, t, terms, cst);
    collect_additive(b, e->op == SymOp::Sub ? !neg : neg, t, terms, cst);
    return;
  }
  SymRef s = simplify_node(e);
  if (s != e && is_additive(s) && same_type(s->type, t)) {
    collect_additive(s, neg, t, terms, cst);
    return;
  }
  if (s->kind == SymKind::Const && is_int(s->type)) {
    uint64_t v = static_cast<uint64_t>(s->value);
    cst = neg ? cst - v : cst + v;
    return;
  }
  terms.push_back({neg, s});
}

SymRef simplify_additive(const SymRef& e) {
  const TypeRef& t = e->type;
  const bool ptr = is_pointer(t);
  std::vector<Term> raw;
  uint64_t cst = 0;
  collect_additive(e, false, t, raw, cst);
  // Cancel x - x.
  std::vector<Term> terms;
  std::vector<bool> dead(raw.size(), false);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (dead[i]) continue;
    for (size_t j = i + 1; j < raw.size(); ++j) {
      if (dead[j] || raw[j].neg == raw[i].neg) continue;
      if (sym_equal(raw[i].e, raw[j].e)) {
        dead[i] = dead[j] = true;
        break;
      }
    }
  }
  for (size_t i = 0; i < raw.size(); ++i)
    if (!dead[i]) terms.push_back(raw[i]);

  int64_t c = ptr ? static_cast<int64_t>(cst) : signed_in(convert(cst, t), t);
  if (ptr) {
    auto base = std::find_if(terms.begin(), terms.end(),
                             [](const Term& x) { return is_pointer(decay(x.e->type)) && !x.neg; });
    if (base == terms.end()) return e;  // not a well-formed pointer sum
    Term b = *base;
    terms.erase(base);
    terms.insert(terms.begin(), b);
    SymRef acc = b.e;
    for (size_t i = 1; i < terms.size(); ++i)
      acc = make_bin_op(terms[i].neg ? SymOp::Sub : SymOp::Add, acc, terms[i].e, t);
    if (c > 0) acc = make_bin_op(SymOp::Add, acc, sym_const(c, literal_type(c)), t);
    if (c < 0) acc = make_bin_op(SymOp::Sub, acc, sym_const(-c, literal_type(-c)), t);
    if (!same_type(acc->type, t)) acc = with_type(acc, t);
    return acc;
  }

  std::vector<Term> ptrs;
  for (auto it = terms.begin(); it != terms.end();) {
    if (is_pointer(decay(it->e->type))) {
      ptrs.push_back(*it);
      it = terms.erase(it);
    } else {
      ++it;
    }
  }
  if (!ptrs.empty()) {
    if (ptrs.size() != 2 || ptrs[0].neg == ptrs[1].neg) {
      const SymRef& a = e->kids[0];
      const SymRef& b = e->kids[1];
      return with_kids(e, {simplify_node(a), simplify_node(b)});
    }
    const Term& pos = ptrs[0].neg ? ptrs[1] : ptrs[0];
    const Term& neg = ptrs[0].neg ? ptrs[0] : ptrs[1];
    terms.insert(terms.begin(), Term{false, make_bin_op(SymOp::Sub, pos.e, neg.e, type_long())});
  }
  if (terms.empty()) return sym_const(c, t);
  auto first_pos = std::find_if(terms.begin(), terms.end(), [](const Term& x) { return !x.neg; });
  std::vector<Term> ops;
  if (first_pos == terms.end()) {
    ops.push_back({false, sym_const(c, literal_type(c))});
    for (const auto& x : terms) ops.push_back(x);
  } else {
    ops.push_back(*first_pos);
    for (auto it = terms.begin(); it != terms.end(); ++it)
      if (it != first_pos) ops.push_back(*it);
    if (c > 0) ops.push_back({false, sym_const(c, literal_type(c))});
    if (c < 0 && c != std::numeric_limits<int64_t>::min())
      ops.push_back({true, sym_const(-c, literal_type(-c))});
    if (c == std::numeric_limits<int64_t>::min()) ops.push_back({false, sym_const(c, type_long())});
  }
  if (ops.size() == 1) return coerce(ops[0].e, t);
  return typed_chain(ops, t, SymOp::Add, SymOp::Sub);
}

void collect_mul(const SymRef& e, const TypeRef& t, std::vector<SymRef>& terms, uint64_t& cst) {
  if (e->kind == SymKind::BinOp && e->op == SymOp::Mul && same_type(e->type, t)) {
    collect_mul(e->kids[0], t, terms, cst);
    collect_mul(e->kids[1], t, terms, cst);
    return;
  }
  SymRef s = simplify_node(e);
  if (s != e && s->kind == SymKind::BinOp && s->op == SymOp::Mul && same_type(s->type, t)) {
    collect_mul(s, t, terms, cst);
    return;
  }
  if (s->kind == SymKind::Const && is_int(s->type)) {
    cst *= convert(static_cast<uint64_t>(s->value), t);
    return;
  }
  terms.push_back(s);
}

SymRef simplify_mul(const SymRef& e) {
  const TypeRef& t = e->type;
  std::vector<SymRef> terms;
  uint64_t cst = 1;
  collect_mul(e, t, terms, cst);
  int64_t c = signed_in(convert(cst, t), t);
  if (c == 0 || terms.empty()) return sym_const(c, t);
  std::vector<Term> ops;
  if (c != 1) ops.push_back({false, sym_const(c, literal_type(c))});
  for (const auto& x : terms) ops.push_back({false, x});
  if (ops.size() == 1) return coerce(ops[0].e, t);
  return typed_chain(ops, t, SymOp::Mul, SymOp::Mul);
}

BinKind to_bin(SymOp op) {
  switch (op) {
    case SymOp::Add: return BinKind::Add;
    case SymOp::Sub: return BinKind::Sub;
    case SymOp::Mul: return BinKind::Mul;
    case SymOp::Div: return BinKind::Div;
    case SymOp::Rem: return BinKind::Rem;
    case SymOp::Shl: return BinKind::Shl;
    case SymOp::Shr: return BinKind::Shr;
    case SymOp::And: return BinKind::And;
    case SymOp::Or: return BinKind::Or;
    case SymOp::Xor: return BinKind::Xor;
    default: return BinKind::Add;
  }
}

uint64_t bin_scale(const SymExpr& e) {
  if (is_pointer(e.type)) return pointee_size(e.type);
  TypeRef a = decay(e.kids[0]->type);
  if (is_pointer(a) && is_pointer(decay(e.kids[1]->type))) return pointee_size(a);
  return 1;
}

bool is_const(const SymRef& e, int64_t v) { return e->kind == SymKind::Const && e->value == v; }

SymRef simplify_node(const SymRef& e) {
  switch (e->kind) {
    case SymKind::Var:
    case SymKind::Const:
    case SymKind::Str:
      return e;
    case SymKind::Cast: {
      SymRef k = simplify_node(e->kids[0]);
      if (k->kind == SymKind::Const && is_int(e->type) && is_int(k->type))
        return sym_const(static_cast<int64_t>(convert(static_cast<uint64_t>(k->value), e->type)), e->type);
      if (same_type(k->type, e->type) && !is_array(k->type)) return k;
      if (k->kind == SymKind::Cast && is_int(e->type) && is_int(k->type) && is_int(k->kids[0]->type) &&
          k->type->width >= k->kids[0]->type->width && k->type->width <= e->type->width &&
          k->type->is_signed == k->kids[0]->type->is_signed)
        return simplify_node(sym_cast(e->type, k->kids[0]));
      return k == e->kids[0] ? e : with_kids(e, {k});
    }
    case SymKind::BinOp: {
      if (is_additive(e) && (is_int(e->type) || is_pointer(e->type))) return simplify_additive(e);
      if (e->op == SymOp::Mul && is_int(e->type)) return simplify_mul(e);
      SymRef a = simplify_node(e->kids[0]);
      SymRef b = simplify_node(e->kids[1]);
      if (e->op == SymOp::LAnd || e->op == SymOp::LOr) {
        bool land = e->op == SymOp::LAnd;
        if (a->kind == SymKind::Const) {
          if ((a->value != 0) != land) return sym_const(land ? 0 : 1, type_int());
          if (b->kind == SymKind::Const) return sym_const(b->value != 0 ? 1 : 0, type_int());
        }
      } else if (a->kind == SymKind::Const && b->kind == SymKind::Const && is_int(a->type) &&
                 is_int(b->type) && is_int(e->type)) {
        ArithResult r = arith_bin(to_bin(e->op), static_cast<uint64_t>(a->value), a->type,
                                  static_cast<uint64_t>(b->value), b->type, e->type, 1);
        if (!r.div_by_zero) return sym_const(static_cast<int64_t>(r.bits), e->type);
      } else if (is_int(e->type)) {
        switch (e->op) {
          case SymOp::Div:
            if (is_const(b, 1)) return simplify_node(coerce(a, e->type));
            break;
          case SymOp::Shl:
          case SymOp::Shr:
          case SymOp::Or:
          case SymOp::Xor:
            if (is_const(b, 0)) return simplify_node(coerce(a, e->type));
            break;
          case SymOp::And:
            if (is_const(b, 0) || is_const(a, 0)) return sym_const(0, e->type);
            break;
          default:
            break;
        }
      }
      if (a == e->kids[0] && b == e->kids[1]) return e;
      return with_kids(e, {a, b});
    }
    case SymKind::Cmp: {
      SymRef a = simplify_node(e->kids[0]);
      SymRef b = simplify_node(e->kids[1]);
      if (a->kind == SymKind::Const && b->kind == SymKind::Const) {
        bool r = arith_cmp(e->cmp, static_cast<uint64_t>(a->value), static_cast<uint64_t>(b->value),
                           compare_type(a->type, b->type));
        return sym_const(r ? 1 : 0, type_int());
      }
      if (a == e->kids[0] && b == e->kids[1]) return e;
      return with_kids(e, {a, b});
    }
    case SymKind::Deref: {
      SymRef k = simplify_node(e->kids[0]);
      if (k->kind == SymKind::AddrOf) return k->kids[0];
      return k == e->kids[0] ? e : with_kids(e, {k});
    }
    case SymKind::AddrOf: {
      SymRef k = simplify_node(e->kids[0]);
      if (k->kind == SymKind::Deref) return k->kids[0];
      return k == e->kids[0] ? e : with_kids(e, {k});
    }
    default: {
      std::vector<SymRef> kids;
      bool changed = false;
      for (const auto& k : e->kids) {
        kids.push_back(simplify_node(k));
        changed |= kids.back() != k;
      }
      return changed ? with_kids(e, std::move(kids)) : e;
    }
  }
}

}  // namespace

SymRef simplify(const SymRef& e) {
  SymRef cur = e;
  for (int i = 0; i < 4; ++i) {
    SymRef next = simplify_node(cur);
    if (next == cur || sym_equal(next, cur)) return next;
    cur = next;
  }
  return cur;
}

// ---- rendering ----

namespace {

int op_prec(SymOp op) {
  switch (op) {
    case SymOp::Mul:
    case SymOp::Div:
    case SymOp::Rem: return 13;
    case SymOp::Add:
    case SymOp::Sub: return 12;
    case SymOp::Shl:
    case SymOp::Shr: return 11;
    case SymOp::And: return 8;
    case SymOp::Xor: return 7;
    case SymOp::Or: return 6;
    case SymOp::LAnd: return 5;
    case SymOp::LOr: return 4;
  }
  return 0;
}

const char* op_text(SymOp op) {
  switch (op) {
    case SymOp::Add: return "+";
    case SymOp::Sub: return "-";
    case SymOp::Mul: return "*";
    case SymOp::Div: return "/";
    case SymOp::Rem: return "%";
    case SymOp::Shl: return "<<";
    case SymOp::Shr: return ">>";
    case SymOp::And: return "&";
    case SymOp::Or: return "|";
    case SymOp::Xor: return "^";
    case SymOp::LAnd: return "&&";
    case SymOp::LOr: return "||";
  }
  return "?";
}

int prec(const SymExpr& e) {
  switch (e.kind) {
    case SymKind::Var:
    case SymKind::Str:
      return 16;
    case SymKind::Const:
      return e.value < 0 ? 14 : 16;
    case SymKind::Field:
    case SymKind::Index:
    case SymKind::Call:
      return 15;
    case SymKind::Deref:
    case SymKind::AddrOf:
    case SymKind::Cast:
      return 14;
    case SymKind::BinOp:
      return op_prec(e.op);
    case SymKind::Cmp:
      return (e.cmp == CmpKind::Eq || e.cmp == CmpKind::Ne) ? 9 : 10;
  }
  return 0;
}

std::string const_text(const SymExpr& e) {
  const TypeRef& t = e.type;
  if (!is_int(t)) return std::to_string(e.value);
  if (!t->is_signed) {
    uint64_t u = static_cast<uint64_t>(e.value);
    if (t->width == 64) return std::to_string(u) + "UL";
    if (t->width == 32) return std::to_string(u) + "U";
    return std::to_string(u);
  }
  // The most negative values have no literal spelling.
  if (t->width == 32 && e.value == std::numeric_limits<int32_t>::min()) return "(-2147483647 - 1)";
  if (t->width == 64 && e.value == std::numeric_limits<int64_t>::min())
    return "(-9223372036854775807L - 1)";
  std::string s = std::to_string(e.value);
  bool fits_int = e.value >= std::numeric_limits<int32_t>::min() &&
                  e.value <= std::numeric_limits<int32_t>::max();
  if (t->width == 64 && fits_int) return s + "L";
  return s;
}

std::string str_text(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default:
        if (c < 0x20 || c >= 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\%03o", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "\"";
}

void render_to(const SymExpr& e, std::string& out);

void render_wrapped(const SymExpr& e, bool parens, std::string& out) {
  if (parens) out += "(";
  render_to(e, out);
  if (parens) out += ")";
}

void render_to(const SymExpr& e, std::string& out) {
  switch (e.kind) {
    case SymKind::Var:
      out += e.name;
      return;
    case SymKind::Const:
      out += const_text(e);
      return;
    case SymKind::Str:
      out += str_text(e.str);
      return;
    case SymKind::BinOp:
    case SymKind::Cmp: {
      int p = prec(e);
      render_wrapped(*e.kids[0], prec(*e.kids[0]) < p, out);
      out += " ";
      out += e.kind == SymKind::BinOp ? op_text(e.op) : cmp_symbol(e.cmp);
      out += " ";
      render_wrapped(*e.kids[1], prec(*e.kids[1]) <= p, out);
      return;
    }
    case SymKind::Deref:
      out += "*";
      render_wrapped(*e.kids[0], prec(*e.kids[0]) < 14, out);
      return;
    case SymKind::AddrOf:
      out += "&";
      render_wrapped(*e.kids[0], prec(*e.kids[0]) < 14, out);
      return;
    case SymKind::Cast:
      out += "(" + type_name(e.type) + ")";
      render_wrapped(*e.kids[0], prec(*e.kids[0]) < 14, out);
      return;
    case SymKind::Field:
      render_wrapped(*e.kids[0], prec(*e.kids[0]) < 15, out);
      out += e.via_pointer ? "->" : ".";
      out += e.name;
      return;
    case SymKind::Index:
      render_wrapped(*e.kids[0], prec(*e.kids[0]) < 15, out);
      out += "[";
      render_to(*e.kids[1], out);
      out += "]";
      return;
    case SymKind::Call:
      out += e.name + "(";
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        render_to(*e.kids[i], out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string render(const SymRef& e) {
  std::string out;
  render_to(*e, out);
  return out;
}

// ---- evaluation ----

std::optional<uint64_t> MapEnv::var(const SymExpr& v) const {
  auto it = values.find(v.name);
  if (it == values.end()) return std::nullopt;
  return convert(it->second, v.type);
}

namespace {

std::optional<uint64_t> address(const SymRef& e, const EvalEnv& env);

std::optional<uint64_t> load_or_decay(uint64_t addr, const TypeRef& t, const EvalEnv& env) {
  if (is_array(t) || is_struct(t)) return addr;
  return env.load(addr, t);
}

std::optional<uint64_t> address(const SymRef& e, const EvalEnv& env) {
  switch (e->kind) {
    case SymKind::Var:
      return env.var_address(*e);
    case SymKind::Deref:
      return eval(e->kids[0], env);
    case SymKind::Field: {
      const SymRef& b = e->kids[0];
      auto base = e->via_pointer ? eval(b, env) : address(b, env);
      TypeRef st = struct_of(b->type, e->via_pointer);
      if (!base || !st) return std::nullopt;
      const Field* f = st->def->find(e->name);
      if (!f) return std::nullopt;
      return *base + f->offset;
    }
    case SymKind::Index: {
      auto base = eval(e->kids[0], env);
      auto idx = eval(e->kids[1], env);
      if (!base || !idx) return std::nullopt;
      return *base + *idx * size_of(e->type);
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<uint64_t> eval(const SymRef& e, const EvalEnv& env) {
  switch (e->kind) {
    case SymKind::Const:
      return convert(static_cast<uint64_t>(e->value), e->type);
    case SymKind::Var:
      if (is_array(e->type)) return env.var_address(*e);
      return env.var(*e);
    case SymKind::Str:
      return std::nullopt;
    case SymKind::BinOp: {
      auto a = eval(e->kids[0], env);
      if (!a) return std::nullopt;
      if (e->op == SymOp::LAnd || e->op == SymOp::LOr) {
        bool av = *a != 0;
        if (e->op == SymOp::LAnd && !av) return 0;
        if (e->op == SymOp::LOr && av) return 1;
        auto b = eval(e->kids[1], env);
        if (!b) return std::nullopt;
        return *b != 0 ? 1 : 0;
      }
      auto b = eval(e->kids[1], env);
      if (!b) return std::nullopt;
      return arith_bin(to_bin(e->op), *a, e->kids[0]->type, *b, e->kids[1]->type, e->type,
                       bin_scale(*e))
          .bits;
    }
    case SymKind::Cmp: {
      auto a = eval(e->kids[0], env);
      auto b = eval(e->kids[1], env);
      if (!a || !b) return std::nullopt;
      return arith_cmp(e->cmp, *a, *b, compare_type(e->kids[0]->type, e->kids[1]->type)) ? 1 : 0;
    }
    case SymKind::Cast: {
      auto a = eval(e->kids[0], env);
      if (!a) return std::nullopt;
      return convert(*a, e->type);
    }
    case SymKind::AddrOf:
      return address(e->kids[0], env);
    case SymKind::Deref:
    case SymKind::Field:
    case SymKind::Index: {
      auto addr = address(e, env);
      if (!addr) return std::nullopt;
      return load_or_decay(*addr, e->type, env);
    }
    case SymKind::Call:
      return env.call(*e);
  }
  return std::nullopt;
}

}  // namespace patchsmith
