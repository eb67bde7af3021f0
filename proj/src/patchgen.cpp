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


#include "patchsmith/patchgen.hpp"

#include <algorithm>
#include <limits>

#include "patchsmith/frontend.hpp"

namespace patchsmith {

const char* patch_kind_name(PatchKind k) {
  return k == PatchKind::CheckAndError ? "check_and_error" : "repair_cast";
}

namespace {

bool narrow_int(const TypeRef& t) { return is_int(t) && t->width < 64; }

SymRef strip_pointer_casts(SymRef e) {
  while (e->kind == SymKind::Cast && is_pointer(e->type) && is_pointer(decay(e->kids[0]->type))) e = e->kids[0];
  return e;
}

SymRef lor(SymRef a, SymRef b) { return make_bin_op(SymOp::LOr, std::move(a), std::move(b), type_int()); }
SymRef land(SymRef a, SymRef b) { return make_bin_op(SymOp::LAnd, std::move(a), std::move(b), type_int()); }

SymRef long_const(int64_t v) { return sym_const(v, type_long()); }

bool nonneg_const(const SymRef& e) { return e->kind == SymKind::Const && e->value >= 0; }

}  // namespace

SymRef widen(const SymRef& e) {
  switch (e->kind) {
    case SymKind::Var:
    case SymKind::Field:
    case SymKind::Index:
    case SymKind::Deref:
    case SymKind::Call:
      return narrow_int(e->type) ? sym_cast(type_long(), e) : e;
    case SymKind::Cast:
      // A widening cast of narrow arithmetic: widen the arithmetic instead.
      if (is_int(e->type) && !narrow_int(e->type) && narrow_int(e->kids[0]->type)) {
        SymRef k = widen(e->kids[0]);
        return same_type(k->type, e->type) ? k : sym_cast(e->type, k);
      }
      return narrow_int(e->type) ? sym_cast(type_long(), e) : e;
    case SymKind::BinOp:
      if (is_pointer(e->type)) return e;
      return retype(make_bin_op(e->op, widen(e->kids[0]), widen(e->kids[1]), nullptr));
    case SymKind::Cmp:
      return make_cmp_op(e->cmp, widen(e->kids[0]), widen(e->kids[1]));
    default:
      return e;
  }
}

SymRef byte_offset(const SymRef& e, const SymRef& base) {
  SymRef x = strip_pointer_casts(e);
  if (sym_equal(x, strip_pointer_casts(base))) return long_const(0);
  if (x->kind == SymKind::BinOp && is_pointer(x->type) && (x->op == SymOp::Add || x->op == SymOp::Sub)) {
    bool ptr_left = is_pointer(decay(x->kids[0]->type));
    if (!ptr_left && x->op == SymOp::Sub) return nullptr;
    SymRef r = byte_offset(x->kids[ptr_left ? 0 : 1], base);
    if (!r) return nullptr;
    SymRef n = x->kids[ptr_left ? 1 : 0];
    uint64_t sz = pointee_size(x->type);
    if (sz != 1) n = make_bin_op(SymOp::Mul, n, long_const(static_cast<int64_t>(sz)), nullptr);
    return make_bin_op(x->op, r, n, nullptr);
  }
  if (x->kind == SymKind::AddrOf && x->kids[0]->kind == SymKind::Index) {
    const SymRef& ix = x->kids[0];
    SymRef r = byte_offset(ix->kids[0], base);
    if (!r) return nullptr;
    uint64_t sz = size_of(ix->type);
    SymRef n = sz == 1 ? ix->kids[1] : make_bin_op(SymOp::Mul, ix->kids[1], long_const(static_cast<int64_t>(sz)), nullptr);
    return make_bin_op(SymOp::Add, r, n, nullptr);
  }
  return nullptr;
}

SymRef range_predicate(const SymRef& lo, const SymRef& hi, const SymRef& base, const SymRef& size) {
  SymRef hi_off = byte_offset(hi, base), lo_off = byte_offset(lo, base);
  if (!hi_off || !lo_off) return nullptr;
  hi_off = simplify(widen(simplify(hi_off)));
  lo_off = simplify(widen(simplify(lo_off)));
  SymRef pred = make_cmp_op(CmpKind::Gt, hi_off, simplify(size));
  if (!nonneg_const(lo_off)) pred = lor(pred, make_cmp_op(CmpKind::Lt, lo_off, long_const(0)));
  return pred;
}

SymRef cloned_predicate(const ClonedRange& c) {
  SymRef end = sym_var(c.end, c.ptr_type, c.func);
  SymRef start = sym_var(c.start, c.ptr_type, c.func);
  SymRef base = c.alloc.base;
  SymRef limit;
  if (pointee_size(c.ptr_type) == 1 && is_pointer(base->type) && pointee_size(base->type) == 1) {
    limit = simplify(make_bin_op(SymOp::Add, base, c.alloc.size, nullptr));
  } else {
    limit = sym_cast(c.ptr_type, make_bin_op(SymOp::Add, sym_cast(pointer_to(type_char()), base), c.alloc.size, nullptr));
    base = sym_cast(c.ptr_type, base);
  }
  return lor(make_cmp_op(CmpKind::Gt, end, limit), make_cmp_op(CmpKind::Lt, start, base));
}

SymRef overflow_predicate(SymOp op, const SymRef& a, const SymRef& b, const TypeRef& type) {
  if (!is_int(type)) throw Abort("predicate", "overflow in a non-integer operation");
  if (op != SymOp::Add && op != SymOp::Sub && op != SymOp::Mul)
    throw Abort("predicate", "no overflow check for this operator");
  int w = type->width;
  bool sgn = type->is_signed;
  if (w < 64) {
    auto wide = [](const SymRef& x) { return narrow_int(x->type) ? sym_cast(type_long(), x) : x; };
    SymRef exact = simplify(retype(make_bin_op(op, widen(wide(a)), widen(wide(b)), nullptr)));
    int64_t max = sgn ? (int64_t{1} << (w - 1)) - 1 : (int64_t{1} << w) - 1;
    int64_t min = sgn ? -(int64_t{1} << (w - 1)) : 0;
    if (!sgn && op == SymOp::Sub) return make_cmp_op(CmpKind::Lt, simplify(widen(wide(a))), simplify(widen(wide(b))));
    if (!sgn && op == SymOp::Mul && w > 31) {
      // The product of two 32-bit unsigned values needs all 64 bits.
      TypeRef u = int_type(64, false);
      SymRef prod = simplify(make_bin_op(SymOp::Mul, sym_cast(u, a), sym_cast(u, b), u));
      return make_cmp_op(CmpKind::Gt, prod, sym_const(max, u));
    }
    SymRef upper = make_cmp_op(CmpKind::Gt, exact, long_const(max));
    if (!sgn) return upper;
    return lor(upper, make_cmp_op(CmpKind::Lt, exact, long_const(min)));
  }
  TypeRef t = type;
  SymRef zero = sym_const(0, t);
  if (!sgn) {
    SymRef max = sym_const(-1, t);
    // A constant operand folds into the bound.
    SymRef x = a, k = b;
    if (x->kind == SymKind::Const && k->kind != SymKind::Const && op != SymOp::Sub) std::swap(x, k);
    if (k->kind == SymKind::Const && (op == SymOp::Add || (op == SymOp::Mul && k->value != 0))) {
      uint64_t kv = static_cast<uint64_t>(k->value);
      uint64_t bound = op == SymOp::Add ? UINT64_MAX - kv : UINT64_MAX / kv;
      return make_cmp_op(CmpKind::Gt, x, sym_const(static_cast<int64_t>(bound), t));
    }
    switch (op) {
      case SymOp::Add: return make_cmp_op(CmpKind::Gt, a, make_bin_op(SymOp::Sub, max, b, t));
      case SymOp::Sub: return make_cmp_op(CmpKind::Lt, a, b);
      default:
        return land(make_cmp_op(CmpKind::Ne, b, zero), make_cmp_op(CmpKind::Gt, a, make_bin_op(SymOp::Div, max, b, t)));
    }
  }
  SymRef max = sym_const(std::numeric_limits<int64_t>::max(), t);
  SymRef min = sym_const(std::numeric_limits<int64_t>::min(), t);
  switch (op) {
    case SymOp::Add:
      return lor(land(make_cmp_op(CmpKind::Gt, b, zero), make_cmp_op(CmpKind::Gt, a, make_bin_op(SymOp::Sub, max, b, t))),
                 land(make_cmp_op(CmpKind::Lt, b, zero), make_cmp_op(CmpKind::Lt, a, make_bin_op(SymOp::Sub, min, b, t))));
    case SymOp::Sub:
      return lor(land(make_cmp_op(CmpKind::Lt, b, zero), make_cmp_op(CmpKind::Gt, a, make_bin_op(SymOp::Add, max, b, t))),
                 land(make_cmp_op(CmpKind::Gt, b, zero), make_cmp_op(CmpKind::Lt, a, make_bin_op(SymOp::Add, min, b, t))));
    default:
      throw Abort("predicate", "no overflow check for signed 64-bit multiplication");
  }
}

// ---- error handlers ----

namespace {

bool constant_expr(const Expr* e) {
  if (!e) return false;
  if (e->kind == ExprKind::IntLit) return true;
  if (e->kind == ExprKind::Unary && e->op == "-") return constant_expr(e->kids[0].get());
  if (e->kind == ExprKind::Cast) return constant_expr(e->kids[0].get());
  return false;
}

std::optional<int64_t> constant_value(const Expr* e) {
  if (!e) return std::nullopt;
  if (e->kind == ExprKind::IntLit) return e->value;
  if (e->kind == ExprKind::Unary && e->op == "-") {
    auto v = constant_value(e->kids[0].get());
    if (v) return -*v;
  }
  if (e->kind == ExprKind::Cast) return constant_value(e->kids[0].get());
  return std::nullopt;
}

// Statements that follow `s` in its enclosing block.
std::vector<const Stmt*> following(const Program& p, const Stmt& s) {
  std::vector<const Stmt*> out;
  const Stmt* parent = s.parent >= 0 ? p.stmt(s.parent) : nullptr;
  if (!parent || parent->kind != StmtKind::Block) return out;
  bool after = false;
  for (const auto& b : parent->body) {
    if (after) out.push_back(b.get());
    if (b.get() == &s) after = true;
  }
  return out;
}

bool jump_free(const Stmt* s) {
  if (!s) return true;
  switch (s->kind) {
    case StmtKind::Return:
    case StmtKind::Goto:
    case StmtKind::Break:
    case StmtKind::Continue:
    case StmtKind::Label:
      return false;
    default:
      break;
  }
  for (const auto& b : s->body)
    if (!jump_free(b.get())) return false;
  return jump_free(s->init.get()) && jump_free(s->then_stmt.get()) && jump_free(s->else_stmt.get());
}

// The code at a label ends in a constant return. Cleanup on the way may be
// conditional.
bool label_returns_constant(const Program& p, const Stmt& label) {
  std::vector<const Stmt*> seq;
  if (label.then_stmt) seq.push_back(label.then_stmt.get());
  for (const Stmt* s : following(p, label)) seq.push_back(s);
  for (const Stmt* s : seq) {
    switch (s->kind) {
      case StmtKind::Return: return !s->expr || constant_expr(s->expr.get());
      case StmtKind::ExprStmt:
      case StmtKind::Decl:
      case StmtKind::Empty:
        continue;
      case StmtKind::If:
        if (jump_free(s)) continue;
        return false;
      case StmtKind::Label:
        if (s->then_stmt && s->then_stmt->kind == StmtKind::Return)
          return !s->then_stmt->expr || constant_expr(s->then_stmt->expr.get());
        continue;
      default:
        return false;
    }
  }
  return false;
}

// Inside the branch of an if, directly or through blocks.
bool on_checking_branch(const Program& p, const Stmt& s) {
  const Stmt* cur = &s;
  while (cur->parent >= 0) {
    const Stmt* par = p.stmt(cur->parent);
    if (par->kind == StmtKind::If) return true;
    if (par->kind != StmtKind::Block) return false;
    cur = par;
  }
  return false;
}

}  // namespace

std::optional<ErrorHandler> find_error_handler(const Program& p, const Function& f) {
  if (!f.decl) return std::nullopt;
  std::vector<const Stmt*> stmts;
  walk_stmts(f.decl->body, [&](const Stmt& s) { stmts.push_back(&s); });
  for (const Stmt* g : stmts) {
    if (g->kind != StmtKind::Goto) continue;
    for (const Stmt* l : stmts) {
      if (l->kind == StmtKind::Label && l->label == g->label && label_returns_constant(p, *l)) {
        ErrorHandler h;
        h.kind = ErrorHandler::Kind::GotoLabel;
        h.label = g->label;
        h.statement = "goto " + g->label + ";";
        h.exemplar = g->span;
        return h;
      }
    }
  }
  for (const Stmt* r : stmts) {
    if (r->kind != StmtKind::Return || !on_checking_branch(p, *r)) continue;
    auto v = constant_value(r->expr.get());
    if (!v) continue;
    bool error = is_pointer(f.ret) ? *v == 0 : (is_int(f.ret) && *v < 0);
    if (!error) continue;
    ErrorHandler h;
    h.kind = ErrorHandler::Kind::ReturnError;
    h.statement = p.tu->text(r->span);
    h.exemplar = r->span;
    return h;
  }
  return std::nullopt;
}

// ---- synthesis ----

size_t Patch::patched_check_offset() const {
  long shift = 0;
  for (int i = 0; i < check_edit; ++i) {
    const Edit& e = edits[static_cast<size_t>(i)];
    shift += static_cast<long>(e.replacement.size()) - static_cast<long>(e.span.end - e.span.begin);
  }
  return static_cast<size_t>(static_cast<long>(edits[static_cast<size_t>(check_edit)].span.begin) + shift) +
         check_offset;
}

namespace {

size_t line_start(const std::string& src, size_t offset) {
  size_t ls = offset == 0 ? std::string::npos : src.rfind('\n', offset - 1);
  return ls == std::string::npos ? 0 : ls + 1;
}

SourceSpan insertion_at(size_t offset) {
  SourceSpan s;
  s.begin = s.end = offset;
  return s;
}

std::string indent_unit(const Program& p, const Function& f) {
  const Stmt& body = *f.decl->body;
  if (!body.body.empty()) {
    std::string in = line_indent(p.source(), body.body.front()->span.begin);
    if (!in.empty()) return in;
  }
  return "\t";
}

// Source position where each local of `f` is declared.
std::map<std::string, size_t> declaration_points(const Function& f) {
  std::map<std::string, size_t> out;
  walk_stmts(f.decl->body, [&](const Stmt& s) {
    if (s.kind == StmtKind::Decl)
      for (const auto& d : s.decls) out.try_emplace(d.name, d.span.begin);
    if (s.kind == StmtKind::For && s.init && s.init->kind == StmtKind::Decl)
      for (const auto& d : s.init->decls) out.try_emplace(d.name, std::numeric_limits<size_t>::max());
  });
  return out;
}

}  // namespace

Patch synthesize_check_and_error(const Program& p, const SymRef& pred, const ErrorHandler& handler,
                                 const std::string& func, int stmt, const CloneEdits& clone) {
  const Function* f = p.find(func);
  const Stmt* s = p.stmt(stmt);
  if (!f || !f->decl || !s || s->func != func) throw Abort("synthesize", "placement statement is not in " + func);
  const Stmt* parent = s->parent >= 0 ? p.stmt(s->parent) : nullptr;
  if (!parent || parent->kind != StmtKind::Block)
    throw Abort("synthesize", "placement statement at line " + std::to_string(s->span.line) + " is not in a block");
  const std::string& src = p.source();
  size_t ls = line_start(src, s->span.begin);
  std::string indent = line_indent(src, s->span.begin);
  if (ls + indent.size() != s->span.begin)
    throw Abort("synthesize", "placement statement at line " + std::to_string(s->span.line) + " does not start a line");

  // The predicate may only mention variables declared before the placement.
  auto decls = declaration_points(*f);
  for (const auto& v : sym_vars(pred)) {
    if (f->is_param(v)) continue;
    auto it = decls.find(v);
    if (it != decls.end()) {
      if (it->second > s->span.begin)
        throw Abort("synthesize", v + " is not declared before line " + std::to_string(s->span.line));
      continue;
    }
    if (!p.find_global(v) && !clone.vars.count(v)) throw Abort("synthesize", v + " is not in scope in " + func);
  }

  Patch out;
  out.kind = PatchKind::CheckAndError;
  out.predicate = pred;
  out.func = func;
  out.placement_stmt = stmt;
  out.handler = handler.statement;
  if (!clone.defs.empty()) {
    std::string text;
    for (const auto& d : clone.defs) text += d + "\n";
    out.edits.push_back({insertion_at(line_start(src, f->decl->span.begin)), text});
  }
  std::string text;
  size_t from = 0;
  const std::string& prelude = clone.prelude;
  while (from < prelude.size()) {
    size_t nl = prelude.find('\n', from);
    if (nl == std::string::npos) nl = prelude.size();
    text += indent + prelude.substr(from, nl - from) + "\n";
    from = nl + 1;
  }
  out.check_offset = text.size() + indent.size();
  text += indent + "if (" + render(pred) + ")\n" + indent + indent_unit(p, *f) + handler.statement + "\n";
  out.check_edit = static_cast<int>(out.edits.size());
  out.edits.push_back({insertion_at(ls), text});
  std::sort(out.edits.begin(), out.edits.end(),
            [](const Edit& a, const Edit& b) { return a.span.begin < b.span.begin; });
  if (out.edits.size() == 2 && out.edits[0].span.begin == out.edits[1].span.begin)
    throw Abort("synthesize", "cloned functions and the check share an insertion point");
  for (size_t i = 0; i < out.edits.size(); ++i)
    if (out.edits[i].replacement == text) out.check_edit = static_cast<int>(i);
  return out;
}

std::optional<Patch> synthesize_repair_cast(const Program& p, const VulnReport& v) {
  if (v.cls != VulnClass::IntegerOverflow) return std::nullopt;
  const Instruction* op = p.inst(v.point_uid);
  InstLoc loc = p.locate(v.point_uid);
  if (!op || op->op != Opcode::BinOp || !loc.func || !is_int(op->type)) return std::nullopt;
  const Function& f = *loc.func;

  // Follow the result through conversions to the store receiving it.
  int value = op->result;
  TypeRef dest;
  for (int hops = 0; hops < 4 && !dest; ++hops) {
    const Instruction* use = nullptr;
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts) {
        bool uses = (in.a.is_value() && in.a.id == value) || (in.b.is_value() && in.b.id == value);
        if (uses && !use) use = &in;
      }
    if (!use) return std::nullopt;
    if (use->op == Opcode::BinOp && use->bin == BinKind::Cast) {
      value = use->result;
      continue;
    }
    if (use->op != Opcode::Store || !use->b.is_value() || use->b.id != value) return std::nullopt;
    dest = use->var.empty() ? use->type : f.var_type(use->var);
    if (!dest && !use->var.empty()) {
      if (const GlobalVar* g = p.find_global(use->var)) dest = g->type;
    }
  }
  if (!is_int(dest) || dest->width <= op->type->width) return std::nullopt;

  // Cast the left operand unless it is a constant.
  const Operand* pick = op->a.is_const() ? &op->b : &op->a;
  if (!pick->is_value()) return std::nullopt;
  const Instruction* def = f.def_of(pick->id);
  if (!def || def->span.empty()) return std::nullopt;
  std::string text = p.tu->text(def->span);
  bool postfix = def->op == Opcode::Load || def->op == Opcode::Call || def->op == Opcode::GetElementField ||
                 def->op == Opcode::GetElementIndex;
  std::string repl = "(" + type_name(dest) + ")" + (postfix ? text : "(" + text + ")");

  Patch out;
  out.kind = PatchKind::RepairCast;
  out.func = f.name;
  out.placement_stmt = op->stmt;
  out.edits.push_back({def->span, repl});
  out.repair_line = op->span.line;
  const Stmt* s = p.stmt(op->stmt);
  if (s) {
    std::string before = p.tu->text(s->span);
    size_t at = def->span.begin - s->span.begin;
    out.repair_text = before.substr(0, at) + repl + before.substr(at + text.size());
  }
  return out;
}

// ---- validation ----

namespace {

struct Outcome {
  std::string summary;
  ExecResult result;
};

Outcome run(const Program& p, const TriggerInput& in, bool trace) {
  Outcome o;
  try {
    ExecOptions opts;
    opts.record_trace = trace;
    o.result = execute(p, in, opts);
    const ExecResult& r = o.result;
    switch (r.status) {
      case ExecResult::Status::Exited:
        o.summary = "exit " + std::to_string(r.exit_code) + " output \"" + r.out + "\"";
        break;
      case ExecResult::Status::Faulted:
        o.summary = std::string("fault ") + fault_kind_name(r.fault.kind) + " at line " +
                    std::to_string(p.inst(r.fault.inst_uid) ? p.inst(r.fault.inst_uid)->span.line : 0);
        break;
      case ExecResult::Status::Error:
        o.summary = "error " + r.error;
        break;
    }
  } catch (const Abort& a) {
    o.result.status = ExecResult::Status::Error;
    o.summary = "abort " + std::string(a.what());
  }
  return o;
}

__int128 signed_value(uint64_t bits, const TypeRef& t) {
  uint64_t n = normalize_int(bits, t->width, t->is_signed);
  return t->is_signed ? static_cast<__int128>(static_cast<int64_t>(n)) : static_cast<__int128>(n);
}

std::optional<uint64_t> last_value(const ExecResult& r, int uid) {
  for (auto it = r.trace.rbegin(); it != r.trace.rend(); ++it)
    if (it->uid == uid) return it->value;
  return std::nullopt;
}

}  // namespace

ValidationVerdict validate_patch(const Program& p, const Patch& patch, const TriggerInput& trigger,
                                 const std::vector<TriggerInput>& benign) {
  ValidationVerdict v;
  auto fail = [&](const std::string& clause, const std::string& detail) {
    v.ok = false;
    v.clause = clause;
    v.detail = detail;
    return v;
  };
  std::shared_ptr<Program> q;
  try {
    q = parse_program(patch.apply(p.source()), p.tu->file);
  } catch (const Error& e) {
    return fail("reparse", e.what());
  }
  ValidationReport rep = validate_program(*q);
  if (!rep.ok()) return fail("reparse", rep.violations.front());

  Outcome t = run(*q, trigger, true);
  if (t.result.status != ExecResult::Status::Exited) return fail("trigger", "patched build: " + t.summary);
  if (patch.kind == PatchKind::CheckAndError) {
    size_t at = patch.patched_check_offset();
    const Stmt* check = nullptr;
    for (const Stmt* s : q->tu->stmts)
      if (s->kind == StmtKind::If && s->span.begin == at) check = s;
    if (!check || !check->then_stmt) return fail("trigger", "inserted check not found in the patched source");
    bool handled = false;
    for (int uid = 0; uid < static_cast<int>(t.result.executed.size()); ++uid)
      if (t.result.ran(uid) && q->inst(uid) && q->inst(uid)->stmt == check->then_stmt->id) handled = true;
    if (!handled) return fail("trigger", "the error handler did not run");
  } else {
    Outcome o = run(p, trigger, true);
    const Instruction* op = nullptr;
    for (const Stmt* s : p.tu->stmts)
      if (s->id == patch.placement_stmt)
        for (const auto& name : p.order)
          for (const auto& b : p.functions.at(name).blocks)
            for (const auto& in : b.insts)
              if (in.op == Opcode::BinOp && in.bin != BinKind::Cast && in.stmt == s->id) op = &in;
    if (!op) return fail("trigger", "repaired operation not found");
    const Function& f = *p.locate(op->uid).func;
    auto operand = [&](const Operand& x) -> std::optional<__int128> {
      if (x.is_const()) return static_cast<__int128>(x.imm);
      const Instruction* d = f.def_of(x.id);
      auto val = d ? last_value(o.result, d->uid) : std::nullopt;
      if (!val) return std::nullopt;
      return signed_value(*val, x.type);
    };
    auto a = operand(op->a), b = operand(op->b);
    if (!a || !b) return fail("trigger", "operands of the repaired operation were not recorded");
    __int128 exact = op->bin == BinKind::Add ? *a + *b : op->bin == BinKind::Sub ? *a - *b : *a * *b;
    const Instruction* qop = nullptr;
    for (const auto& name : q->order)
      for (const auto& blk : q->functions.at(name).blocks)
        for (const auto& in : blk.insts)
          if (in.op == Opcode::BinOp && in.bin == op->bin && in.span.line == patch.repair_line) qop = &in;
    auto got = qop ? last_value(t.result, qop->uid) : std::nullopt;
    if (!got) return fail("trigger", "repaired operation did not run");
    if (signed_value(*got, qop->type) != exact)
      return fail("trigger", "repaired operation computes " + std::to_string(static_cast<int64_t>(signed_value(*got, qop->type))) +
                                 ", exact value " + std::to_string(static_cast<int64_t>(exact)));
  }

  for (size_t i = 0; i < benign.size(); ++i) {
    Outcome a = run(p, benign[i], false), b = run(*q, benign[i], false);
    if (a.summary != b.summary)
      return fail("benign", "input " + std::to_string(i) + ": unpatched " + a.summary + ", patched " + b.summary);
  }
  return v;
}

}  // namespace patchsmith
