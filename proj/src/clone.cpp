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


#include <algorithm>

#include "patchsmith/dataflow.hpp"
#include "patchsmith/frontend.hpp"
#include "patchsmith/loops.hpp"

namespace patchsmith {

std::set<int> slice(const Function& f, const SliceCriteria& c) {
  ReachingDefs rd(f);
  auto cd = control_dependence(f);
  std::set<int> keep;
  std::vector<int> work;
  auto add = [&](int uid) {
    if (uid >= 0 && keep.insert(uid).second) work.push_back(uid);
  };
  auto add_value = [&](const Operand& o) {
    if (!o.is_value()) return;
    if (const Instruction* d = f.def_of(o.id)) add(d->uid);
  };
  add(c.uid);
  for (const auto& v : c.vars)
    for (int d : rd.before(c.uid, v)) add(d);
  std::set<int> blocks_done;
  while (!work.empty()) {
    int uid = work.back();
    work.pop_back();
    int b = block_of(f, uid);
    const Instruction* in = nullptr;
    for (const auto& i : f.blocks[static_cast<size_t>(b)].insts)
      if (i.uid == uid) in = &i;
    add_value(in->a);
    add_value(in->b);
    for (const auto& a : in->args) add_value(a);
    if (in->op == Opcode::Load && !in->var.empty())
      for (int d : rd.before(uid, in->var)) add(d);
    if (blocks_done.insert(b).second)
      for (int ctl : cd[static_cast<size_t>(b)]) add(f.blocks[static_cast<size_t>(ctl)].insts.back().uid);
  }
  return keep;
}

namespace {

const Instruction* find_uid(const Function& f, int uid) {
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (in.uid == uid) return &in;
  return nullptr;
}

// Variable a store writes through, following the address back to its root.
// Empty when the root is not a variable.
std::string address_root(const Function& f, const Operand& addr) {
  const Instruction* d = addr.is_value() ? f.def_of(addr.id) : nullptr;
  while (d) {
    switch (d->op) {
      case Opcode::GetElementField:
      case Opcode::GetElementIndex:
        d = d->a.is_value() ? f.def_of(d->a.id) : nullptr;
        break;
      case Opcode::BinOp:
        if (d->bin == BinKind::Cast || is_pointer(d->a.type)) d = d->a.is_value() ? f.def_of(d->a.id) : nullptr;
        else if (is_pointer(d->b.type)) d = d->b.is_value() ? f.def_of(d->b.id) : nullptr;
        else return "";
        break;
      case Opcode::Allocate:
        return "&" + d->var;
      case Opcode::Load:
        return d->var;
      default:
        return "";
    }
  }
  return "";
}

Purity check(const Program& p, const Function& f, const std::set<std::string>& outputs, std::set<std::string>& seen) {
  if (!seen.insert(f.name).second) return {};
  for (const auto& b : f.blocks) {
    for (const auto& in : b.insts) {
      if (in.op == Opcode::Store && !in.var.empty()) {
        if (!f.is_local(in.var) && !f.is_param(in.var)) return {false, "writes global " + in.var};
      } else if (in.op == Opcode::Store) {
        std::string root = address_root(f, in.a);
        bool local = root.size() > 1 && root[0] == '&' && f.is_local(root.substr(1));
        if (!local && !outputs.count(root)) return {false, "writes memory through a pointer"};
      } else if (in.op == Opcode::Call) {
        if (in.callee == "strlen") continue;
        if (const Function* g = p.find(in.callee)) {
          // Output pointers passed straight through stay outputs.
          std::set<std::string> out;
          for (size_t i = 0; i < in.args.size() && i < g->params.size(); ++i) {
            const Instruction* a = in.args[i].is_value() ? f.def_of(in.args[i].id) : nullptr;
            if (a && a->op == Opcode::Load && outputs.count(a->var)) out.insert(g->params[i].name);
          }
          Purity r = check(p, *g, out, seen);
          if (!r.pure) return {false, "calls " + in.callee + ", which " + r.reason};
        } else if (is_intrinsic(in.callee)) {
          return {false, "calls " + in.callee};
        } else {
          return {false, "calls unmodeled external " + in.callee};
        }
      }
    }
  }
  return {};
}

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string strip_semi(std::string s) {
  s = rstrip(std::move(s));
  if (!s.empty() && s.back() == ';') s.pop_back();
  return rstrip(s);
}

std::string fresh(const std::string& want, const std::function<bool(const std::string&)>& taken) {
  std::string n = want;
  for (int i = 1; taken(n); ++i) n = want + std::to_string(i);
  return n;
}

bool is_ptr_deref(const Function& f, const Instruction& in, const std::string& ptr) {
  return in.op == Opcode::Load && in.var.empty() && address_vars(f, in).count(ptr);
}

// Prints the statements of one function kept by a slice.
class ClonePrinter {
 public:
  ClonePrinter(const Program& p, const Function& f, const std::set<int>& kept) : p_(p), f_(f) {
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts) by_stmt_[in.stmt].push_back(&in);
    std::set<std::string> used;
    for (int uid : kept) {
      const Instruction* in = find_uid(f, uid);
      keep_.insert(in->stmt);
      if (!in->var.empty() && (in->op == Opcode::Load || in->op == Opcode::Store)) used.insert(in->var);
    }
    walk_stmts(f.decl->body, [&](const Stmt& s) {
      if (s.kind != StmtKind::Decl) return;
      for (const auto& d : s.decls)
        if (used.count(d.name)) keep_.insert(s.id);
    });
    // Enclosing statements carry the structure.
    for (int id : std::set<int>(keep_)) {
      for (const Stmt* s = p.stmt(id); s && s->parent >= 0; s = p.stmt(s->parent)) keep_.insert(s->parent);
    }
    const auto& body = f.decl->body->body;
    unit_ = body.empty() ? "\t" : line_indent(p.source(), body.front()->span.begin);
    if (unit_.empty()) unit_ = "\t";
  }

  // Pointer copies around loop `id`; guards when `limit` is set.
  void track(int loop_stmt, std::string ptr, std::string start, std::string end) {
    loop_ = loop_stmt;
    ptr_ = std::move(ptr);
    start_ = std::move(start);
    end_ = std::move(end);
  }
  void harden(std::string limit) { limit_ = std::move(limit); }
  void replace(int stmt, std::string text) {
    repl_stmt_ = stmt;
    repl_ = std::move(text);
  }

  std::string body() {
    lines_.clear();
    for (const auto& s : f_.decl->body->body) stmt(s, 1, true);
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
  }

 private:
  std::string text(const SourceSpan& sp) const { return std::string(sp.text(p_.source())); }
  std::string ind(int d) const {
    std::string s;
    for (int i = 0; i < d; ++i) s += unit_;
    return s;
  }
  void line(int d, const std::string& t) { lines_.push_back(ind(d) + t); }

  // Reads through the tracked pointer among the instructions of `s` that
  // satisfy `pick`.
  int derefs(const Stmt& s, const std::function<bool(const Instruction&)>& pick) const {
    if (limit_.empty()) return 0;
    int n = 0;
    auto it = by_stmt_.find(s.id);
    if (it == by_stmt_.end()) return 0;
    for (const Instruction* in : it->second)
      if (pick(*in) && is_ptr_deref(f_, *in, ptr_)) ++n;
    return n;
  }
  std::string guard(int k) const {
    std::string at = ptr_ + " + " + std::to_string(k);
    return "if (" + at + " > " + limit_ + ") { *" + end_ + " = " + at + "; return; }";
  }
  bool in_header(const Instruction& in) const {
    const auto& label = f_.blocks[static_cast<size_t>(block_of(f_, in.uid))].label;
    return label.rfind("for.step", 0) != 0;
  }

  bool kept(const Stmt& s) const {
    if (keep_.count(s.id)) return true;
    return s.kind == StmtKind::Break || s.kind == StmtKind::Continue || s.kind == StmtKind::Return ||
           s.kind == StmtKind::Goto || s.kind == StmtKind::Label;
  }

  void child(const std::string& header, const StmtPtr& c, int d, const std::vector<std::string>& tail) {
    bool block = c && c->kind == StmtKind::Block;
    if (!block && tail.empty() && c && kept(*c) && !needs_guard(*c)) {
      line(d, header);
      stmt(c, d + 1, false);
      return;
    }
    line(d, header + " {");
    if (block) {
      for (const auto& k : c->body) stmt(k, d + 1, false);
    } else if (c) {
      stmt(c, d + 1, false);
    }
    for (const auto& t : tail) line(d + 1, t);
    line(d, "}");
  }

  bool needs_guard(const Stmt& s) const {
    if (limit_.empty()) return false;
    if (s.kind == StmtKind::ExprStmt || s.kind == StmtKind::Decl || s.kind == StmtKind::If)
      return derefs(s, [](const Instruction&) { return true; }) > 0;
    return s.id == loop_ || derefs(s, [&](const Instruction& in) { return in_header(in); }) > 0;
  }

  void stmt(const StmtPtr& s, int d, bool top) {
    if (!s || !kept(*s)) return;
    switch (s->kind) {
      case StmtKind::Decl:
      case StmtKind::ExprStmt: {
        if (s->id == repl_stmt_) {
          line(d, repl_);
          return;
        }
        int k = derefs(*s, [](const Instruction&) { return true; });
        if (k) line(d, guard(k));
        line(d, rstrip(text(s->span)));
        return;
      }
      case StmtKind::Block:
        line(d, "{");
        for (const auto& k : s->body) stmt(k, d + 1, false);
        line(d, "}");
        return;
      case StmtKind::If: {
        int k = derefs(*s, [](const Instruction&) { return true; });
        if (k) line(d, guard(k));
        std::string head = rstrip(p_.source().substr(s->span.begin, s->then_stmt->span.begin - s->span.begin));
        child(head, s->then_stmt, d, {});
        if (s->else_stmt && kept(*s->else_stmt)) {
          if (lines_.back() == ind(d) + "}") {
            lines_.pop_back();
            child("} else", s->else_stmt, d, {});
          } else {
            child("else", s->else_stmt, d, {});
          }
        }
        return;
      }
      case StmtKind::While:
      case StmtKind::For: {
        bool tracked = s->id == loop_;
        std::string head;
        if (s->kind == StmtKind::While) {
          head = rstrip(p_.source().substr(s->span.begin, s->then_stmt->span.begin - s->span.begin));
        } else {
          std::string init = s->init ? strip_semi(text(s->init->span)) : "";
          if (tracked && !init.empty()) {
            line(d, init + ";");
            init.clear();
          }
          head = "for (" + init + "; " + (s->expr ? text(s->expr->span) : "") + ";" +
                 (s->step ? " " + text(s->step->span) : "") + ")";
        }
        if (tracked) line(d, "*" + start_ + " = " + ptr_ + ";");
        int k = derefs(*s, [&](const Instruction& in) { return in_header(in); });
        std::vector<std::string> tail;
        if (k) {
          bool step_moves = false;
          for (const Instruction* in : by_stmt_[s->id])
            if (!in_header(*in) && in->op == Opcode::Store && in->var == ptr_) step_moves = true;
          bool cont = false;
          walk_stmts(s->then_stmt, [&](const Stmt& x) { cont = cont || x.kind == StmtKind::Continue; });
          if (step_moves || cont) throw Abort("clone", "cannot guard the reads in the loop condition");
          line(d, guard(k));
          tail.push_back(guard(k));
        }
        child(head, s->then_stmt, d, tail);
        if (tracked) line(d, "*" + end_ + " = " + ptr_ + ";");
        return;
      }
      case StmtKind::Return:
        if (top) return;
        throw Abort("clone", "return inside the sliced region of " + f_.name);
      case StmtKind::Goto:
      case StmtKind::Label:
        throw Abort("clone", "goto in " + f_.name);
      case StmtKind::Break:
      case StmtKind::Continue:
        line(d, rstrip(text(s->span)));
        return;
      case StmtKind::Empty:
        return;
    }
  }

  const Program& p_;
  const Function& f_;
  std::map<int, std::vector<const Instruction*>> by_stmt_;
  std::set<int> keep_;
  std::string unit_;
  int loop_ = -1;
  std::string ptr_, start_, end_, limit_;
  int repl_stmt_ = -1;
  std::string repl_;
  std::vector<std::string> lines_;
};

bool var_taken(const Program& p, const Function& f, const std::string& n) {
  return f.is_param(n) || f.is_local(n) || p.find_global(n) || p.find(n) || is_intrinsic(n);
}

// The call expression of `call` inside statement `s`.
const Expr* call_expr(const Stmt& s, const Instruction& call) {
  const Expr* found = nullptr;
  auto look = [&](const ExprPtr& e) {
    walk_exprs(e, [&](const Expr& x) {
      if (x.kind == ExprKind::Call && x.name == call.callee && x.span.begin == call.span.begin) found = &x;
    });
  };
  look(s.expr);
  look(s.step);
  for (const auto& d : s.decls) look(d.init);
  return found;
}

std::string signature(const Program& p, const Function& f, const std::string& name,
                      const std::vector<std::string>& extra) {
  std::string params = rstrip(std::string(f.decl->params_span.text(p.source())));
  if (params == "void") params.clear();
  for (const auto& e : extra) params += (params.empty() ? "" : ", ") + e;
  return "void " + name + "(" + params + ")";
}

std::string decl_of(const TypeRef& t, const std::string& name) {
  std::string tn = type_name(t);
  return tn + (tn.back() == '*' ? "" : " ") + name;
}

}  // namespace

Purity side_effect_check(const Program& p, const Function& f, const std::set<std::string>& outputs) {
  std::set<std::string> seen;
  return check(p, f, outputs, seen);
}

std::string ClonedRange::prelude(bool hardened) const {
  std::string tn = type_name(ptr_type);
  std::string sep = tn.back() == '*' ? "" : " ";
  std::string out = tn + sep + start + ", *" + end + ";\n";
  out += clones.back().name + "(";
  std::vector<std::string> a = args;
  if (hardened) a.push_back(limit);
  a.push_back("&" + start);
  a.push_back("&" + end);
  for (size_t i = 0; i < a.size(); ++i) out += (i ? ", " : "") + a[i];
  return out + ");\n";
}

ClonedRange clone_loop(const Program& p, const FaultRecord& fault, const Instruction& access,
                       const AllocLookup& lookup) {
  const Function* fp = p.find(fault.func);
  if (!fp || !fp->decl) throw Abort("clone", "faulting function not found");
  const Function& f = *fp;
  const Instruction* d = access.a.is_value() ? f.def_of(access.a.id) : nullptr;
  if (!d || d->op != Opcode::Load || d->var.empty() || !is_pointer(d->type))
    throw Abort("clone", "access is not through a pointer variable");
  ClonedRange r;
  r.ptr = d->var;
  r.ptr_type = d->type;
  auto nest = enclosing_loops(f, block_of(f, access.uid));
  if (nest.empty()) throw Abort("clone", "access is not inside a loop");
  const LoopInfo& outer = nest.back();
  int loop_stmt = f.blocks[static_cast<size_t>(outer.header)].insts.back().stmt;
  for (int b : outer.body)
    for (const auto& in : f.blocks[static_cast<size_t>(b)].insts)
      if (in.op == Opcode::Store && in.var == r.ptr) {
        const Instruction* src = in.b.is_value() ? f.def_of(in.b.id) : nullptr;
        if (src && src->op == Opcode::BinOp && src->bin == BinKind::Sub) throw Abort("clone", "pointer moves downward");
      }

  auto taken_in = [&](const Function& g) { return [&p, &g](const std::string& n) { return var_taken(p, g, n); }; };
  auto clone_name = [&](const Function& g) {
    return fresh(g.name + "_clone", [&](const std::string& n) { return p.find(n) != nullptr; });
  };

  // The faulting function itself.
  std::string start = fresh("start", taken_in(f)), end = fresh("end", taken_in(f));
  std::string limit = fresh("limit", [&](const std::string& n) { return var_taken(p, f, n) || n == start || n == end; });
  std::string pt = type_name(r.ptr_type);
  std::string pp = pt + (pt.back() == '*' ? "*" : " *");
  ClonedFunction cf;
  cf.of = f.name;
  cf.name = clone_name(f);
  {
    auto kept = slice(f, {access.uid, {r.ptr}});
    for (int uid : kept) {
      const Instruction* in = find_uid(f, uid);
      if (in->op != Opcode::Call || in->callee == "strlen") continue;
      const Function* g = p.find(in->callee);
      if (!g) throw Abort("clone", cf.name + " has side effects: it calls " + in->callee);
      Purity pu = side_effect_check(p, *g);
      if (!pu.pure) throw Abort("clone", cf.name + " has side effects: it calls " + in->callee + ", which " + pu.reason);
    }
    ClonePrinter pr(p, f, kept);
    pr.track(loop_stmt, r.ptr, start, end);
    cf.plain = signature(p, f, cf.name, {pp + start, pp + end}) + " {\n" + pr.body() + "}\n";
    pr.harden(limit);
    cf.hardened = signature(p, f, cf.name, {decl_of(r.ptr_type, limit), pp + start, pp + end}) + " {\n" +
                  pr.body() + "}\n";
  }
  r.clones.push_back(cf);

  auto check_clones = [&]() {
    // Later clones call earlier ones; parse them together.
    std::string all = p.source();
    for (const auto& c : r.clones) all += "\n" + c.hardened;
    std::shared_ptr<Program> q;
    try {
      q = parse_program(all, p.tu->file);
    } catch (const Error& e) {
      throw Abort("clone", std::string("clone does not compile: ") + e.what());
    }
    const auto& c = r.clones.back();
    Purity pu = side_effect_check(*q, *q->find(c.name), {start, end});
    if (!pu.pure) throw Abort("clone", c.name + " has side effects: it " + pu.reason);
  };
  check_clones();

  // Walk up the call chain to the first function where the allocation range
  // is known.
  std::vector<const Function*> chain{&f};
  std::vector<int> calls;
  for (int uid : fault.call_stack) {
    InstLoc loc = p.locate(uid);
    if (!loc.func) break;
    chain.push_back(loc.func);
    calls.push_back(uid);
  }
  for (size_t k = 0; k < chain.size(); ++k) {
    const Function& g = *chain[k];
    int at = -1;
    const Instruction* call = nullptr;
    if (k == 0) {
      const auto& body = g.decl->body->body;
      if (body.empty()) continue;
      at = body.front()->id;
    } else {
      call = p.inst(calls[k - 1]);
      at = call->stmt;
      const Stmt* s = p.stmt(at);
      if (s && (s->kind == StmtKind::While || s->kind == StmtKind::For))
        throw Abort("clone", "call toward the fault is part of a loop condition");
    }
    auto alloc = lookup(g.name, at);
    if (!alloc) {
      if (k == 0) continue;
      // Intermediate function: clone it around the call toward the fault.
      const Stmt* s = p.stmt(at);
      if (s->kind != StmtKind::ExprStmt && s->kind != StmtKind::Decl)
        throw Abort("clone", "call to " + call->callee + " in " + g.name + " is part of a condition");
      if (!enclosing_loops(g, block_of(g, call->uid)).empty())
        throw Abort("clone", "call to " + call->callee + " in " + g.name + " is inside a loop");
      auto kept = slice(g, {call->uid, {}});
      for (int uid : kept) {
        const Instruction* in = find_uid(g, uid);
        auto uses = [&](const Operand& o) { return o.is_value() && o.id == call->result; };
        bool u = uses(in->a) || uses(in->b);
        for (const auto& a : in->args) u = u || uses(a);
        if (u && call->result >= 0) throw Abort("clone", "result of " + call->callee + " is needed in " + g.name);
      }
      const Expr* ce = call_expr(*s, *call);
      if (!ce) throw Abort("clone", "call to " + call->callee + " not found in source");
      std::string gs = fresh("start", taken_in(g)), ge = fresh("end", taken_in(g));
      std::string gl = fresh("limit", [&](const std::string& n) { return var_taken(p, g, n) || n == gs || n == ge; });
      auto call_text = [&](bool hardened) {
        std::string t = r.clones.back().name + "(";
        std::vector<std::string> a;
        for (const auto& kid : ce->kids) a.push_back(std::string(kid->span.text(p.source())));
        if (hardened) a.push_back(gl);
        a.push_back(gs);
        a.push_back(ge);
        for (size_t i = 0; i < a.size(); ++i) t += (i ? ", " : "") + a[i];
        return t + ");";
      };
      ClonedFunction ci;
      ci.of = g.name;
      ci.name = clone_name(g);
      ClonePrinter pr(p, g, kept);
      pr.replace(at, call_text(false));
      ci.plain = signature(p, g, ci.name, {pp + gs, pp + ge}) + " {\n" + pr.body() + "}\n";
      pr.replace(at, call_text(true));
      pr.harden(gl);
      ci.hardened =
          signature(p, g, ci.name, {decl_of(r.ptr_type, gl), pp + gs, pp + ge}) + " {\n" + pr.body() + "}\n";
      r.clones.push_back(ci);
      start = gs;
      end = ge;
      check_clones();
      continue;
    }
    r.func = g.name;
    r.placement_stmt = at;
    r.alloc = *alloc;
    if (k == 0) {
      for (const auto& prm : g.params) r.args.push_back(prm.name);
    } else {
      const Expr* ce = call_expr(*p.stmt(at), *call);
      if (!ce) throw Abort("clone", "call to " + call->callee + " not found in source");
      for (const auto& kid : ce->kids) r.args.push_back(std::string(kid->span.text(p.source())));
    }
    r.start = fresh("start", taken_in(g));
    r.end = fresh("end", [&](const std::string& n) { return var_taken(p, g, n) || n == r.start; });
    SymRef lim;
    if (pointee_size(r.ptr_type) == 1 && pointee_size(alloc->base->type) == 1 && is_pointer(alloc->base->type))
      lim = simplify(make_bin_op(SymOp::Add, alloc->base, alloc->size, nullptr));
    else
      lim = sym_cast(r.ptr_type,
                     make_bin_op(SymOp::Add, sym_cast(pointer_to(type_char()), alloc->base), alloc->size, nullptr));
    r.limit = render(lim);
    return r;
  }
  throw Abort("clone", "allocation range is not available on the call chain of " + f.name);
}

}  // namespace patchsmith
