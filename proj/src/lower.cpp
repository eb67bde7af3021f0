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

#include <fstream>
#include <sstream>

#include "patchsmith/frontend.hpp"

namespace patchsmith {
namespace {

BinKind bin_kind(const std::string& op) {
  static const std::map<std::string, BinKind> m = {
      {"+", BinKind::Add}, {"-", BinKind::Sub}, {"*", BinKind::Mul}, {"/", BinKind::Div},
      {"%", BinKind::Rem}, {"<<", BinKind::Shl}, {">>", BinKind::Shr}, {"&", BinKind::And},
      {"|", BinKind::Or},  {"^", BinKind::Xor}};
  return m.at(op);
}

CmpKind cmp_kind(const std::string& op) {
  static const std::map<std::string, CmpKind> m = {{"==", CmpKind::Eq}, {"!=", CmpKind::Ne},
                                                   {"<", CmpKind::Lt},  {"<=", CmpKind::Le},
                                                   {">", CmpKind::Gt},  {">=", CmpKind::Ge}};
  return m.at(op);
}

bool is_comparison(const std::string& op) {
  return op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=";
}

struct LValue {
  bool named = false;
  std::string var;
  Operand addr;
  TypeRef type;
};

class FunctionLowerer {
 public:
  FunctionLowerer(const TranslationUnit& tu, const FunctionDecl& fd, Function& fn, int& uid)
      : tu_(tu), fd_(fd), fn_(fn), uid_(uid) {}

  void run() {
    fn_.name = fd_.name;
    fn_.ret = fd_.ret;
    fn_.params = fd_.params;
    fn_.locals = fd_.locals;
    fn_.decl = &fd_;
    cur_ = new_block("entry");
    fn_.entry = "entry";
    stmt_ = fd_.body->id;
    lower_stmt(fd_.body);
    if (!terminated()) {
      stmt_ = fd_.body->id;
      Instruction ret;
      ret.op = Opcode::Ret;
      SourceSpan end = fd_.body->span;
      end.begin = end.end > 0 ? end.end - 1 : 0;
      ret.span = end;
      emit(ret);
    }
  }

 private:
  [[noreturn]] void err(const SourceSpan& s, const std::string& msg) const {
    throw Error(tu_.file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + msg);
  }

  int new_block(const std::string& hint) {
    std::string label = hint;
    if (hint != "entry") label += std::to_string(++block_counter_);
    fn_.blocks.push_back(BasicBlock{label, {}});
    return static_cast<int>(fn_.blocks.size()) - 1;
  }

  bool terminated() const {
    const auto& insts = fn_.blocks[static_cast<size_t>(cur_)].insts;
    return !insts.empty() && insts.back().is_terminator();
  }

  const std::string& label(int b) const { return fn_.blocks[static_cast<size_t>(b)].label; }

  Instruction& emit(Instruction inst) {
    if (terminated()) cur_ = new_block("dead");
    inst.uid = uid_++;
    inst.stmt = stmt_;
    auto& insts = fn_.blocks[static_cast<size_t>(cur_)].insts;
    insts.push_back(std::move(inst));
    return insts.back();
  }

  Operand emit_value(Instruction inst) {
    inst.result = fn_.num_values++;
    TypeRef t = inst.type;
    int id = inst.result;
    emit(std::move(inst));
    return Operand::value(id, t);
  }

  void branch(int target, const SourceSpan& span) {
    if (terminated()) return;
    Instruction br;
    br.op = Opcode::Branch;
    br.target = label(target);
    br.span = span;
    emit(br);
  }

  void cond_branch(const Operand& c, int t, int f, const SourceSpan& span) {
    Instruction br;
    br.op = Opcode::CondBranch;
    br.a = c;
    br.target = label(t);
    br.target2 = label(f);
    br.span = span;
    emit(br);
  }

  // ---- expressions ----

  Operand allocate(const std::string& var, const TypeRef& var_type, const SourceSpan& span) {
    Instruction in;
    in.op = Opcode::Allocate;
    in.var = var;
    in.type = pointer_to(var_type);
    in.span = span;
    return emit_value(in);
  }

  LValue lvalue(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Name: {
        LValue lv;
        lv.type = e->type;
        if (is_scalar(e->type)) {
          lv.named = true;
          lv.var = e->name;
        } else {
          lv.addr = allocate(e->name, e->type, e->span);
        }
        return lv;
      }
      case ExprKind::Unary: {
        LValue lv;
        lv.addr = rvalue(e->kids[0]);
        lv.type = e->type;
        return lv;
      }
      case ExprKind::Index: {
        Operand base = rvalue(e->kids[0]);
        Operand idx = rvalue(e->kids[1]);
        Instruction in;
        in.op = Opcode::GetElementIndex;
        in.a = base;
        in.b = idx;
        in.scale = size_of(e->type);
        in.type = pointer_to(e->type);
        in.span = e->span;
        LValue lv;
        lv.addr = emit_value(in);
        lv.type = e->type;
        return lv;
      }
      case ExprKind::Member: {
        Operand base;
        TypeRef st;
        if (e->arrow) {
          base = rvalue(e->kids[0]);
          st = decay(e->kids[0]->type)->elem;
        } else {
          LValue b = lvalue(e->kids[0]);
          base = address_of(b, e->kids[0]->span);
          st = e->kids[0]->type;
        }
        const Field* f = st->def->find(e->name);
        Instruction in;
        in.op = Opcode::GetElementField;
        in.a = base;
        in.field = e->name;
        in.offset = f->offset;
        in.type = pointer_to(f->type);
        in.span = e->span;
        LValue lv;
        lv.addr = emit_value(in);
        lv.type = f->type;
        return lv;
      }
      default:
        err(e->span, "expression is not assignable");
    }
  }

  Operand address_of(const LValue& lv, const SourceSpan& span) {
    if (lv.named) return allocate(lv.var, lv.type, span);
    Operand a = lv.addr;
    a.type = pointer_to(lv.type);
    return a;
  }

  Operand load(const LValue& lv, const SourceSpan& span) {
    if (is_array(lv.type)) {
      Operand a = lv.named ? allocate(lv.var, lv.type, span) : lv.addr;
      a.type = pointer_to(lv.type->elem);
      return a;
    }
    if (is_struct(lv.type)) err(span, "unsupported construct: struct value");
    Instruction in;
    in.op = Opcode::Load;
    in.type = lv.type;
    in.span = span;
    if (lv.named) in.var = lv.var;
    else in.a = lv.addr;
    return emit_value(in);
  }

  void store(const LValue& lv, const Operand& v, const SourceSpan& span) {
    Instruction in;
    in.op = Opcode::Store;
    in.type = lv.type;
    in.span = span;
    if (lv.named) in.var = lv.var;
    else in.a = lv.addr;
    in.b = v;
    emit(in);
  }

  Operand binop(BinKind k, Operand a, Operand b, const TypeRef& type, const SourceSpan& span) {
    Instruction in;
    in.op = Opcode::BinOp;
    in.bin = k;
    in.a = std::move(a);
    in.b = std::move(b);
    in.type = type;
    in.span = span;
    if (is_pointer(in.a.type) && (k == BinKind::Add || k == BinKind::Sub))
      in.scale = pointee_size(in.a.type);
    else if (is_pointer(in.b.type) && k == BinKind::Add)
      in.scale = pointee_size(in.b.type);
    return emit_value(in);
  }

  Operand cmpop(CmpKind k, Operand a, Operand b, const SourceSpan& span) {
    Instruction in;
    in.op = Opcode::CmpOp;
    in.cmp = k;
    if (is_pointer(a.type) || is_pointer(b.type)) in.cmp_type = int_type(64, false);
    else in.cmp_type = common_type(a.type, b.type);
    in.a = std::move(a);
    in.b = std::move(b);
    in.type = type_int();
    in.span = span;
    return emit_value(in);
  }

  Operand rvalue(const ExprPtr& e, bool discard = false) {
    switch (e->kind) {
      case ExprKind::IntLit:
        return Operand::constant(e->value, e->type);
      case ExprKind::StrLit:
        return Operand::string(e->str);
      case ExprKind::Name:
      case ExprKind::Index:
      case ExprKind::Member:
        return load(lvalue(e), e->span);
      case ExprKind::Unary: {
        const std::string& op = e->op;
        if (op == "*") return load(lvalue(e), e->span);
        if (op == "&") return address_of(lvalue(e->kids[0]), e->span);
        Operand x = rvalue(e->kids[0]);
        if (op == "!") return cmpop(CmpKind::Eq, x, Operand::constant(0, x.type), e->span);
        if (op == "+") {
          x.type = e->type;
          return x;
        }
        if (op == "-") return binop(BinKind::Sub, Operand::constant(0, e->type), x, e->type, e->span);
        return binop(BinKind::Xor, x, Operand::constant(-1, e->type), e->type, e->span);
      }
      case ExprKind::IncDec: {
        LValue lv = lvalue(e->kids[0]);
        Operand old = load(lv, e->kids[0]->span);
        Operand next = binop(e->op == "++" ? BinKind::Add : BinKind::Sub, old,
                             Operand::constant(1, type_int()), lv.type, e->span);
        store(lv, next, e->span);
        return e->prefix ? next : old;
      }
      case ExprKind::Binary: {
        const std::string& op = e->op;
        if (op == "&&" || op == "||") return logical_value(e);
        Operand a = rvalue(e->kids[0]);
        Operand b = rvalue(e->kids[1]);
        if (is_comparison(op)) return cmpop(cmp_kind(op), a, b, e->span);
        return binop(bin_kind(op), a, b, e->type, e->span);
      }
      case ExprKind::Assign: {
        const auto& lhs = e->kids[0];
        if (e->op == "=") {
          Operand v = rvalue(e->kids[1]);
          LValue lv = lvalue(lhs);
          store(lv, v, e->span);
          if (discard) return {};
          return load(lv, e->span);
        }
        LValue lv = lvalue(lhs);
        Operand old = load(lv, lhs->span);
        Operand r = rvalue(e->kids[1]);
        std::string op = e->op.substr(0, e->op.size() - 1);
        TypeRef t;
        if (is_pointer(lv.type)) t = lv.type;
        else if (op == "<<" || op == ">>") t = promote(lv.type);
        else t = common_type(lv.type, r.type);
        Operand v = binop(bin_kind(op), old, r, t, e->span);
        store(lv, v, e->span);
        if (discard) return {};
        return load(lv, e->span);
      }
      case ExprKind::Call: {
        Instruction in;
        in.op = Opcode::Call;
        in.callee = e->name;
        for (const auto& k : e->kids) in.args.push_back(rvalue(k));
        in.type = e->type;
        in.span = e->span;
        if (is_void(e->type)) {
          emit(in);
          return {};
        }
        return emit_value(in);
      }
      case ExprKind::Cast: {
        Operand x = rvalue(e->kids[0]);
        Instruction in;
        in.op = Opcode::BinOp;
        in.bin = BinKind::Cast;
        in.a = x;
        in.type = e->cast_type;
        in.span = e->span;
        return emit_value(in);
      }
    }
    err(e->span, "cannot lower expression");
  }

  Operand logical_value(const ExprPtr& e) {
    std::string tmp = "__t" + std::to_string(tmp_counter_++);
    fn_.locals[tmp] = type_int();
    LValue lv;
    lv.named = true;
    lv.var = tmp;
    lv.type = type_int();
    store(lv, Operand::constant(0, type_int()), e->span);
    int t = new_block("logic.true");
    int done = new_block("logic.end");
    cond(e, t, done);
    cur_ = t;
    store(lv, Operand::constant(1, type_int()), e->span);
    branch(done, e->span);
    cur_ = done;
    return load(lv, e->span);
  }

  void cond(const ExprPtr& e, int t, int f) {
    if (e->kind == ExprKind::Binary && e->op == "&&") {
      int mid = new_block("and.rhs");
      cond(e->kids[0], mid, f);
      cur_ = mid;
      cond(e->kids[1], t, f);
      return;
    }
    if (e->kind == ExprKind::Binary && e->op == "||") {
      int mid = new_block("or.rhs");
      cond(e->kids[0], t, mid);
      cur_ = mid;
      cond(e->kids[1], t, f);
      return;
    }
    if (e->kind == ExprKind::Unary && e->op == "!") {
      cond(e->kids[0], f, t);
      return;
    }
    Operand c = rvalue(e);
    cond_branch(c, t, f, e->span);
  }

  // ---- statements ----

  void lower_stmt(const StmtPtr& s) {
    if (!s) return;
    int saved = stmt_;
    stmt_ = s->id;
    switch (s->kind) {
      case StmtKind::Decl:
        for (const auto& d : s->decls) {
          if (!d.init) continue;
          Operand v = rvalue(d.init);
          LValue lv;
          lv.named = true;
          lv.var = d.name;
          lv.type = d.type;
          store(lv, v, d.span);
        }
        break;
      case StmtKind::ExprStmt:
        rvalue(s->expr, true);
        break;
      case StmtKind::If: {
        int then_b = new_block("if.then");
        int else_b = s->else_stmt ? new_block("if.else") : -1;
        int end_b = new_block("if.end");
        cond(s->expr, then_b, else_b >= 0 ? else_b : end_b);
        cur_ = then_b;
        lower_stmt(s->then_stmt);
        stmt_ = s->id;
        branch(end_b, s->span);
        if (else_b >= 0) {
          cur_ = else_b;
          lower_stmt(s->else_stmt);
          stmt_ = s->id;
          branch(end_b, s->span);
        }
        cur_ = end_b;
        break;
      }
      case StmtKind::While: {
        int head = new_block("while.cond");
        int body = new_block("while.body");
        int end = new_block("while.end");
        branch(head, s->span);
        cur_ = head;
        cond(s->expr, body, end);
        cur_ = body;
        loops_.push_back({end, head});
        lower_stmt(s->then_stmt);
        loops_.pop_back();
        stmt_ = s->id;
        branch(head, s->span);
        cur_ = end;
        break;
      }
      case StmtKind::For: {
        lower_stmt(s->init);
        stmt_ = s->id;
        int head = new_block("for.cond");
        int body = new_block("for.body");
        int step = new_block("for.step");
        int end = new_block("for.end");
        branch(head, s->span);
        cur_ = head;
        if (s->expr) cond(s->expr, body, end);
        else branch(body, s->span);
        cur_ = body;
        loops_.push_back({end, step});
        lower_stmt(s->then_stmt);
        loops_.pop_back();
        stmt_ = s->id;
        branch(step, s->span);
        cur_ = step;
        if (s->step) rvalue(s->step, true);
        branch(head, s->span);
        cur_ = end;
        break;
      }
      case StmtKind::Goto:
        branch(label_block(s->label), s->span);
        break;
      case StmtKind::Label: {
        int b = label_block(s->label);
        branch(b, s->span);
        cur_ = b;
        lower_stmt(s->then_stmt);
        break;
      }
      case StmtKind::Return: {
        Instruction ret;
        ret.op = Opcode::Ret;
        if (s->expr) ret.a = rvalue(s->expr);
        ret.type = fd_.ret;
        ret.span = s->span;
        emit(ret);
        break;
      }
      case StmtKind::Break:
        if (loops_.empty()) err(s->span, "break outside loop");
        branch(loops_.back().first, s->span);
        break;
      case StmtKind::Continue:
        if (loops_.empty()) err(s->span, "continue outside loop");
        branch(loops_.back().second, s->span);
        break;
      case StmtKind::Block:
        for (const auto& b : s->body) lower_stmt(b);
        break;
      case StmtKind::Empty:
        break;
    }
    stmt_ = saved;
  }

  int label_block(const std::string& name) {
    auto it = labels_.find(name);
    if (it != labels_.end()) return it->second;
    int b = new_block("L." + name + ".");
    labels_[name] = b;
    return b;
  }

  const TranslationUnit& tu_;
  const FunctionDecl& fd_;
  Function& fn_;
  int& uid_;
  int cur_ = 0;
  int stmt_ = -1;
  int block_counter_ = 0;
  int tmp_counter_ = 0;
  std::vector<std::pair<int, int>> loops_;  // (break target, continue target)
  std::map<std::string, int> labels_;
};

}  // namespace

std::shared_ptr<Program> lower(std::shared_ptr<TranslationUnit> tu) {
  auto prog = std::make_shared<Program>();
  prog->tu = tu;
  for (const auto& g : tu->globals) {
    GlobalVar gv;
    gv.name = g.name;
    gv.type = g.type;
    if (g.init) {
      if (g.init->kind == ExprKind::IntLit) gv.init = g.init->value;
      else if (g.init->kind == ExprKind::StrLit) gv.init_str = g.init->str;
      else gv.init = -g.init->kids[0]->value;
    }
    prog->globals.push_back(std::move(gv));
  }
  int uid = 0;
  for (const auto& fd : tu->functions) {
    Function& fn = prog->functions[fd.name];
    FunctionLowerer(*tu, fd, fn, uid).run();
    prog->order.push_back(fd.name);
  }
  prog->finalize();
  return prog;
}

std::shared_ptr<Program> parse_program(std::string source, std::string file) {
  return lower(parse_unit(std::move(source), std::move(file)));
}

std::shared_ptr<Program> load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str(), path);
}

SourceMap build_source_map(const Program& p) {
  SourceMap m;
  for (const auto& name : p.order) {
    const Function& f = p.functions.at(name);
    for (const auto& b : f.blocks)
      for (const auto& i : b.insts) {
        m.inst_spans[i.uid] = i.span;
        m.inst_stmt[i.uid] = i.stmt;
      }
    if (f.decl) m.function_bodies[name] = f.decl->body->span;
  }
  for (const Stmt* s : p.tu->stmts) m.stmt_spans[s->id] = s->span;
  return m;
}

}  // namespace patchsmith
