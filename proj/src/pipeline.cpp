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


#include "patchsmith/pipeline.hpp"

#include <cctype>
#include <chrono>

#include "patchsmith/dataflow.hpp"
#include "patchsmith/frontend.hpp"
#include "patchsmith/loops.hpp"

namespace patchsmith {

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Patched: return "patched";
    case RunStatus::Aborted: return "aborted";
    case RunStatus::Clean: return "clean";
    case RunStatus::Error: return "error";
  }
  return "error";
}

int RunReport::exit_code() const {
  switch (status) {
    case RunStatus::Patched: return 0;
    case RunStatus::Aborted: return 2;
    case RunStatus::Clean: return 3;
    case RunStatus::Error: return 1;
  }
  return 1;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<int> suffix(const std::vector<int>& v, size_t from) {
  return from >= v.size() ? std::vector<int>{} : std::vector<int>(v.begin() + static_cast<long>(from), v.end());
}

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

bool reads_memory(const SymRef& e) {
  if (e->kind == SymKind::Deref || e->kind == SymKind::Field || e->kind == SymKind::Index) return true;
  for (const auto& k : e->kids)
    if (reads_memory(k)) return true;
  return false;
}

std::set<std::string> identifiers(const std::string& text) {
  std::set<std::string> out;
  for (size_t i = 0; i < text.size();) {
    if (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_') {
      size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      out.insert(text.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

int first_uid_of_stmt(const Program& p, int stmt) {
  const Stmt* s = p.stmt(stmt);
  const Function* f = s ? p.find(s->func) : nullptr;
  if (!f) return -1;
  for (const auto& b : f->blocks)
    for (const auto& in : b.insts)
      if (in.stmt == stmt || (s->span.contains(in.span) && !in.span.empty())) return in.uid;
  return -1;
}

// Function of each frame: 0 is the faulting frame, k > 0 holds call k-1.
std::vector<std::string> frame_functions(const Program& p, const FaultRecord& fault) {
  std::vector<std::string> out{fault.func};
  for (int c : fault.call_stack) out.push_back(p.locate(c).func->name);
  return out;
}

// Variable receiving the result of `call_uid`, through conversions.
std::pair<SymRef, int> result_var(const Program& p, int call_uid) {
  InstLoc loc = p.locate(call_uid);
  const Instruction* call = p.inst(call_uid);
  if (!loc.func || !call || call->result < 0) return {nullptr, -1};
  const Function& f = *loc.func;
  int value = call->result;
  for (int hops = 0; hops < 4; ++hops) {
    const Instruction* use = nullptr;
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        if (!use && ((in.a.is_value() && in.a.id == value) || (in.b.is_value() && in.b.id == value))) use = &in;
    if (!use) break;
    if (use->op == Opcode::BinOp && use->bin == BinKind::Cast) {
      value = use->result;
      continue;
    }
    if (use->op == Opcode::Store && !use->var.empty() && use->b.is_value() && use->b.id == value)
      return {sym_var(use->var, f.var_type(use->var), f.name), use->uid};
    break;
  }
  return {nullptr, -1};
}

struct Ctx {
  const Program& p;
  const ExprCache& ex;
  const ExecResult& r;
  const VulnReport& v;
  RunReport& rep;
};

// Replaces locals by their unique reaching definitions while the variables
// those read keep their values up to `uid`.
SymRef resolve_locals(const Ctx& c, const Function& f, int uid, const SymRef& e, const std::set<std::string>& keep,
                      int depth = 0) {
  if (depth > 16) return e;
  ReachingDefs rd(f);
  std::map<std::string, SymRef> repl;
  for (const auto& var : sym_vars(e)) {
    if (keep.count(var) || !f.is_local(var)) continue;
    auto defs = rd.before(uid, var);
    if (defs.size() != 1 || *defs.begin() == kEntryDef) continue;
    int d = *defs.begin();
    const Instruction* in = c.p.inst(d);
    SymRef rhs = c.ex.inst(d);
    if (!in || in->op != Opcode::Store || !rhs || contains_call(rhs)) continue;
    bool stable = true;
    for (const auto& w : sym_vars(rhs))
      if (rd.before(d, w) != rd.before(uid, w)) stable = false;
    if (reads_memory(rhs) || !stable) continue;
    repl[var] = resolve_locals(c, f, d, rhs, keep, depth + 1);
  }
  return repl.empty() ? e : simplify(substitute(e, repl));
}

// Stores to `vars` in the frame of `from_uid` between its last execution
// and the next start of `stmt`.
std::string window_conflict(const Ctx& c, int from_uid, int stmt, const std::set<std::string>& vars) {
  const auto& t = c.r.trace;
  long from = -1;
  for (long i = static_cast<long>(t.size()) - 1; i >= 0; --i)
    if (t[static_cast<size_t>(i)].uid == from_uid) {
      from = i;
      break;
    }
  if (from < 0) return "allocation not on the trace";
  int depth = t[static_cast<size_t>(from)].depth;
  int result_store = result_var(c.p, from_uid).second;
  for (size_t i = static_cast<size_t>(from) + 1; i < t.size(); ++i) {
    if (t[i].depth < depth) break;
    const Instruction* in = c.p.inst(t[i].uid);
    if (t[i].depth == depth && in->stmt == stmt) return "";
    if (t[i].uid == result_store) continue;
    if (in->op == Opcode::Store && vars.count(in->var) && (t[i].depth == depth || c.p.find_global(in->var)))
      return in->var + " is assigned at line " + std::to_string(in->span.line);
  }
  return "placement does not follow the allocation";
}

struct FrameAlloc {
  SymRef base, size;
  int from_uid = -1;  // allocation call in this frame; -1 when valid on entry
};

// The allocation range in frame k of the fault, when the allocation
// happens in or under that frame.
std::optional<FrameAlloc> alloc_at_frame(const Ctx& c, const ScopeMap& size_map, size_t k) {
  const AllocationRecord& a = c.v.alloc;
  auto fns = frame_functions(c.p, c.r.fault);
  if (k >= fns.size()) return std::nullopt;
  auto above = suffix(c.r.fault.call_stack, k);
  const Function& f = *c.p.find(fns[k]);
  switch (a.kind) {
    case AllocKind::Heap:
      for (size_t j = 0; j < size_map.entries.size(); ++j) {
        if (size_map.entries[j].func != fns[k] || suffix(a.call_stack, j + 1) != above) continue;
        auto [base, store] = result_var(c.p, a.call_stack[j]);
        if (!base) return std::nullopt;
        return FrameAlloc{base, size_map.entries[j].expr, a.call_stack[j]};
      }
      return std::nullopt;
    case AllocKind::Stack:
      if (a.func != fns[k] || a.call_stack != above || !f.var_type(a.var)) return std::nullopt;
      return FrameAlloc{sym_var(a.var, f.var_type(a.var), f.name), sym_const(static_cast<int64_t>(a.size), type_long()),
                        -1};
    case AllocKind::Global:
      if (const GlobalVar* g = c.p.find_global(a.var))
        return FrameAlloc{sym_var(a.var, g->type, ""), sym_const(static_cast<int64_t>(a.size), type_long()), -1};
      return std::nullopt;
    case AllocKind::Input:
      return std::nullopt;
  }
  return std::nullopt;
}

ScopeMap alloc_size_map(const Ctx& c) {
  const AllocationRecord& a = c.v.alloc;
  if (a.kind != AllocKind::Heap) return {};
  const Instruction* site = c.p.inst(a.site_uid);
  SymRef size = site ? c.ex.operand(site->uid, site->args.at(0)) : nullptr;
  if (!size) throw Abort("translate", "no expression for the allocation size");
  return translate_se_to_scopes(c.p, suffix(a.call_stack, 1), size, a.site_uid, c.ex);
}

// Allocation range valid before `stmt` of `func`: found in that frame, or
// in a caller and passed down as arguments.
std::optional<AllocExprs> alloc_lookup(const Ctx& c, const ScopeMap& size_map, const std::string& func, int stmt) {
  auto fns = frame_functions(c.p, c.r.fault);
  size_t k = 0;
  while (k < fns.size() && fns[k] != func) ++k;
  if (k == fns.size()) return std::nullopt;
  for (size_t m = k; m < fns.size(); ++m) {
    auto fa = alloc_at_frame(c, size_map, m);
    if (!fa) continue;
    std::set<std::string> vars = sym_vars(fa->size);
    vars.insert(fa->base->name);
    int target = m == k ? stmt : c.p.inst(c.r.fault.call_stack[m - 1])->stmt;
    if (fa->from_uid >= 0 && !window_conflict(c, fa->from_uid, target, vars).empty()) return std::nullopt;
    SymRef base = fa->base, size = fa->size;
    // Pass the range down through arguments equal to it.
    for (size_t i = m; i > k; --i) {
      const Instruction& call = *c.p.inst(c.r.fault.call_stack[i - 1]);
      const Function& callee = *c.p.find(call.callee);
      SymRef nb, ns;
      for (size_t a = 0; a < call.args.size() && a < callee.params.size(); ++a) {
        SymRef arg = c.ex.operand(call.uid, call.args[a]);
        if (!arg) continue;
        const Param& prm = callee.params[a];
        if (!nb && render(simplify(arg)) == render(simplify(base))) nb = sym_var(prm.name, prm.type, callee.name);
        if (!ns && render(simplify(arg)) == render(simplify(size))) ns = sym_var(prm.name, prm.type, callee.name);
      }
      if (!nb || !ns) return std::nullopt;
      int at = i - 1 == k ? first_uid_of_stmt(c.p, stmt) : c.r.fault.call_stack[i - 2];
      if (!is_nonlocal_var(c.p, callee, at, nb->name) || !is_nonlocal_var(c.p, callee, at, ns->name))
        return std::nullopt;
      base = nb;
      size = ns;
    }
    return AllocExprs{base, size};
  }
  return std::nullopt;
}

// What the analysis hands to synthesis.
struct Plan {
  SymRef pred;
  std::string func;
  int stmt = -1;
  CloneEdits clone;
  std::vector<Term> terms;
  std::vector<int> window;  // instructions the predicate must hold at
  std::set<std::string> window_vars;
  bool memory = false;
};

Plan plan_range(const Ctx& c, const SymRef& lo, const SymRef& hi, int at_uid, size_t k0) {
  auto stack = suffix(c.r.fault.call_stack, k0);
  ScopeMap lo_m = translate_se_to_scopes(c.p, stack, lo, at_uid, c.ex);
  ScopeMap hi_m = translate_se_to_scopes(c.p, stack, hi, at_uid, c.ex);
  ScopeMap size_m = alloc_size_map(c);
  c.rep.scopes["access_lo"] = lo_m;
  c.rep.scopes["access_hi"] = hi_m;
  if (c.v.alloc.kind == AllocKind::Heap) c.rep.scopes["alloc_size"] = size_m;

  Plan pl;
  SymRef base, size, a_lo, a_hi;
  int access_uid = -1, alloc_uid = -1;
  if (c.v.alloc.kind == AllocKind::Heap) {
    FaultRecord fr = c.r.fault;
    fr.call_stack = stack;
    Convergence cv = converge(c.p, lo_m, hi_m, size_m, fr, c.v.alloc);
    auto [b, store] = result_var(c.p, cv.alloc_uid);
    if (!b) throw Abort("predicate", "the allocation is not stored in a variable of " + cv.func);
    const Function& f = *c.p.find(cv.func);
    if (ReachingDefs(f).before(cv.access_uid, b->name) != std::set<int>{store})
      throw Abort("predicate", b->name + " may be reassigned between the allocation and the access in " + cv.func);
    base = b;
    size = cv.alloc_size;
    a_lo = cv.access_lo;
    a_hi = cv.access_hi;
    access_uid = cv.access_uid;
    alloc_uid = cv.alloc_uid;
    pl.func = cv.func;
    pl.stmt = cv.placement_stmt;
  } else {
    for (size_t k = 0; k < std::min(lo_m.entries.size(), hi_m.entries.size()) && !base; ++k) {
      auto fa = alloc_at_frame(c, size_m, k0 + k);
      if (!fa) continue;
      base = fa->base;
      size = fa->size;
      a_lo = lo_m.entries[k].expr;
      a_hi = hi_m.entries[k].expr;
      access_uid = lo_m.entries[k].at_uid;
      pl.func = lo_m.entries[k].func;
      pl.stmt = c.p.inst(access_uid)->stmt;
    }
    if (!base) {
      std::string s;
      for (const auto& fn : lo_m.scopes()) s += (s.empty() ? "" : ", ") + fn;
      throw Abort("converge", "no convergence: access range translates to {" + s + "}, the buffer is " +
                                  (c.v.alloc.var.empty() ? std::string("unnamed") : c.v.alloc.var) + " of " +
                                  c.v.alloc.func);
    }
  }
  const Function& f = *c.p.find(pl.func);
  a_lo = resolve_locals(c, f, access_uid, a_lo, {base->name});
  a_hi = resolve_locals(c, f, access_uid, a_hi, {base->name});
  pl.pred = range_predicate(a_lo, a_hi, base, size);
  if (!pl.pred)
    throw Abort("predicate", "the access range is not expressed relative to " + render(base) + " in " + pl.func);
  pl.terms = {{"access_lo", pl.func, access_uid, a_lo},
              {"access_hi", pl.func, access_uid, a_hi},
              {"alloc_size", pl.func, alloc_uid >= 0 ? alloc_uid : access_uid, size}};
  pl.window = {access_uid};
  if (alloc_uid >= 0) pl.window.push_back(alloc_uid);
  pl.window_vars = sym_vars(pl.pred);
  pl.memory = reads_memory(pl.pred);
  c.rep.placement = pl.func == c.r.fault.func ? "trivial" : "translated";
  return pl;
}

Plan plan_clone(const Ctx& c, const Instruction& access) {
  ScopeMap size_m = alloc_size_map(c);
  if (c.v.alloc.kind == AllocKind::Heap) c.rep.scopes["alloc_size"] = size_m;
  AllocLookup lookup = [&](const std::string& func, int stmt) { return alloc_lookup(c, size_m, func, stmt); };
  ClonedRange cr = clone_loop(c.p, c.r.fault, access, lookup);
  Plan pl;
  pl.pred = cloned_predicate(cr);
  pl.func = cr.func;
  pl.stmt = cr.placement_stmt;
  for (const auto& cf : cr.clones) pl.clone.defs.push_back(cf.hardened);
  pl.clone.prelude = cr.prelude(true);
  pl.clone.vars = {cr.start, cr.end};
  auto fns = frame_functions(c.p, c.r.fault);
  size_t k = 0;
  while (k < fns.size() && fns[k] != cr.func) ++k;
  pl.window = {k == 0 ? access.uid : c.r.fault.call_stack[k - 1]};
  int at = first_uid_of_stmt(c.p, pl.stmt);
  pl.terms = {{"alloc_base", cr.func, at, cr.alloc.base}, {"alloc_size", cr.func, at, cr.alloc.size}};
  pl.window_vars = sym_vars(cr.alloc.base);
  for (const auto& v : sym_vars(cr.alloc.size)) pl.window_vars.insert(v);
  for (const auto& a : cr.args)
    for (const auto& v : identifiers(a)) pl.window_vars.insert(v);
  pl.memory = true;
  c.rep.placement = cr.func == c.r.fault.func ? "trivial" : "translated";
  return pl;
}

Plan plan_buffer_overflow(const Ctx& c, const RunOptions& opts) {
  const Instruction& access = *c.p.inst(c.r.fault.inst_uid);
  if (opts.technique != Technique::Ara) {
    try {
      Plan pl = plan_clone(c, access);
      c.rep.technique = "cloned";
      return pl;
    } catch (const Abort& a) {
      if (opts.technique == Technique::Clone) throw;
      c.rep.notes.push_back(std::string("loop cloning not used: ") + a.what());
    }
  }
  const Function& f = *c.p.find(c.r.fault.func);
  std::string why;
  auto range = analyze_access_range(f, access, c.ex, &why);
  if (!range) throw Abort("ara", "loop nest is not analyzable: " + why);
  c.rep.technique = "ara";
  return plan_range(c, range->lo, range->hi, range->at_uid, 0);
}

Plan plan_bad_cast(const Ctx& c) {
  BasePointer bp = find_base_pointer(c.p, c.v, c.ex);
  auto fns = frame_functions(c.p, c.r.fault);
  size_t k = 0;
  while (k < fns.size() && fns[k] != bp.term.func) ++k;
  if (k == fns.size()) throw Abort("predicate", "base pointer is outside the faulting call chain");
  TypeRef cp = pointer_to(type_char());
  SymRef lo = simplify(make_bin_op(SymOp::Add, sym_cast(cp, bp.term.expr),
                                   sym_const(static_cast<int64_t>(bp.offset), type_long()), nullptr));
  SymRef hi = simplify(make_bin_op(SymOp::Add, lo, sym_const(static_cast<int64_t>(c.r.fault.access_size), type_long()),
                                   nullptr));
  return plan_range(c, lo, hi, bp.term.at_uid, k);
}

Plan plan_integer_overflow(const Ctx& c) {
  const Instruction& op = *c.p.inst(c.v.point_uid);
  Plan pl;
  pl.pred = overflow_predicate(sym_op(op.bin), c.v.term("lhs")->expr, c.v.term("rhs")->expr, op.type);
  pl.func = c.v.func;
  pl.stmt = op.stmt;
  pl.terms = {*c.v.term("lhs"), *c.v.term("rhs")};
  pl.window = {op.uid};
  pl.window_vars = sym_vars(pl.pred);
  pl.memory = reads_memory(pl.pred);
  c.rep.placement = "trivial";
  return pl;
}

nlohmann::json scope_json(const ScopeMap& m) {
  auto out = nlohmann::json::array();
  for (const auto& e : m.entries) out.push_back({{"func", e.func}, {"expr", e.expr ? render(e.expr) : ""}});
  return out;
}

}  // namespace

RunReport run_pipeline(const std::string& path, const std::string& source, const TriggerInput& trigger,
                       const RunOptions& opts) {
  RunReport rep;
  rep.program = path;
  rep.input = trigger;
  auto t_all = Clock::now();
  auto stage = [&](const std::string& name, auto&& fn) {
    auto t0 = Clock::now();
    StageOutcome so{name, "ok", "", 0};
    try {
      fn();
    } catch (const Abort& a) {
      so.status = "abort";
      so.reason = a.what();
      so.ms = ms_since(t0);
      rep.stages.push_back(so);
      throw;
    } catch (const Error& e) {
      so.status = "error";
      so.reason = e.what();
      so.ms = ms_since(t0);
      rep.stages.push_back(so);
      throw;
    }
    so.ms = ms_since(t0);
    rep.stages.push_back(so);
  };

  try {
    stage("parse", [&] {
      rep.prog = parse_program(source, path);
      ValidationReport v = validate_program(*rep.prog);
      if (!v.ok()) throw Error("invalid program: " + v.violations.front());
    });
    const Program& p = *rep.prog;
    ExprCache ex(p);
    ExecResult& r = rep.trigger_run;
    stage("execute", [&] {
      ExecOptions eo;
      eo.record_trace = true;
      r = execute(p, trigger, eo);
      if (r.status == ExecResult::Status::Error) throw Abort("execute", "runtime error: " + r.error);
    });
    if (r.status == ExecResult::Status::Exited) {
      rep.status = RunStatus::Clean;
      rep.total_ms = ms_since(t_all);
      return rep;
    }
    VulnReport v;
    stage("classify", [&] {
      v = classify(p, r, ex);
      rep.cls = v.cls;
    });
    stage("identify", [&] {
      check_reaching_definitions(p, r, v.terms);
      alias_check(p, v.terms, ex);
    });
    Ctx c{p, ex, r, v, rep};

    std::optional<Patch> repair;
    Plan pl;
    stage("analyze", [&] {
      switch (v.cls) {
        case VulnClass::BufferOverflow: pl = plan_buffer_overflow(c, opts); break;
        case VulnClass::BadCast: pl = plan_bad_cast(c); break;
        case VulnClass::IntegerOverflow:
          repair = synthesize_repair_cast(p, v);
          if (repair) rep.placement = "trivial";
          else pl = plan_integer_overflow(c);
          break;
      }
    });
    if (!repair) {
      stage("placement", [&] {
        check_reaching_definitions(p, r, pl.terms);
        alias_check(p, pl.terms, ex);
        std::set<std::string> vars;
        for (const auto& x : pl.window_vars)
          if (!pl.clone.vars.count(x)) vars.insert(x);
        std::string why = placement_conflict(p, r, pl.func, pl.stmt, pl.window, vars, pl.memory);
        if (!why.empty()) throw Abort("placement", why);
      });
    }
    stage("synthesize", [&] {
      if (repair) {
        rep.patch = repair;
        return;
      }
      auto handler = find_error_handler(p, *p.find(pl.func));
      if (!handler) throw Abort("handler", "cannot find appropriate error-handling code in " + pl.func);
      rep.patch = synthesize_check_and_error(p, pl.pred, *handler, pl.func, pl.stmt, pl.clone);
      rep.predicate = render(pl.pred);
    });
    stage("validate", [&] {
      rep.validation = validate_patch(p, *rep.patch, trigger, opts.benign);
      if (!rep.validation->ok)
        throw Abort("validate", rep.validation->clause + ": " + rep.validation->detail);
    });
    rep.patched_source = rep.patch->apply(source);
    std::string name = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
    rep.diff = unified_diff(source, rep.patched_source, "a/" + name, "b/" + name);
    rep.status = RunStatus::Patched;
  } catch (const Abort& a) {
    rep.status = RunStatus::Aborted;
    rep.abort_stage = a.stage();
    rep.abort_reason = a.what();
    rep.patch.reset();
    rep.patched_source.clear();
    rep.diff.clear();
  } catch (const Error& e) {
    rep.status = RunStatus::Error;
    rep.error = e.what();
    rep.patch.reset();
  }
  rep.total_ms = ms_since(t_all);
  return rep;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["program"] = program;
  j["input"] = nlohmann::json::parse(input_to_json(input));
  j["status"] = run_status_name(status);
  j["exit_code"] = exit_code();
  auto stages_json = nlohmann::json::array();
  for (const auto& s : stages) {
    nlohmann::json o{{"name", s.name}, {"status", s.status}, {"ms", s.ms}};
    if (!s.reason.empty()) o["reason"] = s.reason;
    stages_json.push_back(o);
  }
  j["stages"] = stages_json;
  if (status == RunStatus::Error) j["error"] = error;
  if (status == RunStatus::Aborted) j["abort"] = {{"stage", abort_stage}, {"reason", abort_reason}};
  j["class"] = cls ? nlohmann::json(vuln_class_name(*cls)) : nlohmann::json(nullptr);
  j["technique"] = technique;
  j["placement"] = placement.empty() ? nlohmann::json(nullptr) : nlohmann::json(placement);
  if (!notes.empty()) j["notes"] = notes;
  if (!scopes.empty()) {
    nlohmann::json s;
    for (const auto& [k, m] : scopes) s[k] = scope_json(m);
    j["scopes"] = s;
  }
  if (patch) {
    nlohmann::json pj{{"kind", patch_kind_name(patch->kind)}, {"function", patch->func}};
    if (patch->kind == PatchKind::CheckAndError) {
      pj["predicate"] = predicate;
      pj["handler"] = patch->handler;
    } else {
      pj["line"] = patch->repair_line;
      pj["text"] = patch->repair_text;
    }
    j["patch"] = pj;
  }
  if (validation)
    j["validation"] = {{"ok", validation->ok}, {"clause", validation->clause}, {"detail", validation->detail}};
  j["timings"] = {{"total_ms", total_ms}};
  return j;
}

}  // namespace patchsmith
