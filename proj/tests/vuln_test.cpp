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


#include <gtest/gtest.h>

#include <random>

#include "patchsmith/dataflow.hpp"
#include "patchsmith/frontend.hpp"
#include "patchsmith/vuln.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::corpus_program;

TriggerInput args(std::vector<std::string> v) { return TriggerInput{std::move(v), {}}; }

// First instruction in `f` matching `pred`.
template <typename Pred>
const Instruction* find_inst(const Function& f, Pred pred) {
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (pred(in)) return &in;
  return nullptr;
}

const Instruction* call_to(const Function& f, const std::string& callee) {
  return find_inst(f, [&](const Instruction& in) { return in.op == Opcode::Call && in.callee == callee; });
}

std::string abort_stage(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Abort& a) {
    return a.stage() + ": " + a.what();
  }
  return "";
}

TEST(ReachingDefs, StraightLineAndBranches) {
  auto p = parse_program(R"(
int f(int a, int flag) {
  int x = 1;
  if (flag)
    x = a;
  int y = x + 2;
  x = 3;
  return x + y;
}
)");
  const Function& f = *p->find("f");
  ReachingDefs rd(f);
  auto stores = [&](const std::string& v) {
    std::vector<int> out;
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        if (in.op == Opcode::Store && in.var == v) out.push_back(in.uid);
    return out;
  };
  auto xs = stores("x");
  ASSERT_EQ(xs.size(), 3u);
  auto ys = stores("y");
  ASSERT_EQ(ys.size(), 1u);
  EXPECT_EQ(rd.before(ys[0], "x"), (std::set<int>{xs[0], xs[1]}));
  EXPECT_EQ(rd.before(ys[0], "a"), (std::set<int>{kEntryDef}));
  const Instruction* ret = find_inst(f, [](const Instruction& in) { return in.op == Opcode::Ret; });
  EXPECT_EQ(rd.before(ret->uid, "x"), (std::set<int>{xs[2]}));
  EXPECT_EQ(rd.before(ret->uid, "y"), (std::set<int>{ys[0]}));
}

TEST(ReachingDefs, LoopCarriedDefinitionReachesHeader) {
  auto p = corpus_program("grid_copy");
  const Function& bar = *p->find("bar");
  ReachingDefs rd(bar);
  int defs_of_p = 0;
  for (const auto& b : bar.blocks)
    for (const auto& in : b.insts) defs_of_p += in.op == Opcode::Store && in.var == "p";
  const Instruction* last = find_inst(bar, [](const Instruction& in) { return in.op == Opcode::Ret; });
  EXPECT_EQ(defs_of_p, 3);
  // After the outer loop only `p = dest` and the newline increment reach;
  // the inner increment is always followed by the outer one.
  EXPECT_EQ(rd.before(last->uid, "p").size(), 2u);
}

TEST(ControlDependence, IfBodyDependsOnBranch) {
  auto p = parse_program(R"(
int f(int a) {
  int x = 0;
  if (a > 2)
    x = 5;
  return x;
}
)");
  const Function& f = *p->find("f");
  auto cd = control_dependence(f);
  const Instruction* five = find_inst(f, [](const Instruction& in) {
    return in.op == Opcode::Store && in.b.is_const() && in.b.imm == 5;
  });
  int blk = p->locate(five->uid).block;
  ASSERT_EQ(cd[static_cast<size_t>(blk)].size(), 1u);
  EXPECT_EQ(*cd[static_cast<size_t>(blk)].begin(), 0);
  EXPECT_TRUE(cd[0].empty());
  auto ipdom = post_dominators(f);
  EXPECT_EQ(ipdom[0], p->locate(find_inst(f, [](const Instruction& in) { return in.op == Opcode::Ret; })->uid).block);
}

TEST(Classify, GridCopyIsBufferOverflow) {
  auto p = corpus_program("grid_copy");
  ExprCache ex(*p);
  auto r = execute(*p, args({"grid_copy", "0203123456789"}));
  auto v = classify(*p, r, ex);
  EXPECT_EQ(v.cls, VulnClass::BufferOverflow);
  EXPECT_EQ(v.func, "bar");
  ASSERT_NE(v.term("access_ptr"), nullptr);
  EXPECT_EQ(render(v.term("access_ptr")->expr), "p");
  EXPECT_EQ(v.alloc.func, "foo_malloc");
}

TEST(Classify, ScaledLocationIsIntegerOverflow) {
  auto p = parse_program(R"(
struct vd { int type; int location; };
int choose(struct vd *vd) {
  long skipsize;
  skipsize = 2048 * vd->location;
  char *block = malloc(skipsize);
  if (block == NULL)
    return -1;
  block[0] = 1;
  return 0;
}
int main(int argc, char **argv) {
  struct vd d;
  d.location = 2097152;
  return choose(&d);
}
)");
  ExprCache ex(*p);
  auto r = execute(*p, args({"x"}));
  auto v = classify(*p, r, ex);
  EXPECT_EQ(v.cls, VulnClass::IntegerOverflow);
  EXPECT_EQ(render(v.term("lhs")->expr), "2048");
  EXPECT_EQ(render(v.term("rhs")->expr), "vd->location");
  EXPECT_EQ(render(v.term("size")->expr), "skipsize");
}

TEST(Classify, SmallObjectCastIsBadCast) {
  auto p = parse_program(R"(
struct big { int a; int b; long c; };
int main(int argc, char **argv) {
  char *raw = malloc(8);
  struct big *b = (struct big *)raw;
  b->c = 5;
  return 0;
}
)");
  ExprCache ex(*p);
  auto r = execute(*p, args({"x"}));
  auto v = classify(*p, r, ex);
  EXPECT_EQ(v.cls, VulnClass::BadCast);
  auto bp = find_base_pointer(*p, v, ex);
  EXPECT_EQ(render(bp.term.expr), "b");
  EXPECT_EQ(bp.offset, 8u);
}

TEST(Classify, StraightLineIndexIsOutsideDomain) {
  auto p = parse_program(R"(
int main(int argc, char **argv) {
  char *b = malloc(4);
  int i = 6;
  b[i] = 1;
  return 0;
}
)");
  ExprCache ex(*p);
  auto r = execute(*p, args({"x"}));
  EXPECT_EQ(abort_stage([&] { classify(*p, r, ex); }), "classify: outside vulnerability domain");
}

TEST(BasePointer, NestedFieldUsesOuterObject) {
  auto p = parse_program(R"(
struct inner { int a; int b; };
struct outer { int tag; struct inner in; long extra; };
int main(int argc, char **argv) {
  struct outer *o = malloc(8);
  o->in.b = 3;
  return 0;
}
)");
  ExprCache ex(*p);
  auto r = execute(*p, args({"x"}));
  auto v = classify(*p, r, ex);
  ASSERT_EQ(v.cls, VulnClass::BadCast);
  auto bp = find_base_pointer(*p, v, ex);
  EXPECT_EQ(render(bp.term.expr), "o");
  EXPECT_EQ(bp.offset, 8u);
}

TEST(BasePointer, ParameterFollowsCallerArgument) {
  auto p = parse_program(R"(
struct rec { int kind; int value; };
int read_rec(struct rec *r) {
  return r->value;
}
int handle(char *buf, int len) {
  int x = read_rec((struct rec *)buf);
  return x;
}
int main(int argc, char **argv) {
  char *data = malloc(4);
  return handle(data, 4);
}
)");
  ExprCache ex(*p);
  auto r = execute(*p, args({"x"}));
  auto v = classify(*p, r, ex);
  ASSERT_EQ(v.cls, VulnClass::BadCast);
  auto bp = find_base_pointer(*p, v, ex);
  // buf is itself a parameter of handle, so the walk reaches main's data.
  EXPECT_EQ(bp.term.func, "main");
  EXPECT_EQ(render(bp.term.expr), "data");
  // Oracle: the executor's provenance base of the faulting access.
  EXPECT_EQ(bp.value, r.alloc(r.fault.alloc_id)->base);
}

TEST(ReachingDefsCheck, GridTermsDefinedOnPath) {
  auto p = corpus_program("grid_copy");
  ExprCache ex(*p);
  auto r = execute(*p, args({"grid_copy", "0203123456789"}));
  const Function& foo = *p->find("foo");
  int at = call_to(foo, "foo_malloc")->uid;
  auto ty = [&](const std::string& v) { return foo.var_type(v); };
  std::vector<Term> terms = {{"a", "foo", at, parse_sym("rows * (cols + 1) + 1", ty)},
                             {"b", "foo", at, parse_sym("(cols + 1) * (size / cols)", ty)},
                             {"c", "foo", at, sym_const(4)}};
  EXPECT_NO_THROW(check_reaching_definitions(*p, r, terms));
}

TEST(ReachingDefsCheck, OffPathDefinitionAborts) {
  auto p = parse_program(R"(
int main(int argc, char **argv) {
  int cap = 8;
  if (argc > 5)
    cap = 64;
  char *b = malloc(cap);
  return 0;
}
)");
  auto r = execute(*p, args({"x"}));
  const Function& m = *p->find("main");
  std::vector<Term> terms = {{"size", "main", call_to(m, "malloc")->uid, sym_var("cap", type_int(), "main")}};
  std::string why = abort_stage([&] { check_reaching_definitions(*p, r, terms); });
  EXPECT_NE(why.find("reaching_definitions: variable cap"), std::string::npos) << why;
  EXPECT_NE(why.find("line 5"), std::string::npos) << why;
}

TEST(Alias, Verdicts) {
  auto p = parse_program(R"(
int g(int *out, int n) {
  int cols = n;
  int other = 1;
  int *r = &cols;
  *r = 5;
  *out = 7;
  int *s = &other;
  *s = 2;
  return cols + other;
}
)");
  ExprCache ex(*p);
  const Function& f = *p->find("g");
  std::vector<const Instruction*> stores;
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (in.op == Opcode::Store && in.var.empty()) stores.push_back(&in);
  ASSERT_EQ(stores.size(), 3u);
  auto cols = sym_var("cols", type_int(), "g");
  auto n = sym_var("n", type_int(), "g");
  EXPECT_EQ(alias_query(*p, f, *stores[0], cols, ex), AliasVerdict::MustAlias);
  EXPECT_EQ(alias_query(*p, f, *stores[1], cols, ex), AliasVerdict::MayAlias);
  EXPECT_EQ(alias_query(*p, f, *stores[2], cols, ex), AliasVerdict::MustNotAlias);
  EXPECT_EQ(alias_query(*p, f, *stores[1], n, ex), AliasVerdict::MustNotAlias);
  const Instruction* ret = find_inst(f, [](const Instruction& in) { return in.op == Opcode::Ret; });
  std::vector<Term> terms = {{"t", "g", ret->uid, cols}};
  EXPECT_EQ(abort_stage([&] { alias_check(*p, terms, ex); }).rfind("alias: ", 0), 0u);
  std::vector<Term> safe = {{"t", "g", ret->uid, n}};
  EXPECT_NO_THROW(alias_check(*p, safe, ex));
}

TEST(Alias, NoPointerStoresIsOk) {
  auto p = corpus_program("grid_copy");
  ExprCache ex(*p);
  const Function& foo = *p->find("foo");
  int at = call_to(foo, "foo_malloc")->uid;
  std::vector<Term> terms = {{"a", "foo", at, sym_var("rows", type_int(), "foo")}};
  EXPECT_NO_THROW(alias_check(*p, terms, ex));
}

TEST(Alias, DistinctFieldsDoNotAlias) {
  auto p = parse_program(R"(
struct vd { int type; int location; };
int f(struct vd *v) {
  v->type = 1;
  return 2048 * v->location;
}
)");
  ExprCache ex(*p);
  const Function& f = *p->find("f");
  const Instruction* st = find_inst(f, [](const Instruction& in) { return in.op == Opcode::Store; });
  auto v = sym_var("v", f.var_type("v"), "f");
  auto loc = make_struct_op(v, "location", true);
  EXPECT_EQ(alias_query(*p, f, *st, loc, ex), AliasVerdict::MustNotAlias);
  auto same = make_struct_op(v, "type", true);
  EXPECT_EQ(alias_query(*p, f, *st, same, ex), AliasVerdict::MustAlias);
}

// Programs with pointer stores into a random choice of locals. Whenever the
// executor sees a store land in variable v, the verdict for v must not be
// must_not_alias.
TEST(Property, AliasVerdictsAreConservative) {
  std::mt19937_64 rng(3);
  const char* vars[] = {"a", "b", "c"};
  int checked = 0;
  for (int iter = 0; iter < 200; ++iter) {
    std::string body = "int f(int *q, int k) {\n  int a = 1;\n  int b = 2;\n  int c = 3;\n  int *r = q;\n";
    for (int s = 0; s < 4; ++s) {
      switch (rng() % 4) {
        case 0: body += std::string("  r = &") + vars[rng() % 3] + ";\n"; break;
        case 1: body += "  if (k > " + std::to_string(rng() % 3) + ")\n    r = &" + vars[rng() % 3] + ";\n"; break;
        case 2: body += "  r = q;\n"; break;
        default: break;
      }
      body += "  *r = " + std::to_string(10 + s) + ";\n";
    }
    body += "  return a + b + c;\n}\n";
    body += "int main(int argc, char **argv) {\n  int z = 0;\n  return f(&z, argc);\n}\n";
    auto p = parse_program(body);
    ExprCache ex(*p);
    const Function& f = *p->find("f");
    struct Obs : ExecObserver {
      std::vector<std::pair<int, std::string>> hits;
      void on_access(const MachineView& v, const Instruction& in, uint64_t addr, uint64_t, bool write) override {
        if (!write || v.function().name != "f") return;
        if (const AllocationRecord* a = v.alloc_at(addr)) hits.push_back({in.uid, a->var});
      }
    } obs;
    ExecOptions o;
    o.observer = &obs;
    execute(*p, args({"x", "y"}), o);
    for (const auto& [uid, var] : obs.hits) {
      if (var != "a" && var != "b" && var != "c") continue;
      const Instruction* st = p->inst(uid);
      ASSERT_NE(alias_query(*p, f, *st, sym_var(var, type_int(), "f"), ex), AliasVerdict::MustNotAlias)
          << body << "store line " << st->span.line << " var " << var;
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

}  // namespace
}  // namespace patchsmith
