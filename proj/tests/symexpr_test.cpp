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

#include "patchsmith/arith.hpp"
#include "patchsmith/frontend.hpp"
#include "patchsmith/symexpr.hpp"
#include "sym_gen.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::SymGen;

std::string dump(const SymRef& e) {
  std::string out = "[" + type_name(e->type) + " " + render(e);
  for (const auto& k : e->kids) out += " " + dump(k);
  return out + "]";
}

SymRef var(const std::string& n, TypeRef t = type_int()) { return sym_var(n, std::move(t), "f"); }

const Instruction* find_inst(const Function& f, Opcode op, int nth = 0) {
  for (const auto& b : f.blocks)
    for (const auto& i : b.insts)
      if (i.op == op && nth-- == 0) return &i;
  return nullptr;
}

TEST(Builder, CompoundAssignmentStoresSum) {
  auto p = parse_program("int main() { char *p = 0; p += 2; return 0; }");
  const Function& f = *p->find("main");
  auto fx = build_function_exprs(f);
  const Instruction* st = find_inst(f, Opcode::Store, 1);
  ASSERT_NE(st, nullptr);
  const auto& [lhs, rhs] = fx.stores.at(st->uid);
  EXPECT_EQ(render(lhs), "p");
  ASSERT_EQ(rhs->kind, SymKind::BinOp);
  EXPECT_EQ(rhs->op, SymOp::Add);
  EXPECT_EQ(render(rhs), "p + 2");
}

TEST(Builder, FieldThroughPointer) {
  auto p = parse_program(
      "struct vd { int location; };\n"
      "long f(struct vd *vd) { long skipsize = 2048 * vd->location; return skipsize; }\n"
      "int main() { return 0; }\n");
  const Function& f = *p->find("f");
  auto fx = build_function_exprs(f);
  const Instruction* st = find_inst(f, Opcode::Store);
  const auto& rhs = fx.stores.at(st->uid).second;
  EXPECT_EQ(render(rhs), "2048 * vd->location");
  EXPECT_TRUE(rhs->kids[1]->via_pointer);
}

TEST(Builder, NestedFieldAndIndex) {
  auto p = parse_program(
      "struct inner { int bar[12]; };\n"
      "struct outer { int x; struct inner f; };\n"
      "int g(struct outer *foo) { return foo->f.bar[10]; }\n"
      "int main() { return 0; }\n");
  const Function& f = *p->find("g");
  auto fx = build_function_exprs(f);
  EXPECT_EQ(render(fx.insts.at(find_inst(f, Opcode::Ret)->uid)), "foo->f.bar[10]");
}

TEST(Builder, LocalStructAndArrayUseDot) {
  auto p = parse_program(
      "struct pt { int x; int y; };\n"
      "int main() { struct pt a; int v[4]; a.y = 3; v[2] = a.y; return v[2] + a.x; }\n");
  const Function& f = *p->find("main");
  auto fx = build_function_exprs(f);
  EXPECT_EQ(render(fx.insts.at(find_inst(f, Opcode::Ret)->uid)), "v[2] + a.x");
  EXPECT_EQ(render(fx.stores.at(find_inst(f, Opcode::Store, 1)->uid).first), "v[2]");
}

TEST(Builder, CallsAreCallDerived) {
  auto p = testing::corpus_program("grid_copy");
  const Function& f = *p->find("foo");
  auto fx = build_function_exprs(f);
  const Instruction* st = find_inst(f, Opcode::Store, 2);  // rows = extract_int(p)
  const SymRef& rhs = fx.stores.at(st->uid).second;
  EXPECT_EQ(render(rhs), "extract_int(p)");
  EXPECT_TRUE(is_call_derived(rhs));
}

TEST(Builder, UnboundOperandAborts) {
  Instruction in;
  in.op = Opcode::BinOp;
  in.bin = BinKind::Add;
  in.a = Operand::value(7, type_int());
  in.b = Operand::constant(1, type_int());
  in.type = type_int();
  Function f;
  try {
    build_expression(in, f, [](int) { return SymRef(); });
    FAIL() << "expected abort";
  } catch (const Abort& a) {
    EXPECT_EQ(std::string(a.what()), "incomplete expression");
  }
}

TEST(Ops, TableExamples) {
  EXPECT_EQ(render(make_deref(var("p", pointer_to(type_char())))), "*p");
  EXPECT_EQ(render(make_cmp_op(CmpKind::Ge, var("a"), var("b"))), "a >= b");
  EXPECT_EQ(render(make_call("extract_int", {var("p", pointer_to(type_char()))}, type_int())),
            "extract_int(p)");
  EXPECT_EQ(render(sym_const(0)), "0");
  EXPECT_THROW(make_struct_op(var("x"), "f", true), Abort);
}

TEST(Render, MinimalParentheses) {
  SymRef cols = var("cols"), size = var("size");
  SymRef e = make_bin_op(SymOp::Mul, make_bin_op(SymOp::Add, cols, sym_const(1), nullptr),
                         make_bin_op(SymOp::Div, size, cols, nullptr), nullptr);
  EXPECT_EQ(render(e), "(cols + 1) * (size / cols)");
  EXPECT_EQ(render(make_bin_op(SymOp::Sub, var("a"), make_bin_op(SymOp::Sub, var("b"), var("c"), nullptr), nullptr)),
            "a - (b - c)");
  EXPECT_EQ(render(make_bin_op(SymOp::Sub, make_bin_op(SymOp::Sub, var("a"), var("b"), nullptr), var("c"), nullptr)),
            "a - b - c");
}

TEST(Render, CastOfField) {
  auto p = parse_program("struct vd { int location; };\nint main() { return 0; }\n");
  auto st = struct_type(p->tu->structs.at("vd"));
  SymRef f = make_struct_op(var("vd", pointer_to(st)), "location", true);
  EXPECT_EQ(render(sym_cast(int_type(64, true, "int64_t"), f)), "(int64_t)vd->location");
}

TEST(Simplify, Examples) {
  SymRef cols = var("cols"), size = var("size");
  SymRef worked = make_bin_op(SymOp::Div, make_bin_op(SymOp::Sub, cols, sym_const(0), nullptr),
                              sym_const(1), nullptr);
  EXPECT_EQ(render(simplify(worked)), "cols");
  EXPECT_EQ(render(simplify(make_bin_op(SymOp::Mul, var("x"), sym_const(0), nullptr))), "0");
  SymRef range = make_bin_op(SymOp::Mul, make_bin_op(SymOp::Add, cols, sym_const(1), nullptr),
                             make_bin_op(SymOp::Div, size, cols, nullptr), nullptr);
  EXPECT_EQ(render(simplify(range)), "(cols + 1) * (size / cols)");
  SymRef ab = make_bin_op(SymOp::Div, make_bin_op(SymOp::Mul, var("a"), var("b"), nullptr), var("b"), nullptr);
  EXPECT_EQ(render(simplify(ab)), "a * b / b");
}

TEST(Simplify, CancelsAndFolds) {
  EXPECT_EQ(canonical("x + 3 - x"), "3");
  EXPECT_EQ(canonical("x + 1 + 2"), "x + 3");
  EXPECT_EQ(canonical("x - 5 + 2"), "x - 3");
  EXPECT_EQ(canonical("2 * x * 3"), "6 * x");
  EXPECT_EQ(canonical("0 - y + x"), "x - y");
}

TEST(Simplify, BytePointerExtent) {
  auto cp = pointer_to(type_char());
  SymRef dest = var("dest", cp);
  SymRef n = make_bin_op(SymOp::Mul, var("cols"), var("rows"), nullptr);
  SymRef hi = make_bin_op(SymOp::Add, dest, n, nullptr);
  EXPECT_EQ(render(simplify(make_bin_op(SymOp::Sub, hi, dest, nullptr))), "(long)(cols * rows)");
}

TEST(Simplify, KeepsCheckWidth) {
  // An int sum inside a long sum keeps its own wrap-around.
  SymRef inner = make_bin_op(SymOp::Add, var("a"), var("b"), nullptr);
  SymRef outer = make_bin_op(SymOp::Add, inner, var("l", type_long()), nullptr);
  EXPECT_EQ(render(simplify(outer)), "a + b + l");
  SymRef w = make_bin_op(SymOp::Add, sym_cast(type_long(), var("a")), sym_const(1), nullptr);
  EXPECT_EQ(render(simplify(w)), "(long)a + 1");
}

TEST(Canonical, StripsWidening) {
  EXPECT_EQ(canonical("((long)cols + 1) * (size / cols)"), "(cols + 1) * (size / cols)");
  EXPECT_EQ(canonical("(cols+1)*(size/cols) > rows*(cols+1)+1"),
            "(cols + 1) * (size / cols) > rows * (cols + 1) + 1");
}

TEST(Eval, TotalArithmetic) {
  MapEnv env;
  env.values["x"] = 7;
  EXPECT_EQ(*eval(parse_sym("x / 0"), env), 0u);
  env.values["m"] = static_cast<uint64_t>(INT64_MIN);
  EXPECT_EQ(*eval(parse_sym("m / -1"), env), static_cast<uint64_t>(INT64_MIN));
  auto it = [](const std::string& n) { return n == "i" ? type_int() : nullptr; };
  env.values["i"] = 2147483647;
  EXPECT_EQ(as_signed(*eval(parse_sym("i + 1", it), env)), INT32_MIN);
}

TEST(Properties, RenderParseRoundTrip) {
  SymGen gen(11);
  auto types = [&](const std::string& n) { return gen.var_type(n); };
  for (int i = 0; i < 1000; ++i) {
    SymRef e = gen.any(4);
    std::string text = render(e);
    SymRef back = parse_sym(text, types, gen.tu());
    ASSERT_TRUE(sym_equal(e, back)) << text << " vs " << render(back);
    ASSERT_EQ(render(back), text);
  }
}

TEST(Properties, SimplifySoundAndIdempotent) {
  SymGen gen(12);
  for (int i = 0; i < 1000; ++i) {
    SymRef e = gen.arith(5);
    SymRef s = simplify(e);
    ASSERT_TRUE(sym_equal(simplify(s), s)) << render(e) << " -> " << render(s);
    for (int k = 0; k < 5; ++k) {
      MapEnv env = gen.env();
      auto a = eval(e, env), b = eval(s, env);
      ASSERT_TRUE(a && b);
      ASSERT_EQ(*a, *b) << render(e) << " -> " << render(s);
    }
  }
}

TEST(Properties, SimplifiedTextMeansTheSame) {
  // The rendered text of a simplified tree, typed as C would type it, agrees
  // with the tree.
  SymGen gen(13);
  auto types = [&](const std::string& n) { return gen.var_type(n); };
  for (int i = 0; i < 1000; ++i) {
    SymRef s = simplify(gen.arith(4));
    SymRef back = parse_sym(render(s), types, gen.tu());
    MapEnv env = gen.env();
    ASSERT_EQ(*eval(s, env), *eval(back, env)) << render(s) << "\n" << dump(s) << "\n" << dump(back);
  }
}

}  // namespace
}  // namespace patchsmith
