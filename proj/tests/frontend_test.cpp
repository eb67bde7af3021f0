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

#include "patchsmith/frontend.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::corpus_program;
using testing::opcodes;

TEST(Parse, GridCopyProgramHasExpectedFunctions) {
  auto p = corpus_program("grid_copy");
  for (const char* f : {"foo_malloc", "foo", "bar", "extract_int", "main"})
    EXPECT_NE(p->find(f), nullptr) << f;
}

TEST(Parse, DerefInitializerLowersToLoadLoadStore) {
  auto p = parse_program("int f(int *p) { int x = *p; return x; }");
  const Function& f = *p->find("f");
  const auto& insts = f.blocks[0].insts;
  ASSERT_GE(insts.size(), 3u);
  EXPECT_EQ(insts[0].op, Opcode::Load);
  EXPECT_EQ(insts[0].var, "p");
  EXPECT_EQ(insts[1].op, Opcode::Load);
  EXPECT_TRUE(insts[1].var.empty());
  EXPECT_EQ(insts[1].a.id, insts[0].result);
  EXPECT_EQ(insts[2].op, Opcode::Store);
  EXPECT_EQ(insts[2].var, "x");
}

TEST(Parse, SwitchIsUnsupported) {
  try {
    parse_program("int f(int x) { switch (x) { } return 0; }");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported construct: switch"), std::string::npos);
  }
}

TEST(Parse, OtherUnsupportedConstructsAreNamed) {
  struct Case {
    const char* src;
    const char* what;
  } cases[] = {
      {"int f(int x) { do { x--; } while (x); return 0; }", "do-while"},
      {"int f(int x) { return x ? 1 : 2; }", "conditional operator"},
      {"typedef int foo;", "typedef"},
      {"int f(int x) { float y; return 0; }", "floating-point"},
      {"int f(int x) { int x; return 0; }", "shadowed variable x"},
  };
  for (const auto& c : cases) {
    try {
      parse_program(c.src);
      ADD_FAILURE() << "no error for " << c.src;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(c.what), std::string::npos) << e.what();
    }
  }
}

TEST(Parse, SyntaxErrorsCarryLineAndColumn) {
  try {
    parse_program("int f(int x) {\n  return x +;\n}", "t.mc");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("t.mc:2:", 0), 0u) << e.what();
  }
}

TEST(Parse, LiteralTypes) {
  auto tu = parse_unit("long f() { return 2147483648; } long g() { return 3L; } int h() { return 'a'; }");
  auto ret_type = [&](int fi) { return tu->functions[static_cast<size_t>(fi)].body->body[0]->expr->type; };
  EXPECT_EQ(ret_type(0)->width, 64);
  EXPECT_EQ(ret_type(1)->width, 64);
  EXPECT_EQ(ret_type(2)->width, 32);
  EXPECT_EQ(tu->functions[2].body->body[0]->expr->value, 'a');
}

TEST(Parse, StructLayoutAndMemberAccess) {
  auto p = parse_program(
      "struct in { int a; int b; };\n"
      "struct out { char tag; struct in inner; long extra; };\n"
      "int f(struct out *o) { return o->inner.b; }");
  const auto& def = *p->tu->structs.at("out");
  EXPECT_EQ(def.size, 24u);
  EXPECT_EQ(def.find("inner")->offset, 4u);
  EXPECT_EQ(def.find("extra")->offset, 16u);
  int gefs = 0;
  for (const auto& i : p->find("f")->blocks[0].insts)
    if (i.op == Opcode::GetElementField) ++gefs;
  EXPECT_EQ(gefs, 2);
}

TEST(Parse, InstructionSpansNestInsideStatementSpans) {
  auto p = corpus_program("grid_copy");
  auto map = build_source_map(*p);
  for (const auto& [uid, span] : map.inst_spans) {
    int stmt = map.inst_stmt.at(uid);
    ASSERT_TRUE(map.stmt_spans.count(stmt));
    EXPECT_TRUE(map.stmt_spans.at(stmt).contains(span)) << "instruction " << uid;
  }
}

TEST(Parse, EmptyEditRoundTripPreservesOpcodes) {
  auto p = corpus_program("grid_copy");
  std::string again = apply_edits(p->source(), {});
  EXPECT_EQ(again, p->source());
  auto q = parse_program(again);
  for (const auto& name : p->order) EXPECT_EQ(opcodes(*p->find(name)), opcodes(*q->find(name))) << name;
}

TEST(Edits, EmptyEditListGivesIdenticalOutputAndEmptyDiff) {
  std::string src = "int main() {\n  return 0;\n}\n";
  EXPECT_EQ(apply_edits(src, {}), src);
  EXPECT_EQ(unified_diff(src, src, "a", "b"), "");
}

TEST(Edits, SameSpanTwiceIsRejected) {
  SourceSpan s{5, 5, 1, 6};
  EXPECT_THROW(apply_edits("int main() {}", {{s, "a"}, {s, "b"}}), Error);
  SourceSpan r1{2, 6, 1, 3}, r2{4, 8, 1, 5};
  EXPECT_THROW(apply_edits("0123456789", {{r1, "x"}, {r2, "y"}}), Error);
}

TEST(Edits, InsertionShowsUpAsPlusLines) {
  std::string src = "a\nb\nc\nd\ne\nf\ng\n";
  SourceSpan at{4, 4, 3, 1};
  std::string out = apply_edits(src, {{at, "X\n"}});
  EXPECT_EQ(out, "a\nb\nX\nc\nd\ne\nf\ng\n");
  std::string diff = unified_diff(src, out, "a/p.mc", "b/p.mc");
  EXPECT_EQ(diff,
            "--- a/p.mc\n+++ b/p.mc\n@@ -1,5 +1,6 @@\n a\n b\n+X\n c\n d\n e\n");
}

TEST(Edits, DiffOfReplacementAndDeletion) {
  std::string a = "1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n11\n12\n13\n";
  std::string b = "1\n2\n3\nfour\n5\n6\n7\n8\n9\n10\n11\n13\n";
  std::string diff = unified_diff(a, b, "a", "b");
  EXPECT_EQ(diff,
            "--- a\n+++ b\n@@ -1,7 +1,7 @@\n 1\n 2\n 3\n-4\n+four\n 5\n 6\n 7\n"
            "@@ -9,5 +9,4 @@\n 9\n 10\n 11\n-12\n 13\n");
}

}  // namespace
}  // namespace patchsmith
