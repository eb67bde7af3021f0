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

#include <filesystem>

#include "patchsmith/frontend.hpp"
#include "patchsmith/ir.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::corpus_program;

// Set-based dominator computation, independent of the production algorithm.
std::vector<std::set<int>> dom_sets(const Function& f) {
  const int n = static_cast<int>(f.blocks.size());
  auto preds = f.predecessors();
  std::set<int> all;
  for (int i = 0; i < n; ++i) all.insert(i);
  std::vector<std::set<int>> dom(static_cast<size_t>(n), all);
  dom[0] = {0};
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 1; b < n; ++b) {
      std::set<int> d = all;
      bool any = false;
      for (int p : preds[static_cast<size_t>(b)]) {
        std::set<int> tmp;
        std::set_intersection(d.begin(), d.end(), dom[static_cast<size_t>(p)].begin(),
                              dom[static_cast<size_t>(p)].end(), std::inserter(tmp, tmp.begin()));
        d = tmp;
        any = true;
      }
      if (!any) d.clear();
      d.insert(b);
      if (d != dom[static_cast<size_t>(b)]) {
        dom[static_cast<size_t>(b)] = d;
        changed = true;
      }
    }
  }
  return dom;
}

TEST(Validate, GridCopyProgramIsWellFormed) {
  auto p = corpus_program("grid_copy");
  auto r = validate_program(*p);
  EXPECT_TRUE(r.ok()) << (r.violations.empty() ? "" : r.violations[0]);
}

TEST(Validate, MissingTerminatorIsNamed) {
  auto p = parse_program("int main() { return 0; }");
  Function& f = p->functions.at("main");
  f.blocks[0].insts.pop_back();
  auto r = validate_program(*p);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NE(r.violations[0].find("entry"), std::string::npos);
}

TEST(Validate, UnresolvedCallee) {
  auto p = parse_program("int main() { bogus(1); return 0; }");
  auto r = validate_program(*p);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0], "unresolved callee bogus");
}

TEST(CallGraph, GridCopyEdgesFollowProgramOrder) {
  auto p = corpus_program("grid_copy");
  auto g = build_call_graph(*p);
  std::vector<std::pair<std::string, std::string>> foo_edges;
  for (const auto* e : g.callees_of("foo")) foo_edges.emplace_back(e->caller, e->callee);
  std::vector<std::pair<std::string, std::string>> want = {
      {"foo", "strlen"}, {"foo", "extract_int"}, {"foo", "extract_int"}, {"foo", "foo_malloc"},
      {"foo", "bar"},    {"foo", "printf"},      {"foo", "free"}};
  EXPECT_EQ(foo_edges, want);
  auto malloc_edges = g.callees_of("foo_malloc");
  ASSERT_EQ(malloc_edges.size(), 1u);
  EXPECT_EQ(malloc_edges[0]->callee, "malloc");
  for (const auto& e : g.edges) EXPECT_EQ(p->inst(e.call_uid)->op, Opcode::Call);
}

TEST(CallGraph, NoCallsAndSelfRecursion) {
  auto p = parse_program("int main() { int x = 1; return x; }");
  EXPECT_TRUE(build_call_graph(*p).edges.empty());
  auto q = parse_program("int f(int n) { if (n) return f(n - 1); return 0; } int main() { return 0; }");
  auto g = build_call_graph(*q);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].caller, "f");
  EXPECT_EQ(g.edges[0].callee, "f");
}

TEST(Loops, GridCopyHasNestedNormalizedLoops) {
  auto p = corpus_program("grid_copy");
  const Function& bar = *p->find("bar");
  auto loops = find_loops(bar);
  ASSERT_EQ(loops.size(), 2u);
  EXPECT_EQ(bar.blocks[static_cast<size_t>(loops[0].header)].label.rfind("for.cond", 0), 0u);
  EXPECT_EQ(bar.blocks[static_cast<size_t>(loops[1].header)].label.rfind("while.cond", 0), 0u);
  EXPECT_EQ(loops[0].parent, 1);
  EXPECT_EQ(loops[1].parent, -1);
  EXPECT_TRUE(loops[0].normalized);
  EXPECT_TRUE(loops[1].normalized);
}

TEST(Loops, StraightLineHasNone) {
  auto p = parse_program("int main() { int a = 1; a = a + 2; return a; }");
  EXPECT_TRUE(find_loops(*p->find("main")).empty());
}

TEST(Loops, TwoExitsAreNotNormalized) {
  auto p = parse_program(
      "int main() { int i = 0; while (i < 10) { if (i == 5) break; i++; } return i; }");
  auto loops = find_loops(*p->find("main"));
  ASSERT_EQ(loops.size(), 1u);
  EXPECT_FALSE(loops[0].normalized);
}

TEST(Loops, IrreducibleRegionIsReportedNotDropped) {
  auto p = parse_program(
      "int main() { int i = 0;\n"
      "  if (i) goto b;\n"
      "a: i++;\n"
      "b: i++;\n"
      "  if (i < 10) goto a;\n"
      "  return i; }");
  auto loops = find_loops(*p->find("main"));
  ASSERT_FALSE(loops.empty());
  for (const auto& l : loops) EXPECT_FALSE(l.normalized);
}

// Header dominance and innermost-first ordering over every corpus function.
TEST(Loops, PropertiesHoldAcrossCorpus) {
  namespace fs = std::filesystem;
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(PATCHSMITH_CORPUS_DIR)) {
    if (!fs::exists(entry.path() / "program.mc")) continue;
    auto p = load_program((entry.path() / "program.mc").string());
    for (const auto& name : p->order) {
      const Function& f = *p->find(name);
      auto doms = dom_sets(f);
      auto loops = find_loops(f);
      for (size_t i = 0; i < loops.size(); ++i) {
        for (int b : loops[i].body) EXPECT_TRUE(doms[static_cast<size_t>(b)].count(loops[i].header));
        if (loops[i].parent >= 0) EXPECT_LT(static_cast<int>(i), loops[i].parent);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(Dump, OneInstructionPerLine) {
  auto p = parse_program("int main() { int x = 2; return x * 3; }");
  std::string d = dump_ir(*p);
  EXPECT_NE(d.find("%1 = BinOp * %0, 3"), std::string::npos) << d;
  EXPECT_NE(d.find("Store x, 2"), std::string::npos) << d;
}

}  // namespace
}  // namespace patchsmith
