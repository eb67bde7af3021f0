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

#include "patchsmith/executor.hpp"
#include "patchsmith/frontend.hpp"
#include "patchsmith/loops.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::corpus_path;
using testing::corpus_program;

std::string abort_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Abort& a) {
    return a.stage() + ": " + a.what();
  }
  return "";
}

std::set<int> stmts_of(const Function& f, const std::set<int>& uids) {
  std::set<int> out;
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (uids.count(in.uid)) out.insert(in.stmt);
  return out;
}

std::set<int> all_stmts(const Function& f) {
  std::set<int> out;
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (in.op != Opcode::Branch) out.insert(in.stmt);
  return out;
}

TEST(Slice, StraightLineIdentity) {
  auto p = parse_program(R"(
int f(int a, int b) {
  int x = a + 1;
  int y = b * 2;
  int z = x - y;
  return z + x + y;
}
)");
  const Function& f = *p->find("f");
  const Instruction& ret = f.blocks.back().insts.back();
  ASSERT_EQ(ret.op, Opcode::Ret);
  auto s = slice(f, {ret.uid, {"x", "y", "z"}});
  EXPECT_EQ(stmts_of(f, s), all_stmts(f));
}

TEST(Slice, ConstantStatementAlone) {
  auto p = parse_program(R"(
int f(int a) {
  int x = a + 1;
  int k = 7;
  return x;
}
)");
  const Function& f = *p->find("f");
  const Instruction* k = nullptr;
  for (const auto& in : f.blocks[0].insts)
    if (in.op == Opcode::Store && in.var == "k") k = &in;
  ASSERT_NE(k, nullptr);
  auto s = slice(f, {k->uid, {}});
  EXPECT_EQ(s, (std::set<int>{k->uid}));
}

TEST(SideEffects, Classification) {
  auto p = parse_program(R"(
int g;
int reads(char *s) { return s[0] + g; }
void sets_global(int v) { g = v; }
void writes_param(char *s) { s[0] = 1; }
void writes_output(char *s, char **end) { *end = s + 1; }
void writes_local(int n) { char buf[4]; buf[0] = n; }
void allocates(int n) { char *p = malloc(n); }
void prints(int n) { printf("%d\n", n); }
void indirect(int v) { sets_global(v); }
int main() { return 0; }
)");
  auto pure = [&](const std::string& f, std::set<std::string> out = {}) {
    return side_effect_check(*p, *p->find(f), out);
  };
  EXPECT_TRUE(pure("reads").pure);
  EXPECT_FALSE(pure("sets_global").pure);
  EXPECT_EQ(pure("sets_global").reason, "writes global g");
  EXPECT_FALSE(pure("writes_param").pure);
  EXPECT_TRUE(pure("writes_output", {"end"}).pure);
  EXPECT_FALSE(pure("writes_output").pure);
  EXPECT_TRUE(pure("writes_local").pure);
  EXPECT_EQ(pure("allocates").reason, "calls malloc");
  EXPECT_EQ(pure("prints").reason, "calls printf");
  EXPECT_EQ(pure("indirect").reason, "calls sets_global, which writes global g");
}

// First read through `in` in decode: the loop condition.
const Instruction& decode_access(const Program& p) {
  const Function& f = *p.find("decode");
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (in.op == Opcode::Load && in.var.empty()) return in;
  throw std::logic_error("no read");
}

AllocLookup udf_alloc(const Program& p) {
  return [&p](const std::string& func, int) -> std::optional<AllocExprs> {
    if (func != "udf_decode") return std::nullopt;
    const Function& f = *p.find(func);
    return AllocExprs{sym_var("data", f.var_type("data"), func), sym_var("datalen", f.var_type("datalen"), func)};
  };
}

FaultRecord trigger_fault(const Program& p) {
  auto r = execute(p, load_input(corpus_path("udf_decode/trigger.json")));
  EXPECT_EQ(r.status, ExecResult::Status::Faulted);
  return r.fault;
}

TEST(CloneLoop, DecodeMatchesReferenceClone) {
  auto p = corpus_program("udf_decode");
  FaultRecord fault = trigger_fault(*p);
  ASSERT_EQ(fault.kind, FaultKind::OobRead);
  ASSERT_EQ(fault.inst_uid, decode_access(*p).uid);
  auto r = clone_loop(*p, fault, decode_access(*p), udf_alloc(*p));
  ASSERT_EQ(r.clones.size(), 1u);
  EXPECT_EQ(r.clones[0].name, "decode_clone");
  EXPECT_EQ(r.clones[0].plain,
            "void decode_clone(const char *in, char *out, char **start, char **end) {\n"
            "\tchar c;\n"
            "\t*start = in;\n"
            "\twhile ((c = *(in++)) != '\\0') {\n"
            "\t\tif (c == '\\1')\n"
            "\t\t\tc = *(in++) - 1;\n"
            "\t}\n"
            "\t*end = in;\n"
            "}\n");
  EXPECT_EQ(r.func, "udf_decode");
  EXPECT_EQ(r.prelude(false), "char *start, *end;\ndecode_clone(data + 1, ret, &start, &end);\n");
  EXPECT_EQ(r.limit, "data + datalen");
  const Stmt* at = p->stmt(r.placement_stmt);
  EXPECT_EQ(at->kind, StmtKind::If);
}

// Statements as written, ignoring layout and braces.
std::multiset<std::string> statements(const std::string& text) {
  std::multiset<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) {
    std::string t;
    for (char c : l)
      if (c != ' ' && c != '\t') t += c;
    if (t.empty() || t == "}" || t == "{") continue;
    if (t.back() == '{') t.pop_back();
    out.insert(t);
  }
  return out;
}

TEST(CloneLoop, DecodeStatementDifference) {
  auto p = corpus_program("udf_decode");
  auto r = clone_loop(*p, trigger_fault(*p), decode_access(*p), udf_alloc(*p));
  const auto& fd = *p->find("decode")->decl;
  auto orig = statements(std::string(fd.span.text(p->source())));
  auto clone = statements(r.clones[0].plain);
  std::multiset<std::string> removed, added;
  std::set_difference(orig.begin(), orig.end(), clone.begin(), clone.end(), std::inserter(removed, removed.end()));
  std::set_difference(clone.begin(), clone.end(), orig.begin(), orig.end(), std::inserter(added, added.end()));
  EXPECT_EQ(removed, (std::multiset<std::string>{"intdecode(constchar*in,char*out)", "inti;", "i=0;",
                                                 "out[i++]=c;", "returni;"}));
  EXPECT_EQ(added, (std::multiset<std::string>{"voiddecode_clone(constchar*in,char*out,char**start,char**end)",
                                               "*start=in;", "*end=in;"}));
}

TEST(CloneLoop, CloneIsPure) {
  auto p = corpus_program("udf_decode");
  auto r = clone_loop(*p, trigger_fault(*p), decode_access(*p), udf_alloc(*p));
  for (const std::string& text : {r.clones[0].plain, r.clones[0].hardened}) {
    auto q = parse_program(p->source() + "\n" + text);
    auto pu = side_effect_check(*q, *q->find("decode_clone"), {"start", "end"});
    EXPECT_TRUE(pu.pure) << pu.reason;
  }
}

TEST(CloneLoop, HardenedGuards) {
  auto p = corpus_program("udf_decode");
  auto r = clone_loop(*p, trigger_fault(*p), decode_access(*p), udf_alloc(*p));
  const std::string& h = r.clones[0].hardened;
  EXPECT_NE(h.find("char *limit, char **start, char **end)"), std::string::npos) << h;
  EXPECT_NE(h.find("if (in + 1 > limit) { *end = in + 1; return; }"), std::string::npos) << h;
  EXPECT_EQ(r.prelude(true), "char *start, *end;\ndecode_clone(data + 1, ret, data + datalen, &start, &end);\n");
}

// Splices the clone and its call into the program.
std::string with_clone(const Program& p, const ClonedRange& r, bool hardened) {
  const auto& src = p.source();
  const Stmt* at = p.stmt(r.placement_stmt);
  std::string ind = line_indent(src, at->span.begin);
  std::string call;
  std::istringstream lines(r.prelude(hardened));
  for (std::string l; std::getline(lines, l);) call += l + "\n" + ind;
  size_t fstart = p.find(r.func)->decl->span.begin;
  const auto& c = r.clones.back();
  return apply_edits(src, {Edit{{fstart, fstart, 0, 0}, (hardened ? c.hardened : c.plain) + "\n"},
                           Edit{{at->span.begin, at->span.begin, 0, 0}, call}});
}

struct RangeObs : ExecObserver {
  std::optional<uint64_t> first, last, start, end;
  void on_inst(const MachineView& v, const Instruction& in, const std::optional<uint64_t>&) override {
    const std::string& fn = v.function().name;
    if (fn == "decode" && !first) first = v.var("in");
    if (fn == "decode" && in.op == Opcode::Ret) last = v.var("in");
    if (fn == "udf_decode" && in.op == Opcode::Call && in.callee == "decode_clone") {
      start = v.load(*v.var_address("start"), pointer_to(type_char()));
      end = v.load(*v.var_address("end"), pointer_to(type_char()));
    }
  }
};

// Strings whose escapes are always followed by a byte: the original never
// reads past the terminator.
std::string benign_escaped(std::mt19937& rng) {
  std::string s = "x";
  int n = static_cast<int>(rng() % 12);
  for (int i = 0; i < n; ++i) {
    if (rng() % 4 == 0) {
      s += '\1';
      s += static_cast<char>('a' + rng() % 3);
    } else {
      s += static_cast<char>('a' + rng() % 3);
    }
  }
  return s;
}

TEST(CloneLoopProperty, CloneReproducesPointerExtremes) {
  auto p = corpus_program("udf_decode");
  auto r = clone_loop(*p, trigger_fault(*p), decode_access(*p), udf_alloc(*p));
  auto q = parse_program(with_clone(*p, r, false));
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    std::string arg = benign_escaped(rng);
    RangeObs o;
    ExecOptions opts;
    opts.observer = &o;
    auto res = execute(*q, TriggerInput{{"udf", arg}, {}}, opts);
    ASSERT_NE(res.status, ExecResult::Status::Faulted) << arg;
    ASSERT_TRUE(o.first && o.last && o.start && o.end) << arg;
    EXPECT_EQ(*o.start, *o.first) << arg;
    EXPECT_EQ(*o.end, *o.last) << arg;
  }
}

TEST(CloneLoop, HardenedCloneStopsAtTheLimit) {
  auto p = corpus_program("udf_decode");
  auto r = clone_loop(*p, trigger_fault(*p), decode_access(*p), udf_alloc(*p));
  auto q = parse_program(with_clone(*p, r, true));
  RangeObs o;
  ExecOptions opts;
  opts.observer = &o;
  auto res = execute(*q, load_input(corpus_path("udf_decode/trigger.json")), opts);
  // The clone itself stays in bounds; the original decode still faults
  // since no check was inserted.
  ASSERT_EQ(res.status, ExecResult::Status::Faulted);
  EXPECT_EQ(res.fault.func, "decode");
  ASSERT_TRUE(o.end);
  const AllocationRecord* a = res.alloc(res.fault.alloc_id);
  EXPECT_GT(*o.end, a->base + a->size);
}

TEST(CloneLoop, MallocInSliceAborts) {
  auto p = parse_program(R"(
int fill(char *src, int n) {
  char *buf = malloc(n);
  if (buf == NULL)
    return -1;
  char *d = buf;
  while (*src != 0)
    *(d++) = *(src++);
  return 0;
}
int main(int argc, char **argv) { return fill(argv[1], 2); }
)");
  auto res = execute(*p, TriggerInput{{"m", "abcdef"}, {}});
  ASSERT_EQ(res.status, ExecResult::Status::Faulted);
  const Instruction& access = *p->inst(res.fault.inst_uid);
  auto why = abort_of([&] {
    clone_loop(*p, res.fault, access, [&](const std::string&, int) -> std::optional<AllocExprs> {
      return AllocExprs{sym_var("buf", pointer_to(type_char()), "fill"), sym_var("n", type_int(), "fill")};
    });
  });
  EXPECT_NE(why.find("clone: fill_clone has side effects"), std::string::npos) << why;
}

TEST(CloneLoop, WriteAtTheFaultAborts) {
  auto p = corpus_program("grid_copy");
  auto res = execute(*p, load_input(corpus_path("grid_copy/trigger.json")));
  ASSERT_EQ(res.status, ExecResult::Status::Faulted);
  auto why = abort_of([&] {
    clone_loop(*p, res.fault, *p->inst(res.fault.inst_uid),
               [](const std::string&, int) -> std::optional<AllocExprs> { return std::nullopt; });
  });
  EXPECT_EQ(why, "clone: bar_clone has side effects: it writes memory through a pointer");
}

TEST(CloneLoop, AllocationInTheSameFunction) {
  auto p = parse_program(R"(
int count(char *s, char *lim, int size) {
  int n = 0;
  while (*s != ',') {
    s++;
    n++;
  }
  return n;
}
int main(int argc, char **argv) {
  char *b = malloc(4);
  memcpy(b, argv[1], 4);
  return count(b, b + 4, 4);
}
)");
  auto res = execute(*p, TriggerInput{{"c", "abcdef"}, {}});
  ASSERT_EQ(res.status, ExecResult::Status::Faulted);
  auto r = clone_loop(*p, res.fault, *p->inst(res.fault.inst_uid),
                      [&](const std::string& fn, int) -> std::optional<AllocExprs> {
                        if (fn != "count") return std::nullopt;
                        return AllocExprs{sym_var("s", pointer_to(type_char()), fn), sym_var("size", type_int(), fn)};
                      });
  ASSERT_EQ(r.clones.size(), 1u);
  EXPECT_EQ(r.func, "count");
  const auto& body = p->find("count")->decl->body->body;
  EXPECT_EQ(r.placement_stmt, body.front()->id);
  EXPECT_EQ(r.args, (std::vector<std::string>{"s", "lim", "size"}));
  EXPECT_EQ(r.clones[0].plain.find("n++"), std::string::npos) << r.clones[0].plain;
}

TEST(CloneLoop, IntermediateFunctionsAreCloned) {
  auto p = parse_program(R"(
int scan(char *s) {
  int n = 0;
  while (*(s++) != ';')
    n++;
  return n;
}
void middle(char *s, int k) {
  char *t = s + k;
  scan(t);
}
int main(int argc, char **argv) {
  int len = strlen(argv[1]);
  char *b = malloc(len);
  memcpy(b, argv[1], len);
  middle(b, 1);
  return 0;
}
)");
  auto res = execute(*p, TriggerInput{{"c", "abcdef"}, {}});
  ASSERT_EQ(res.status, ExecResult::Status::Faulted);
  auto r = clone_loop(*p, res.fault, *p->inst(res.fault.inst_uid),
                      [&](const std::string& fn, int) -> std::optional<AllocExprs> {
                        if (fn != "main") return std::nullopt;
                        return AllocExprs{sym_var("b", pointer_to(type_char()), fn), sym_var("len", type_int(), fn)};
                      });
  ASSERT_EQ(r.clones.size(), 2u);
  EXPECT_EQ(r.clones[1].name, "middle_clone");
  EXPECT_EQ(r.clones[1].plain,
            "void middle_clone(char *s, int k, char **start, char **end) {\n"
            "  char *t = s + k;\n"
            "  scan_clone(t, start, end);\n"
            "}\n");
  EXPECT_EQ(r.prelude(true), "char *start, *end;\nmiddle_clone(b, 1, b + len, &start, &end);\n");
  // Running the hardened chain on the trigger reports an end past the buffer.
  std::string src = p->source();
  const Stmt* at = p->stmt(r.placement_stmt);
  size_t fstart = p->find("main")->decl->span.begin;
  src = apply_edits(src, {Edit{{fstart, fstart, 0, 0}, r.clones[0].hardened + r.clones[1].hardened},
                          Edit{{at->span.begin, at->span.begin, 0, 0}, r.prelude(true)}});
  auto q = parse_program(src);
  struct Obs : ExecObserver {
    std::optional<uint64_t> end;
    void on_inst(const MachineView& v, const Instruction& in, const std::optional<uint64_t>&) override {
      if (v.function().name == "main" && in.op == Opcode::Call && in.callee == "middle_clone")
        end = v.load(*v.var_address("end"), pointer_to(type_char()));
    }
  } o;
  ExecOptions opts;
  opts.observer = &o;
  auto res2 = execute(*q, TriggerInput{{"c", "abcdef"}, {}}, opts);
  EXPECT_EQ(res2.fault.func, "scan");
  ASSERT_TRUE(o.end);
  const AllocationRecord* a = res2.alloc(res2.fault.alloc_id);
  EXPECT_EQ(*o.end, a->base + a->size + 1);
}

}  // namespace
}  // namespace patchsmith
