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

#include "patchsmith/arith.hpp"
#include "patchsmith/executor.hpp"
#include "patchsmith/frontend.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::corpus_program;

TriggerInput args(std::vector<std::string> v) { return TriggerInput{std::move(v), {}}; }

const Instruction& inst(const Program& p, int uid) { return *p.inst(uid); }

TEST(Input, ParsesArgvAndHex) {
  auto in = parse_input(R"({"argv": ["a", "b c"], "stdin_hex": "41420a"})");
  EXPECT_EQ(in.argv, (std::vector<std::string>{"a", "b c"}));
  EXPECT_EQ(in.stdin_bytes, "AB\n");
  EXPECT_EQ(parse_input(input_to_json(in)).stdin_bytes, "AB\n");
  EXPECT_THROW(parse_input("{}"), Error);
}

TEST(Execute, GridBenignRunPrintsRows) {
  auto p = corpus_program("grid_copy");
  auto r = execute(*p, args({"grid_copy", "0203123456"}));
  ASSERT_EQ(r.status, ExecResult::Status::Exited) << r.error;
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "123\n456\n");
}

TEST(Execute, GridTriggerOverflowsInCopyLoop) {
  auto p = corpus_program("grid_copy");
  auto r = execute(*p, args({"grid_copy", "0203123456789"}));
  ASSERT_EQ(r.status, ExecResult::Status::Faulted) << r.error;
  EXPECT_EQ(r.fault.kind, FaultKind::OobWrite);
  EXPECT_EQ(r.fault.func, "bar");
  EXPECT_EQ(r.fault.direction, Direction::Upper);
  EXPECT_EQ(r.fault.access_size, 1u);
  const Instruction& st = inst(*p, r.fault.inst_uid);
  EXPECT_EQ(st.op, Opcode::Store);
  EXPECT_EQ(p->source().substr(st.span.begin, st.span.end - st.span.begin), "*(p++) = *(q++)");
  const AllocationRecord* a = r.alloc(r.fault.alloc_id);
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->kind, AllocKind::Heap);
  EXPECT_EQ(a->size, 9u);
  EXPECT_EQ(r.fault.address, a->base + 9);
  EXPECT_EQ(a->func, "foo_malloc");
  // bar was called from foo, which main called.
  ASSERT_EQ(r.fault.call_stack.size(), 2u);
  EXPECT_EQ(inst(*p, r.fault.call_stack[0]).callee, "bar");
  EXPECT_EQ(inst(*p, r.fault.call_stack[1]).callee, "foo");
  ASSERT_EQ(a->call_stack.size(), 3u);
  EXPECT_EQ(inst(*p, a->call_stack[0]).callee, "malloc");
  EXPECT_EQ(inst(*p, a->call_stack[1]).callee, "foo_malloc");
}

TEST(Execute, MissingArgumentTakesEarlyReturn) {
  auto p = corpus_program("grid_copy");
  auto r = execute(*p, args({"grid_copy"}));
  EXPECT_EQ(r.status, ExecResult::Status::Exited);
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Arith, ScaledLocationWrapsNegative) {
  // 2048 * (2^20 + 1) = 2^31 + 2048, which is 2048 - 2^31 modulo 2^32.
  const int64_t math = int64_t{2048} * ((int64_t{1} << 20) + 1);
  const int64_t wrapped = math - (int64_t{1} << 32);
  EXPECT_EQ(wrapped, -2147481600);
  auto r = arith_bin(BinKind::Mul, 2048, type_int(), (1u << 20) + 1, type_int(), type_int(), 1);
  EXPECT_TRUE(r.overflow);
  EXPECT_EQ(as_signed(r.bits), wrapped);
}

ExecResult run_src(const std::string& src, std::vector<std::string> argv = {"prog"},
                   ExecOptions o = {}) {
  auto p = parse_program(src);
  return execute(*p, args(std::move(argv)), o);
}

TEST(Execute, ProductWrapsToZeroSizeAllocation) {
  auto p = parse_program(R"(
int main(int argc, char **argv) {
  int n = 65536;
  int m = 65536;
  char *b = malloc(n * m);
  b[0] = 1;
  return 0;
}
)");
  auto r = execute(*p, args({"prog"}));
  ASSERT_EQ(r.status, ExecResult::Status::Faulted);
  EXPECT_EQ(r.fault.kind, FaultKind::ZeroSizeAllocOverflow);
  EXPECT_EQ(inst(*p, r.fault.inst_uid).callee, "malloc");
  ASSERT_GE(r.fault.overflow_uid, 0);
  EXPECT_EQ(inst(*p, r.fault.overflow_uid).bin, BinKind::Mul);
  ASSERT_TRUE(detect_integer_overflow_to_zero_alloc(r));
}

TEST(Execute, UnsignedIncrementWrapsToZeroSizeAllocation) {
  auto r = run_src(R"(
int main(int argc, char **argv) {
  unsigned n = 4294967295;
  char *b = malloc(n + 1);
  return 0;
}
)");
  ASSERT_EQ(r.status, ExecResult::Status::Faulted);
  EXPECT_EQ(r.fault.kind, FaultKind::ZeroSizeAllocOverflow);
}

TEST(Execute, PlainZeroSizeAllocationIsNotAFault) {
  auto r = run_src(R"(
int main(int argc, char **argv) {
  char *b = malloc(0);
  free(b);
  return 7;
}
)");
  EXPECT_EQ(r.status, ExecResult::Status::Exited);
  EXPECT_EQ(r.exit_code, 7);
  EXPECT_FALSE(detect_integer_overflow_to_zero_alloc(r));
}

TEST(Execute, FieldAccessPastSmallerObjectIsBadCast) {
  auto p = parse_program(R"(
struct small { int a; };
struct big { int a; int b; long c; };
int main(int argc, char **argv) {
  struct small *s = malloc(sizeof(struct small));
  struct big *b = (struct big *)s;
  b->c = 5;
  return 0;
}
)");
  auto r = execute(*p, args({"prog"}));
  ASSERT_EQ(r.status, ExecResult::Status::Faulted);
  EXPECT_EQ(r.fault.kind, FaultKind::OobWrite);
  EXPECT_EQ(detect_bad_cast(*p, r).kind, FaultKind::BadCastAccess);
}

TEST(Execute, FieldAccessThroughLoopPointerStaysOverflow) {
  auto p = parse_program(R"(
struct pt { int x; int y; };
int main(int argc, char **argv) {
  struct pt *a = malloc(16);
  struct pt *p = a;
  for (int i = 0; i < 3; i++) {
    p->x = i;
    p++;
  }
  return 0;
}
)");
  auto r = execute(*p, args({"prog"}));
  ASSERT_EQ(r.status, ExecResult::Status::Faulted);
  EXPECT_EQ(r.fault.kind, FaultKind::OobWrite);
  EXPECT_EQ(detect_bad_cast(*p, r).kind, FaultKind::OobWrite);
}

TEST(Execute, LowerBoundViolation) {
  auto r = run_src(R"(
int main(int argc, char **argv) {
  int buf[4];
  int i = 0 - 1;
  return buf[i];
}
)");
  ASSERT_EQ(r.status, ExecResult::Status::Faulted);
  EXPECT_EQ(r.fault.kind, FaultKind::OobRead);
  EXPECT_EQ(r.fault.direction, Direction::Lower);
  EXPECT_EQ(r.allocs[static_cast<size_t>(r.fault.alloc_id)].kind, AllocKind::Stack);
}

TEST(Execute, RuntimeErrors) {
  auto null = run_src("int main(int argc, char **argv) { int *p = 0; return *p; }");
  EXPECT_EQ(null.status, ExecResult::Status::Error);
  EXPECT_EQ(null.error, "null pointer dereference");
  auto div = run_src("int main(int argc, char **argv) { int z = argc - 1; return 5 / z; }");
  EXPECT_EQ(div.error, "division by zero");
  auto uaf = run_src(
      "int main(int argc, char **argv) { char *b = malloc(4); free(b); return b[0]; }");
  EXPECT_EQ(uaf.error, "use after free");
}

TEST(Execute, ExitAndPrintf) {
  auto r = run_src(R"(
int main(int argc, char **argv) {
  printf("%d %u %s %c %x %%\n", 0 - 3, 4294967295, argv[0], 65, 255);
  exit(4);
  return 0;
}
)");
  EXPECT_EQ(r.status, ExecResult::Status::Exited);
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_EQ(r.out, "-3 4294967295 prog A ff %\n");
}

TEST(Execute, BudgetAndUnmodeledExternal) {
  ExecOptions o;
  o.step_budget = 1000;
  EXPECT_THROW(run_src("int main(int argc, char **argv) { while (1) { } return 0; }", {"p"}, o),
               Abort);
  try {
    run_src("int main(int argc, char **argv) { return atoi(argv[0]); }");
    FAIL() << "expected abort";
  } catch (const Abort& a) {
    EXPECT_EQ(a.stage(), "execute");
  } catch (const Error&) {
    // the frontend may already reject the unknown callee
  }
}

TEST(Execute, ObserverSeesFrameValues) {
  struct Obs : ExecObserver {
    std::vector<uint64_t> sizes;
    void on_inst(const MachineView& v, const Instruction& in, const std::optional<uint64_t>&) override {
      if (in.op == Opcode::Call && in.callee == "bar") {
        FrameEnv env(v);
        auto e = sym_var("size", type_int(), "foo");
        if (auto x = eval(e, env)) sizes.push_back(*x);
      }
    }
  } obs;
  ExecOptions o;
  o.observer = &obs;
  auto p = corpus_program("grid_copy");
  execute(*p, args({"grid_copy", "0203123456"}), o);
  EXPECT_EQ(obs.sizes, (std::vector<uint64_t>{6}));
}

// Independent byte-level model of the grid copy: for each cell the source
// byte is read, then the destination byte written.
struct GridOutcome {
  FaultKind kind = FaultKind::None;
  uint64_t offset = 0;
};

GridOutcome grid_model(int rows, int cols, int cells) {
  const uint64_t src_len = 4 + static_cast<uint64_t>(cells) + 1;
  const uint64_t cap = static_cast<uint64_t>(rows * (cols + 1) + 1);
  uint64_t q = 0, w = 0;
  while (q < static_cast<uint64_t>(cells)) {
    for (int j = 0; j < cols; ++j) {
      if (4 + q >= src_len) return {FaultKind::OobRead, 4 + q};
      if (w >= cap) return {FaultKind::OobWrite, w};
      ++q;
      ++w;
    }
    if (w >= cap) return {FaultKind::OobWrite, w};
    ++w;
  }
  if (w >= cap) return {FaultKind::OobWrite, w};
  return {};
}

TEST(Property, GridFaultsMatchByteModel) {
  auto p = corpus_program("grid_copy");
  std::mt19937_64 rng(7);
  int faults = 0;
  for (int iter = 0; iter < 300; ++iter) {
    int rows = static_cast<int>(rng() % 6);
    int cols = 1 + static_cast<int>(rng() % 6);
    int cells = static_cast<int>(rng() % 40);
    char hdr[8];
    std::snprintf(hdr, sizeof hdr, "%02d%02d", rows, cols);
    std::string arg = hdr;
    for (int k = 0; k < cells; ++k) arg += static_cast<char>('a' + k % 26);
    auto r = execute(*p, args({"grid_copy", arg}));
    auto m = grid_model(rows, cols, cells);
    SCOPED_TRACE(arg);
    if (m.kind == FaultKind::None) {
      ASSERT_EQ(r.status, ExecResult::Status::Exited) << r.error;
      continue;
    }
    ++faults;
    ASSERT_EQ(r.status, ExecResult::Status::Faulted) << r.error;
    ASSERT_EQ(r.fault.kind, m.kind);
    const AllocationRecord* a = r.alloc(r.fault.alloc_id);
    ASSERT_NE(a, nullptr);
    EXPECT_EQ(a->kind, m.kind == FaultKind::OobRead ? AllocKind::Input : AllocKind::Heap);
    EXPECT_EQ(r.fault.address - a->base, m.offset);
  }
  EXPECT_GT(faults, 50);
}

TEST(Property, ExecutionIsDeterministic) {
  auto p = corpus_program("grid_copy");
  std::mt19937_64 rng(9);
  ExecOptions o;
  o.record_trace = true;
  for (int iter = 0; iter < 50; ++iter) {
    std::string arg = "0" + std::to_string(rng() % 4) + "0" + std::to_string(1 + rng() % 4);
    for (uint64_t k = rng() % 20; k > 0; --k) arg += static_cast<char>('0' + rng() % 10);
    auto a = execute(*p, args({"x", arg}), o);
    auto b = execute(*p, args({"x", arg}), o);
    ASSERT_EQ(a.status, b.status);
    ASSERT_EQ(a.out, b.out);
    ASSERT_EQ(a.fault.address, b.fault.address);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
      ASSERT_EQ(a.trace[i].uid, b.trace[i].uid);
      ASSERT_EQ(a.trace[i].value, b.trace[i].value);
    }
  }
}

// Every access that the machine lets through lies inside a live allocation.
TEST(Property, CheckedAccessesStayInBounds) {
  struct Obs : ExecObserver {
    std::vector<bool> ok;
    void on_access(const MachineView& v, const Instruction&, uint64_t a, uint64_t n, bool) override {
      const AllocationRecord* r = v.alloc_at(a);
      ok.push_back(r && a >= r->base && a + n <= r->base + r->size);
    }
  };
  auto p = corpus_program("grid_copy");
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 100; ++iter) {
    std::string arg = "0" + std::to_string(rng() % 4) + "0" + std::to_string(1 + rng() % 4);
    for (uint64_t k = rng() % 20; k > 0; --k) arg += static_cast<char>('0' + rng() % 10);
    Obs obs;
    ExecOptions o;
    o.observer = &obs;
    auto r = execute(*p, args({"x", arg}), o);
    ASSERT_FALSE(obs.ok.empty());
    bool faulted = r.status == ExecResult::Status::Faulted;
    for (size_t i = 0; i + 1 < obs.ok.size(); ++i) ASSERT_TRUE(obs.ok[i]) << arg << " access " << i;
    EXPECT_EQ(obs.ok.back(), !faulted) << arg;
  }
}

}  // namespace
}  // namespace patchsmith
