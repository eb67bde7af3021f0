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


#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patchsmith/ir.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith {

struct TriggerInput {
  std::vector<std::string> argv;
  std::string stdin_bytes;  // accepted for completeness; no modeled reader
};

/// Parses `{"argv": [...], "stdin_hex": "..."}`. Throws Error.
TriggerInput parse_input(const std::string& json_text);
TriggerInput load_input(const std::string& path);
std::string input_to_json(const TriggerInput& in);

enum class AllocKind { Heap, Stack, Global, Input };

struct AllocationRecord {
  int id = -1;
  uint64_t base = 0;
  uint64_t size = 0;
  AllocKind kind = AllocKind::Heap;
  int site_uid = -1;            // malloc Call; -1 for variables
  std::string func;             // function executing the site
  std::string var;              // variable name for Stack/Global
  std::vector<int> call_stack;  // innermost first: site, then enclosing calls
  int overflow_uid = -1;        // overflowed arithmetic feeding the size
  bool live = true;
};

enum class FaultKind { None, OobRead, OobWrite, ZeroSizeAllocOverflow, BadCastAccess };
enum class Direction { Upper, Lower };

const char* fault_kind_name(FaultKind k);

struct FaultRecord {
  FaultKind kind = FaultKind::None;
  int inst_uid = -1;
  std::string func;
  uint64_t address = 0;
  uint64_t access_size = 0;
  int alloc_id = -1;
  Direction direction = Direction::Upper;
  int overflow_uid = -1;
  std::vector<int> call_stack;  // calls enclosing the faulting frame, innermost first
};

struct TraceEntry {
  int uid = -1;
  uint64_t value = 0;
  int depth = 0;
};

struct ExecResult {
  enum class Status { Exited, Faulted, Error };
  Status status = Status::Exited;
  int exit_code = 0;
  std::string out;
  std::string error;  // runtime error text for Status::Error
  FaultRecord fault;
  std::vector<AllocationRecord> allocs;
  std::vector<TraceEntry> trace;
  std::vector<uint8_t> executed;  // per uid
  uint64_t steps = 0;

  bool ran(int uid) const {
    return uid >= 0 && static_cast<size_t>(uid) < executed.size() && executed[static_cast<size_t>(uid)];
  }
  const AllocationRecord* alloc(int id) const {
    return id >= 0 && static_cast<size_t>(id) < allocs.size() ? &allocs[static_cast<size_t>(id)] : nullptr;
  }
};

class Machine;

// Read-only view of the running machine, for observers.
class MachineView {
 public:
  explicit MachineView(const Machine& m) : m_(m) {}
  const Function& function() const;
  int depth() const;
  std::vector<int> call_stack() const;
  std::optional<uint64_t> var(const std::string& name) const;
  std::optional<uint64_t> var_address(const std::string& name) const;
  std::optional<uint64_t> load(uint64_t addr, const TypeRef& t) const;
  /// Allocation containing `addr`, if any.
  const AllocationRecord* alloc_at(uint64_t addr) const;

 private:
  const Machine& m_;
};

/// Evaluates symbolic expressions against the current frame.
class FrameEnv : public EvalEnv {
 public:
  explicit FrameEnv(const MachineView& v) : v_(v) {}
  std::optional<uint64_t> var(const SymExpr& e) const override;
  std::optional<uint64_t> var_address(const SymExpr& e) const override;
  std::optional<uint64_t> load(uint64_t addr, const TypeRef& t) const override;

 private:
  const MachineView& v_;
};

class ExecObserver {
 public:
  virtual ~ExecObserver() = default;
  /// After `in` executed; `result` is its value when it defines one.
  virtual void on_inst(const MachineView&, const Instruction&, const std::optional<uint64_t>&) {}
  /// Before control enters a defined function; the caller's frame is on top.
  virtual void on_call(const MachineView&, const Instruction&) {}
  /// Before a checked memory access.
  virtual void on_access(const MachineView&, const Instruction&, uint64_t, uint64_t, bool) {}
};

struct ExecOptions {
  uint64_t step_budget = 10'000'000;
  bool record_trace = false;
  ExecObserver* observer = nullptr;
};

/// Runs `p.entry` on the input until exit or the first fault. Throws
/// Abort("execute", ...) for a blown step budget or an unmodeled external.
ExecResult execute(const Program& p, const TriggerInput& in, const ExecOptions& opts = {});

/// Zero-size allocation whose size came from overflowed arithmetic.
std::optional<FaultRecord> detect_integer_overflow_to_zero_alloc(const ExecResult& r);

/// Reclassifies an out-of-bounds access through a struct field, outside any
/// loop that updates the pointer, as a bad-cast access.
FaultRecord detect_bad_cast(const Program& p, const ExecResult& r);

/// One line per executed instruction.
std::string dump_trace(const Program& p, const ExecResult& r);

}  // namespace patchsmith
