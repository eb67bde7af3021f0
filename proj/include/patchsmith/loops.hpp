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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patchsmith/executor.hpp"
#include "patchsmith/ir.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith {

struct LoopBounds {
  std::string iter;
  SymRef initial;
  SymRef end;  // adjusted so that the trip count is (end - initial) / step
};

/// Iterator and bounds from the loop's exit comparison; nullopt when the
/// loop is not analyzable.
std::optional<LoopBounds> find_loop_bounds(const Function& f, const LoopInfo& l, const ExprCache& ex,
                                           std::string* why = nullptr);

struct LoopUpdates {
  std::map<std::string, SymRef> updates;  // fixed per-iteration amounts
  std::set<std::string> reset;            // assigned some other way in these blocks
  bool ok = true;
  std::string why;
};

/// Scans the loop's blocks not yet in `visited` for `v = v +/- c`, marking
/// them visited.
LoopUpdates find_loop_updates(const Function& f, const LoopInfo& l, std::set<int>& visited, const ExprCache& ex);

// One loop of the nest, for diagnostics and tests.
struct AraStep {
  int header = -1;
  LoopBounds bounds;
  std::map<std::string, SymRef> updates;
  SymRef count;
  std::map<std::string, SymRef> acc;  // after multiplying by count
};

struct AccessRange {
  std::string func;
  int at_uid = -1;  // lo and hi hold on entry to the nest (preheader branch)
  SymRef lo;
  SymRef hi;        // exclusive
  Direction dir = Direction::Upper;
  std::string ptr;  // induction variable addressing the access
  // Address designated by the current value of ptr. Over the nest its
  // extremes are lo and hi (one element lower when descending).
  SymRef cursor;
  std::vector<AraStep> steps;
};

/// Access range of `inst` over the normalized loops enclosing `inst`. Returns nullopt
/// (with a reason) when the nest is not analyzable.
std::optional<AccessRange> analyze_access_range(const Function& f, const Instruction& inst, const ExprCache& ex,
                                                std::string* why = nullptr);

/// Loops of `f` enclosing block `b`, innermost first.
std::vector<LoopInfo> enclosing_loops(const Function& f, int b);

/// Block holding instruction `uid`, -1 when absent.
int block_of(const Function& f, int uid);

struct SliceCriteria {
  int uid = -1;
  std::set<std::string> vars;
};

/// Backward slice over value, variable and control dependence. Returns the
/// retained instruction uids. Memory written through pointers is not
/// tracked.
std::set<int> slice(const Function& f, const SliceCriteria& c);

struct Purity {
  bool pure = true;
  std::string reason;
};

/// Whether running `f` can change state a caller observes. Stores through
/// the pointer parameters named in `outputs` are allowed.
Purity side_effect_check(const Program& p, const Function& f, const std::set<std::string>& outputs = {});

// Allocation range expressed in some function's scope.
struct AllocExprs {
  SymRef base;
  SymRef size;  // bytes
};

/// Allocation range valid just before statement `stmt` of `func`, if known.
using AllocLookup = std::function<std::optional<AllocExprs>(const std::string& func, int stmt)>;

struct ClonedFunction {
  std::string of;        // original function
  std::string name;
  std::string plain;     // sliced clone with start/end outputs
  std::string hardened;  // plus a `limit` parameter and bound guards
};

struct ClonedRange {
  std::vector<ClonedFunction> clones;  // innermost first; the last is called from `func`
  std::string func;                    // where the range is computed
  int placement_stmt = -1;             // call goes before this statement
  std::string ptr;                     // pointer variable of the faulting access
  TypeRef ptr_type;
  std::string start, end;              // variables declared in `func`
  std::vector<std::string> args;       // arguments of the clone call, as source text
  AllocExprs alloc;
  std::string limit;                   // allocation end, source text in `func`

  /// Declaration of start/end and the call, one statement per line.
  std::string prelude(bool hardened) const;
};

/// Clones and slices the functions from the faulting access up to the first
/// caller where the allocation range is known. Throws Abort("clone", ...).
ClonedRange clone_loop(const Program& p, const FaultRecord& fault, const Instruction& access,
                       const AllocLookup& lookup);

}  // namespace patchsmith
