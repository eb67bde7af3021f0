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

#include <set>
#include <string>
#include <vector>

#include "patchsmith/executor.hpp"
#include "patchsmith/ir.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith {

struct ScopeEntry {
  std::string func;
  int at_uid = -1;  // the expression holds just before this instruction
  SymRef expr;
};

// Translations of one expression, innermost frame first. The first entry is
// the expression in its own function.
struct ScopeMap {
  std::vector<ScopeEntry> entries;

  const ScopeEntry* find(const std::string& func) const;
  std::vector<std::string> scopes() const;
};

/// A variable is nonlocal at `uid` when it is a parameter or global whose
/// only reaching definition is the value on function entry.
bool is_nonlocal_var(const Program& p, const Function& f, int uid, const std::string& var);

/// Rewrites `e` (valid just before `uid`) over nonlocal variables only, by
/// chasing unique reaching definitions. Null when some variable has no
/// such definition.
SymRef make_nonlocal_expr(const Program& p, const Function& f, int uid, const SymRef& e, const ExprCache& ex);

/// Nonlocal expression for the value of `var` just before `uid`, or null.
SymRef find_nonlocal_def_for_var(const Program& p, const Function& f, int uid, const std::string& var,
                                 const ExprCache& ex);

/// Replaces the callee's parameters in `e` by the call's argument
/// expressions.
SymRef substitute_parms_with_args(const Program& p, const Instruction& call, const SymRef& e, const ExprCache& ex);

/// Translates `e`, valid before `uid`, into each caller on `stack` (call
/// uids, innermost first) until nonlocalization fails.
ScopeMap translate_se_to_scopes(const Program& p, const std::vector<int>& stack, const SymRef& e, int uid,
                                const ExprCache& ex);

struct Convergence {
  std::string func;
  int access_frame = -1;  // index into the access stack (0 = faulting frame)
  int alloc_frame = -1;   // index into the allocation stack
  SymRef access_lo, access_hi, alloc_size;
  int access_uid = -1;     // where the access range holds in `func`
  int alloc_uid = -1;      // the call in `func` leading to the allocation
  int placement_stmt = -1;
};

/// Picks the frame closest to the fault in which the access range and the
/// allocation size are both known. Throws Abort("converge", ...).
Convergence converge(const Program& p, const ScopeMap& lo, const ScopeMap& hi, const ScopeMap& size,
                     const FaultRecord& fault, const AllocationRecord& alloc);

/// Checks on the trace that no variable of `vars` (and, when `memory` is
/// set, no memory) is written in `func` between the start of statement
/// `stmt` and the later of `uids`. Returns the offending write, empty when
/// none.
std::string placement_conflict(const Program& p, const ExecResult& trace, const std::string& func, int stmt,
                               const std::vector<int>& uids, const std::set<std::string>& vars, bool memory);

}  // namespace patchsmith
