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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patchsmith/executor.hpp"
#include "patchsmith/ir.hpp"
#include "patchsmith/loops.hpp"
#include "patchsmith/source.hpp"
#include "patchsmith/symexpr.hpp"
#include "patchsmith/vuln.hpp"

namespace patchsmith {

/// Casts the integer variables of `e` narrower than 64 bits to long so the
/// arithmetic above them cannot wrap.
SymRef widen(const SymRef& e);

/// Byte offset of pointer `e` from `base`, following pointer arithmetic and
/// pointer casts down to a node equal to `base`. Null when `e` is not
/// derived from `base`.
SymRef byte_offset(const SymRef& e, const SymRef& base);

/// `hi > base + size || lo < base` with the base cancelled: the access
/// side becomes a byte offset evaluated in 64 bits and a lower clause that
/// cannot hold is dropped. Null when the access range is not expressed
/// relative to `base`.
SymRef range_predicate(const SymRef& lo, const SymRef& hi, const SymRef& base, const SymRef& size);

/// `end > base + size || start < base` over the outputs of a cloned loop.
SymRef cloned_predicate(const ClonedRange& c);

/// True exactly when `a op b` overflows `type`. Throws Abort("predicate",
/// ...) for operations without a supported check.
SymRef overflow_predicate(SymOp op, const SymRef& a, const SymRef& b, const TypeRef& type);

struct ErrorHandler {
  enum class Kind { GotoLabel, ReturnError };
  Kind kind = Kind::ReturnError;
  std::string label;      // GotoLabel
  std::string statement;  // text inserted after the check
  SourceSpan exemplar;    // existing goto or return
};

/// Existing error handling in `f`: a `goto L` whose label code returns a
/// constant, else a `return C` (C negative or NULL) on a checking branch.
std::optional<ErrorHandler> find_error_handler(const Program& p, const Function& f);

enum class PatchKind { CheckAndError, RepairCast };

const char* patch_kind_name(PatchKind k);

struct Patch {
  PatchKind kind = PatchKind::CheckAndError;
  SymRef predicate;  // check kind
  std::string func;
  int placement_stmt = -1;
  std::string handler;
  std::vector<Edit> edits;  // sorted, non-overlapping
  // Check kind: the inserted `if` starts `check_offset` bytes into the
  // replacement of edit `check_edit`.
  int check_edit = -1;
  size_t check_offset = 0;
  // Repair kind: the rewritten operation.
  int repair_line = 0;
  std::string repair_text;

  std::string apply(const std::string& source) const { return apply_edits(source, edits); }
  /// Offset of the inserted check in the patched source.
  size_t patched_check_offset() const;
};

// Extra edits for a range computed by cloned functions.
struct CloneEdits {
  std::vector<std::string> defs;  // function definitions, placed before the patched function
  std::string prelude;            // statements placed before the check
  std::set<std::string> vars;     // variables the prelude declares
};

/// `if (pred) handler` before statement `stmt` of `func`. Throws
/// Abort("synthesize", ...).
Patch synthesize_check_and_error(const Program& p, const SymRef& pred, const ErrorHandler& handler,
                                 const std::string& func, int stmt, const CloneEdits& clone = {});

/// Casts one operand of the overflowing operation to the type of the
/// variable receiving its result, when that type is strictly wider.
std::optional<Patch> synthesize_repair_cast(const Program& p, const VulnReport& v);

struct ValidationVerdict {
  bool ok = true;
  std::string clause;  // "reparse", "trigger" or "benign"
  std::string detail;
};

/// Reparses the patched source, reruns the trigger (no fault; the handler
/// runs or the repaired operation yields the exact value) and compares the
/// benign runs of both builds.
ValidationVerdict validate_patch(const Program& p, const Patch& patch, const TriggerInput& trigger,
                                 const std::vector<TriggerInput>& benign);

}  // namespace patchsmith
