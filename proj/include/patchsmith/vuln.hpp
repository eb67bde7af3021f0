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
#include <string>
#include <vector>

#include "patchsmith/executor.hpp"
#include "patchsmith/ir.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith {

enum class VulnClass { BufferOverflow, BadCast, IntegerOverflow };

const char* vuln_class_name(VulnClass c);

// An expression together with the point where it is evaluated.
struct Term {
  std::string name;
  std::string func;
  int at_uid = -1;
  SymRef expr;
};

struct VulnReport {
  VulnClass cls = VulnClass::BufferOverflow;
  int point_uid = -1;
  std::string func;
  FaultRecord fault;
  AllocationRecord alloc;
  std::vector<Term> terms;

  const Term* term(const std::string& name) const;
};

/// Throws Abort("classify", "outside vulnerability domain") for faults that
/// fit none of the classes.
VulnReport classify(const Program& p, const ExecResult& r, const ExprCache& exprs);

/// Aborts when a variable of some term has a static reaching definition that
/// never executed.
void check_reaching_definitions(const Program& p, const ExecResult& r, const std::vector<Term>& terms);

enum class AliasVerdict { MustAlias, MayAlias, MustNotAlias };

const char* alias_verdict_name(AliasVerdict v);

/// Verdict for a pointer Store against a location named in a term (a
/// scalar variable or a field, index or dereference expression).
AliasVerdict alias_query(const Program& p, const Function& f, const Instruction& store, const SymRef& location,
                         const ExprCache& exprs);

/// Aborts when a pointer Store that can reach a term's evaluation point may
/// write one of the locations it reads.
void alias_check(const Program& p, const std::vector<Term>& terms, const ExprCache& exprs);

struct BasePointer {
  Term term;            // pointer to the start of the outermost object
  uint64_t offset = 0;  // byte offset of the accessed field
  uint64_t value = 0;   // concrete base address on the trace
};

/// Follows the faulting access's field chain to its base pointer and, across
/// calls, to the caller's argument while the base is a parameter.
BasePointer find_base_pointer(const Program& p, const VulnReport& v, const ExprCache& exprs);

/// Locations read by an expression: scalar variables and memory nodes.
std::vector<SymRef> read_locations(const SymRef& e);

}  // namespace patchsmith
