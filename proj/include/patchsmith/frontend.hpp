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

#include <map>
#include <memory>
#include <string>

#include "patchsmith/ast.hpp"
#include "patchsmith/ir.hpp"

namespace patchsmith {

/// Parses Mini-C into a typed AST. Throws Error with "file:line:col: ..." on
/// syntax errors and "unsupported construct: X" for C features outside the
/// subset.
std::shared_ptr<TranslationUnit> parse_unit(std::string source, std::string file = "<input>");

/// Lowers a typed AST to the pseudo-instruction IR.
std::shared_ptr<Program> lower(std::shared_ptr<TranslationUnit> tu);

/// parse_unit followed by lower.
std::shared_ptr<Program> parse_program(std::string source, std::string file = "<input>");

/// Reads and parses a file.
std::shared_ptr<Program> load_program(const std::string& path);

struct SourceMap {
  std::map<int, SourceSpan> inst_spans;   // uid -> expression span
  std::map<int, int> inst_stmt;           // uid -> owning statement id
  std::map<int, SourceSpan> stmt_spans;   // statement id -> span
  std::map<std::string, SourceSpan> function_bodies;
};

SourceMap build_source_map(const Program& p);

/// Built-in signatures for intrinsics/modeled externals; nullopt otherwise.
struct ExternSig {
  TypeRef ret;
  std::vector<TypeRef> params;
  bool variadic = false;
};
const ExternSig* extern_signature(const std::string& name);

}  // namespace patchsmith
