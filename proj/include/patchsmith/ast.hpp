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
#include <memory>
#include <string>
#include <vector>

#include "patchsmith/source.hpp"
#include "patchsmith/types.hpp"

namespace patchsmith {

enum class ExprKind {
  IntLit,
  StrLit,
  Name,
  Unary,    // op: - ! ~ * & +
  IncDec,   // op: ++ --, `prefix` selects the form
  Binary,   // arithmetic, bitwise, shift, comparison, && ||
  Assign,   // op: = += -= ...
  Call,
  Cast,
  Index,
  Member,
};

enum class VarScope { Local, Param, Global };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourceSpan span;
  TypeRef type;        // type after array decay is NOT applied; arrays stay arrays
  std::string op;
  std::string name;    // Name, Call callee, Member field
  int64_t value = 0;   // IntLit
  std::string str;     // StrLit (decoded bytes)
  TypeRef cast_type;   // Cast target
  bool prefix = false; // IncDec
  bool arrow = false;  // Member
  VarScope scope = VarScope::Local;  // Name
  std::vector<ExprPtr> kids;
};

enum class StmtKind {
  Decl,
  ExprStmt,
  If,
  While,
  For,
  Goto,
  Label,
  Return,
  Break,
  Continue,
  Block,
  Empty,
};

struct VarDecl {
  std::string name;
  TypeRef type;
  ExprPtr init;
  SourceSpan span;
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::Empty;
  int id = -1;        // program-wide
  int parent = -1;    // enclosing statement id, -1 for a function body
  std::string func;
  SourceSpan span;
  std::vector<VarDecl> decls;  // Decl
  ExprPtr expr;                // ExprStmt, Return value, If/While/For condition
  StmtPtr init;                // For
  ExprPtr step;                // For
  StmtPtr then_stmt;           // If, While/For body, Label target
  StmtPtr else_stmt;           // If
  std::vector<StmtPtr> body;   // Block
  std::string label;           // Goto target, Label name
};

struct Param {
  std::string name;
  TypeRef type;
  SourceSpan span;
};

struct FunctionDecl {
  std::string name;
  TypeRef ret;
  std::vector<Param> params;
  StmtPtr body;
  SourceSpan span;       // whole definition
  SourceSpan ret_span;   // return type text
  SourceSpan params_span;  // text between the parentheses
  std::map<std::string, TypeRef> locals;
};

struct GlobalDecl {
  std::string name;
  TypeRef type;
  ExprPtr init;
  SourceSpan span;
};

struct TranslationUnit {
  std::string file;
  std::string source;
  std::map<std::string, std::shared_ptr<StructDef>> structs;
  std::vector<GlobalDecl> globals;
  std::vector<FunctionDecl> functions;
  std::vector<Stmt*> stmts;  // indexed by Stmt::id

  const FunctionDecl* find_function(const std::string& name) const;
  const GlobalDecl* find_global(const std::string& name) const;
  std::string text(const SourceSpan& span) const {
    return std::string(span.text(source));
  }
};

/// Calls `fn` on every statement nested in `s` (pre-order, including `s`).
template <typename Fn>
void walk_stmts(const StmtPtr& s, Fn&& fn) {
  if (!s) return;
  fn(*s);
  walk_stmts(s->init, fn);
  walk_stmts(s->then_stmt, fn);
  walk_stmts(s->else_stmt, fn);
  for (const auto& b : s->body) walk_stmts(b, fn);
}

/// Calls `fn` on every expression nested in `e` (pre-order).
template <typename Fn>
void walk_exprs(const ExprPtr& e, Fn&& fn) {
  if (!e) return;
  fn(*e);
  for (const auto& k : e->kids) walk_exprs(k, fn);
}

}  // namespace patchsmith
