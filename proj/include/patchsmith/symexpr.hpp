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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patchsmith/ir.hpp"
#include "patchsmith/types.hpp"

namespace patchsmith {

enum class SymKind { Var, Const, Str, BinOp, Cmp, Deref, Field, Index, Call, Cast, AddrOf };
enum class SymOp { Add, Sub, Mul, Div, Rem, Shl, Shr, And, Or, Xor, LAnd, LOr };

struct SymExpr;
using SymRef = std::shared_ptr<const SymExpr>;

// Symbolic expressions are immutable trees. Every node carries the C type of
// the value it denotes, so evaluation follows the program's arithmetic.
struct SymExpr {
  SymKind kind = SymKind::Const;
  std::string name;   // Var, Call callee, Field
  std::string scope;  // Var: defining function, empty for globals
  int64_t value = 0;  // Const
  std::string str;    // Str
  SymOp op = SymOp::Add;
  CmpKind cmp = CmpKind::Eq;
  bool via_pointer = false;  // Field: `->`
  bool call_derived = false; // Call: value came back from a callee
  TypeRef type;
  std::vector<SymRef> kids;
};

SymRef sym_var(const std::string& name, TypeRef type, const std::string& scope = {});
SymRef sym_const(int64_t v, TypeRef type = type_int());
SymRef sym_str(const std::string& s);
SymRef sym_cast(TypeRef to, SymRef e);
SymRef sym_addr_of(SymRef e);

// Expression-builder operations.
SymRef make_bin_op(SymOp op, SymRef a, SymRef b, TypeRef type);
SymRef make_cmp_op(CmpKind k, SymRef a, SymRef b);
SymRef make_deref(SymRef p);
SymRef make_struct_op(SymRef base, const std::string& field, bool via_pointer);
SymRef make_array_op(SymRef base, SymRef index);
SymRef make_call(const std::string& callee, std::vector<SymRef> args, TypeRef type,
                 bool call_derived = false);

/// Result type of `a op b` under the usual conversions (pointer-aware).
TypeRef bin_result_type(SymOp op, const TypeRef& a, const TypeRef& b);

bool sym_equal(const SymExpr& a, const SymExpr& b);
inline bool sym_equal(const SymRef& a, const SymRef& b) { return sym_equal(*a, *b); }

/// Names of every Var in `e`.
std::set<std::string> sym_vars(const SymRef& e);
bool contains_call(const SymRef& e);
bool is_call_derived(const SymRef& e);

/// Replaces Var nodes by name. Replacement types are converted to the
/// variable's type with an explicit cast when they differ.
SymRef substitute(const SymRef& e, const std::map<std::string, SymRef>& repl);

/// Recomputes BinOp types bottom-up from the operand types.
SymRef retype(const SymRef& e);

SymRef simplify(const SymRef& e);

/// C source text with minimal parentheses.
std::string render(const SymRef& e);

/// Parses a C expression. Variables get their type from `var_type` (long when
/// null or when it returns null). Throws Error.
using VarTypes = std::function<TypeRef(const std::string&)>;
SymRef parse_sym(const std::string& text, const VarTypes& var_type = nullptr,
                 const TranslationUnit* tu = nullptr);

// Leaf values for evaluation. Unsupported leaves return nullopt.
struct EvalEnv {
  virtual ~EvalEnv() = default;
  virtual std::optional<uint64_t> var(const SymExpr& v) const = 0;
  virtual std::optional<uint64_t> var_address(const SymExpr&) const { return std::nullopt; }
  virtual std::optional<uint64_t> load(uint64_t, const TypeRef&) const { return std::nullopt; }
  virtual std::optional<uint64_t> call(const SymExpr&) const { return std::nullopt; }
};

struct MapEnv : EvalEnv {
  std::map<std::string, uint64_t> values;
  std::optional<uint64_t> var(const SymExpr& v) const override;
};

/// Evaluates under wrapping arithmetic. Arithmetic is total: division by zero
/// yields 0.
std::optional<uint64_t> eval(const SymRef& e, const EvalEnv& env);

// Expressions for one function, built by a linear pass over its instructions.
struct FunctionExprs {
  std::map<int, SymRef> values;                     // SSA id -> expression
  std::map<int, std::pair<SymRef, SymRef>> stores;  // Store uid -> (lhs, rhs)
  std::map<int, SymRef> insts;                      // uid -> expression computed
};

/// Builds the expression for one instruction given its operands' bindings.
/// Throws Abort("expr", "incomplete expression") when an operand is unbound.
SymRef build_expression(const Instruction& in, const Function& f,
                        const std::function<SymRef(int)>& value_of);

FunctionExprs build_function_exprs(const Function& f);

/// Expressions of every function, cached per program.
class ExprCache {
 public:
  explicit ExprCache(const Program& p);
  const FunctionExprs& of(const std::string& func) const { return funcs_.at(func); }
  /// Expression computed by instruction `uid` (value, stored value, branch
  /// condition, returned value).
  SymRef inst(int uid) const;
  /// Store lhs for a Store uid.
  SymRef store_lhs(int uid) const;
  /// Expression of an operand of instruction `uid`; null when unbound.
  SymRef operand(int uid, const Operand& o) const;

 private:
  const Program& p_;
  std::map<std::string, FunctionExprs> funcs_;
};

/// Canonical text for comparisons in tests and reports: parse, drop `(long)`
/// widening casts, simplify, render.
std::string canonical(const std::string& text);

}  // namespace patchsmith
