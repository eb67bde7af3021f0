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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patchsmith/ast.hpp"
#include "patchsmith/source.hpp"
#include "patchsmith/types.hpp"

namespace patchsmith {

enum class Opcode {
  Load,
  Store,
  GetElementField,
  GetElementIndex,
  BinOp,
  CmpOp,
  Allocate,
  Branch,
  CondBranch,
  Call,
  Ret,
};

enum class BinKind { Add, Sub, Mul, Div, Rem, Shl, Shr, And, Or, Xor, Cast };
enum class CmpKind { Eq, Ne, Lt, Le, Gt, Ge };

const char* opcode_name(Opcode op);
const char* bin_symbol(BinKind k);
const char* cmp_symbol(CmpKind k);

struct Operand {
  enum class Kind { None, Value, Const, Str };
  Kind kind = Kind::None;
  int id = -1;        // Value: SSA id
  int64_t imm = 0;    // Const
  std::string str;    // Str: decoded literal bytes
  TypeRef type;

  bool is_value() const { return kind == Kind::Value; }
  bool is_const() const { return kind == Kind::Const; }
  static Operand value(int id, TypeRef t) { return {Kind::Value, id, 0, {}, std::move(t)}; }
  static Operand constant(int64_t v, TypeRef t) { return {Kind::Const, -1, v, {}, std::move(t)}; }
  static Operand string(std::string s) {
    return {Kind::Str, -1, 0, std::move(s), pointer_to(type_char())};
  }
};

// Operand roles per opcode:
//   Load      var (named form) or a = address
//   Store     var (named form) or a = address; b = value
//   GetElementField  a = struct address; field/offset
//   GetElementIndex  a = base address; b = index; scale = element size
//   BinOp     a, b; for Cast only a (src type in a.type)
//   CmpOp     a, b compared as cmp_type
//   Allocate  var; result is the variable's storage address
//   Branch    target
//   CondBranch a; target (nonzero), target2 (zero)
//   Call      callee, args
//   Ret       a (optional)
struct Instruction {
  Opcode op = Opcode::Ret;
  int uid = -1;
  int result = -1;
  TypeRef type;
  std::string var;
  Operand a, b;
  std::vector<Operand> args;
  std::string callee;
  std::string field;
  uint64_t offset = 0;
  uint64_t scale = 1;
  BinKind bin = BinKind::Add;
  CmpKind cmp = CmpKind::Eq;
  TypeRef cmp_type;
  std::string target, target2;
  SourceSpan span;
  int stmt = -1;

  bool is_terminator() const {
    return op == Opcode::Branch || op == Opcode::CondBranch || op == Opcode::Ret;
  }
};

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;
};

struct Function {
  std::string name;
  TypeRef ret;
  std::vector<Param> params;
  std::map<std::string, TypeRef> locals;
  std::vector<BasicBlock> blocks;
  std::string entry;
  const FunctionDecl* decl = nullptr;
  int num_values = 0;

  int block_index(const std::string& label) const;
  const BasicBlock& block(const std::string& label) const;
  std::vector<int> successors(int block) const;
  std::vector<std::vector<int>> predecessors() const;
  bool is_param(const std::string& v) const;
  bool is_local(const std::string& v) const { return locals.count(v) != 0; }
  TypeRef var_type(const std::string& v) const;
  const Instruction* def_of(int value) const;

  std::map<std::string, int> label_to_block;
  std::vector<const Instruction*> value_defs;
};

struct GlobalVar {
  std::string name;
  TypeRef type;
  std::optional<int64_t> init;
  std::optional<std::string> init_str;
};

struct InstLoc {
  const Function* func = nullptr;
  int block = -1;
  int index = -1;
};

// Functions hold pointers into their own blocks, so programs move but never
// copy.
struct Program {
  Program() = default;
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;

  std::shared_ptr<TranslationUnit> tu;
  std::map<std::string, Function> functions;
  std::vector<std::string> order;  // definition order
  std::vector<GlobalVar> globals;
  std::string entry = "main";

  const Function* find(const std::string& name) const;
  const GlobalVar* find_global(const std::string& name) const;
  const Instruction* inst(int uid) const;
  InstLoc locate(int uid) const;
  const Stmt* stmt(int id) const;
  const std::string& source() const { return tu->source; }

  // uid -> location, filled by finalize()
  std::vector<InstLoc> locations;
  void finalize();
};

/// Intrinsics and modeled externals.
bool is_intrinsic(const std::string& name);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_program(const Program& p);

struct CallEdge {
  std::string caller;
  int call_uid = -1;
  std::string callee;
};

struct CallGraph {
  std::vector<std::string> nodes;
  std::vector<CallEdge> edges;

  std::vector<const CallEdge*> callers_of(const std::string& f) const;
  std::vector<const CallEdge*> callees_of(const std::string& f) const;
};

CallGraph build_call_graph(const Program& p);

struct LoopInfo {
  int header = -1;
  int preheader = -1;   // -1 when not unique
  int backedge_src = -1;  // -1 when not unique
  std::set<int> body;   // includes header
  int parent = -1;      // index into the find_loops result
  bool normalized = false;
  std::set<int> exits;  // blocks outside the loop reached from inside
  std::set<int> exiting;  // blocks inside with an edge leaving the loop

  bool contains(int block) const { return body.count(block) != 0; }
};

/// Immediate dominators (entry maps to itself; unreachable blocks to -1).
std::vector<int> dominators(const Function& f);
bool dominates(const std::vector<int>& idom, int a, int b);

/// Natural loops, innermost first within each nest.
std::vector<LoopInfo> find_loops(const Function& f);

/// Variables read (through named Loads) by the address computation of a
/// memory access.
std::set<std::string> address_vars(const Function& f, const Instruction& access);

/// True when a loop enclosing `access` stores to one of its address_vars.
bool address_updated_in_loop(const Function& f, const Instruction& access);

/// Textual IR listing, one instruction per line.
std::string dump_ir(const Program& p);
std::string format_instruction(const Instruction& inst);

}  // namespace patchsmith
