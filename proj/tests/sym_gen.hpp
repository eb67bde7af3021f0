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

#include <random>
#include <string>
#include <vector>

#include "patchsmith/frontend.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith::testing {

// Random expression trees for the expression-layer properties.
class SymGen {
 public:
  explicit SymGen(uint64_t seed) : rng_(seed) {
    tu_ = parse_unit(
        "struct in { int n; char buf[8]; };\n"
        "struct out { long k; struct in f; struct in *next; };\n"
        "int main() { return 0; }\n");
    vars_ = {{"a", type_int()},
             {"b", type_int()},
             {"n", int_type(32, false)},
             {"len", type_long()},
             {"size", int_type(64, false, "size_t")},
             {"c", type_char()}};
  }

  const TranslationUnit* tu() const { return tu_.get(); }

  TypeRef var_type(const std::string& name) const {
    for (const auto& [n, t] : vars_)
      if (n == name) return t;
    if (name == "p" || name == "q") return pointer_to(type_char());
    if (name == "ip") return pointer_to(type_int());
    if (name == "arr") return array_of(type_int(), 16);
    if (name == "s") return pointer_to(struct_type(tu_->structs.at("out")));
    return nullptr;
  }

  /// Integer-valued tree over the scalar variables.
  SymRef arith(int depth) {
    if (depth <= 0 || pick(4) == 0) return leaf();
    switch (pick(10)) {
      case 0:
        return make_cmp_op(static_cast<CmpKind>(pick(6)), arith(depth - 1), arith(depth - 1));
      case 1:
        return sym_cast(int_types()[pick(int_types().size())], arith(depth - 1));
      case 2:
        return make_bin_op(pick(2) ? SymOp::LAnd : SymOp::LOr, arith(depth - 1), arith(depth - 1),
                           nullptr);
      case 3: {
        // byte-pointer difference
        SymRef p = sym_var(pick(2) ? "p" : "q", pointer_to(type_char()));
        SymRef lhs = make_bin_op(SymOp::Add, p, arith(depth - 1), nullptr);
        SymRef rhs = sym_var(pick(2) ? "p" : "q", pointer_to(type_char()));
        return make_bin_op(SymOp::Sub, lhs, rhs, nullptr);
      }
      default: {
        static const SymOp ops[] = {SymOp::Add, SymOp::Add, SymOp::Sub, SymOp::Sub, SymOp::Mul,
                                    SymOp::Mul, SymOp::Div, SymOp::Rem, SymOp::Shl, SymOp::Shr,
                                    SymOp::And, SymOp::Or,  SymOp::Xor};
        SymOp op = ops[pick(std::size(ops))];
        return make_bin_op(op, arith(depth - 1), arith(depth - 1), nullptr);
      }
    }
  }

  /// Any renderable tree, including memory accesses and calls.
  SymRef any(int depth) {
    if (depth <= 0 || pick(5) == 0) return pick(3) ? leaf() : memory_leaf();
    switch (pick(8)) {
      case 0: return make_deref(make_bin_op(SymOp::Add, sym_var("ip", var_type("ip")), any(depth - 1), nullptr));
      case 1: return make_array_op(sym_var("arr", var_type("arr")), any(depth - 1));
      case 2: {
        std::vector<SymRef> args;
        for (size_t i = 0, k = pick(3); i < k; ++i) args.push_back(any(depth - 1));
        return make_call(pick(2) ? "extract_int" : "f", std::move(args), type_int());
      }
      case 3: return sym_cast(int_types()[pick(int_types().size())], any(depth - 1));
      case 4: return make_cmp_op(static_cast<CmpKind>(pick(6)), any(depth - 1), any(depth - 1));
      default: {
        static const SymOp ops[] = {SymOp::Add, SymOp::Sub, SymOp::Mul, SymOp::Div, SymOp::Rem,
                                    SymOp::Shl, SymOp::Shr, SymOp::And, SymOp::Or,  SymOp::Xor,
                                    SymOp::LAnd, SymOp::LOr};
        return make_bin_op(ops[pick(std::size(ops))], any(depth - 1), any(depth - 1), nullptr);
      }
    }
  }

  /// Random values for every scalar variable; pointers get plausible addresses.
  MapEnv env() {
    MapEnv e;
    for (const auto& [n, t] : vars_) e.values[n] = value();
    e.values["p"] = 0x10000 + pick(4096);
    e.values["q"] = 0x10000 + pick(4096);
    return e;
  }

  size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }

 private:
  static const std::vector<TypeRef>& int_types() {
    static const std::vector<TypeRef> ts = {type_int(), type_long(), int_type(32, false),
                                            int_type(64, false), type_char(),
                                            int_type(64, true, "int64_t")};
    return ts;
  }

  uint64_t value() {
    switch (pick(4)) {
      case 0: return pick(10);
      case 1: return static_cast<uint64_t>(-static_cast<int64_t>(pick(10)));
      case 2: return rng_();
      default: return uint64_t{1} << pick(64);
    }
  }

  SymRef leaf() {
    if (pick(2)) {
      const auto& [n, t] = vars_[pick(vars_.size())];
      return sym_var(n, t);
    }
    static const int64_t consts[] = {0, 1, 2, 3, 7, 10, 255, 2048, 65536, 2147483647, -1, -3};
    int64_t v = consts[pick(std::size(consts))];
    return sym_const(v, pick(4) ? type_int() : type_long());
  }

  SymRef memory_leaf() {
    SymRef s = sym_var("s", var_type("s"));
    switch (pick(4)) {
      case 0: return make_struct_op(s, "k", true);
      case 1: return make_struct_op(make_struct_op(s, "f", true), "n", false);
      case 2: return make_array_op(make_struct_op(make_struct_op(s, "next", true), "buf", true),
                                   sym_const(static_cast<int64_t>(pick(8))));
      default: return sym_str(pick(2) ? "%s\n" : "a\"b");
    }
  }

  std::mt19937_64 rng_;
  std::shared_ptr<TranslationUnit> tu_;
  std::vector<std::pair<std::string, TypeRef>> vars_;
};

}  // namespace patchsmith::testing
