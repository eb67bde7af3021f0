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

#include "patchsmith/ir.hpp"
#include "patchsmith/types.hpp"

namespace patchsmith {

// Values are 64-bit patterns normalized to their type: integers narrower than
// 64 bits are sign- or zero-extended, pointers are plain addresses.

/// Converts a normalized value of type `from` to type `to`.
uint64_t convert(uint64_t bits, const TypeRef& to);

struct ArithResult {
  uint64_t bits = 0;
  bool overflow = false;     // the mathematical result does not fit the type
  bool div_by_zero = false;  // bits is 0 in that case
};

/// C semantics of `a <k> b` with result type `rt`. Pointer arithmetic scales
/// the integer side by `scale`; pointer difference divides by it. Shift
/// counts are masked to the operand width.
ArithResult arith_bin(BinKind k, uint64_t a, const TypeRef& at, uint64_t b, const TypeRef& bt,
                      const TypeRef& rt, uint64_t scale);

/// Type in which `a` and `b` are compared (unsigned 64-bit for pointers).
TypeRef compare_type(const TypeRef& at, const TypeRef& bt);

bool arith_cmp(CmpKind k, uint64_t a, uint64_t b, const TypeRef& ct);

/// Signed view of a normalized value.
inline int64_t as_signed(uint64_t bits) { return static_cast<int64_t>(bits); }

}  // namespace patchsmith
