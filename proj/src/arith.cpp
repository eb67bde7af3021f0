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


#include "patchsmith/arith.hpp"

namespace patchsmith {

namespace {

bool is_unsigned_int(const TypeRef& t) { return is_int(t) && !t->is_signed; }

// Mathematical value of a normalized operand.
__int128 wide(uint64_t bits, const TypeRef& t) {
  if (is_unsigned_int(t) || is_pointer(t)) return static_cast<__int128>(bits);
  return static_cast<__int128>(static_cast<int64_t>(bits));
}

bool fits(__int128 v, const TypeRef& t) {
  if (!is_int(t)) return true;
  if (t->is_signed) {
    __int128 lo = -(static_cast<__int128>(1) << (t->width - 1));
    __int128 hi = (static_cast<__int128>(1) << (t->width - 1)) - 1;
    return v >= lo && v <= hi;
  }
  __int128 hi = (static_cast<__int128>(1) << t->width) - 1;
  return v >= 0 && v <= hi;
}

}  // namespace

uint64_t convert(uint64_t bits, const TypeRef& to) {
  if (is_int(to)) return normalize_int(bits, to->width, to->is_signed);
  return bits;
}

ArithResult arith_bin(BinKind k, uint64_t a, const TypeRef& at, uint64_t b, const TypeRef& bt,
                      const TypeRef& rt, uint64_t scale) {
  ArithResult r;
  if (k == BinKind::Cast) {
    r.bits = convert(a, rt);
    return r;
  }
  TypeRef pat = decay(at), pbt = decay(bt);
  if (is_pointer(rt)) {
    // pointer +/- integer
    bool ptr_left = is_pointer(pat);
    uint64_t p = ptr_left ? a : b;
    uint64_t off = (ptr_left ? b : a) * scale;
    r.bits = k == BinKind::Sub ? p - off : p + off;
    return r;
  }
  if (is_pointer(pat) && is_pointer(pbt)) {
    int64_t d = static_cast<int64_t>(a - b);
    int64_t s = static_cast<int64_t>(scale == 0 ? 1 : scale);
    r.bits = convert(static_cast<uint64_t>(d / s), rt);
    return r;
  }
  bool shift = k == BinKind::Shl || k == BinKind::Shr;
  uint64_t x = convert(a, rt);
  uint64_t y = shift ? convert(b, bt) : convert(b, rt);
  const int width = is_int(rt) ? rt->width : 64;
  const bool sgn = is_int(rt) && rt->is_signed;
  __int128 wx = wide(x, rt), wy = wide(y, shift ? bt : rt);
  __int128 exact = 0;
  bool check = true;
  switch (k) {
    case BinKind::Add: exact = wx + wy; r.bits = x + y; break;
    case BinKind::Sub: exact = wx - wy; r.bits = x - y; break;
    case BinKind::Mul: exact = wx * wy; r.bits = x * y; break;
    case BinKind::Div:
    case BinKind::Rem:
      if (y == 0 || (is_int(rt) && convert(y, rt) == 0)) {
        r.div_by_zero = true;
        r.bits = 0;
        return r;
      }
      if (sgn) {
        int64_t sx = static_cast<int64_t>(x), sy = static_cast<int64_t>(y);
        if (sx == INT64_MIN && sy == -1) {
          r.bits = k == BinKind::Div ? x : 0;
          r.overflow = k == BinKind::Div;
          return r;
        }
        r.bits = static_cast<uint64_t>(k == BinKind::Div ? sx / sy : sx % sy);
      } else {
        r.bits = k == BinKind::Div ? x / y : x % y;
      }
      exact = k == BinKind::Div ? wx / wy : wx % wy;
      break;
    case BinKind::Shl:
    case BinKind::Shr: {
      unsigned n = static_cast<unsigned>(y) & static_cast<unsigned>(width - 1);
      if (k == BinKind::Shl) r.bits = x << n;
      else if (sgn) r.bits = static_cast<uint64_t>(static_cast<int64_t>(x) >> n);
      else r.bits = x >> n;
      check = false;
      break;
    }
    case BinKind::And: r.bits = x & y; check = false; break;
    case BinKind::Or: r.bits = x | y; check = false; break;
    case BinKind::Xor: r.bits = x ^ y; check = false; break;
    case BinKind::Cast: break;
  }
  r.bits = convert(r.bits, rt);
  if (check) r.overflow = !fits(exact, rt);
  return r;
}

TypeRef compare_type(const TypeRef& at, const TypeRef& bt) {
  TypeRef a = decay(at), b = decay(bt);
  if (is_pointer(a) || is_pointer(b) || !is_int(a) || !is_int(b)) return int_type(64, false);
  return common_type(a, b);
}

bool arith_cmp(CmpKind k, uint64_t a, uint64_t b, const TypeRef& ct) {
  uint64_t x = convert(a, ct), y = convert(b, ct);
  bool sgn = is_int(ct) && ct->is_signed;
  auto lt = [&](uint64_t p, uint64_t q) {
    return sgn ? static_cast<int64_t>(p) < static_cast<int64_t>(q) : p < q;
  };
  switch (k) {
    case CmpKind::Eq: return x == y;
    case CmpKind::Ne: return x != y;
    case CmpKind::Lt: return lt(x, y);
    case CmpKind::Le: return !lt(y, x);
    case CmpKind::Gt: return lt(y, x);
    case CmpKind::Ge: return !lt(x, y);
  }
  return false;
}

}  // namespace patchsmith
