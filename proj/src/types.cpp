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

#include "patchsmith/types.hpp"

#include <algorithm>
#include <map>

namespace patchsmith {

const Field* StructDef::find(const std::string& field) const {
  for (const auto& f : fields)
    if (f.name == field) return &f;
  return nullptr;
}

TypeRef int_type(int width, bool is_signed, std::string spelling) {
  auto t = std::make_shared<TypeDesc>();
  t->kind = TypeKind::Int;
  t->width = width;
  t->is_signed = is_signed;
  if (spelling.empty()) {
    switch (width) {
      case 8: spelling = is_signed ? "char" : "unsigned char"; break;
      case 16: spelling = is_signed ? "short" : "unsigned short"; break;
      case 32: spelling = is_signed ? "int" : "unsigned"; break;
      default: spelling = is_signed ? "long" : "unsigned long"; break;
    }
  }
  t->spelling = std::move(spelling);
  return t;
}

TypeRef void_type() {
  static const TypeRef v = std::make_shared<TypeDesc>();
  return v;
}

TypeRef pointer_to(TypeRef elem) {
  auto t = std::make_shared<TypeDesc>();
  t->kind = TypeKind::Pointer;
  t->elem = std::move(elem);
  return t;
}

TypeRef array_of(TypeRef elem, uint64_t len) {
  auto t = std::make_shared<TypeDesc>();
  t->kind = TypeKind::Array;
  t->elem = std::move(elem);
  t->len = len;
  return t;
}

TypeRef struct_type(std::shared_ptr<StructDef> def) {
  auto t = std::make_shared<TypeDesc>();
  t->kind = TypeKind::Struct;
  t->def = std::move(def);
  return t;
}

TypeRef type_int() {
  static const TypeRef t = int_type(32, true);
  return t;
}
TypeRef type_long() {
  static const TypeRef t = int_type(64, true);
  return t;
}
TypeRef type_char() {
  static const TypeRef t = int_type(8, true);
  return t;
}

bool is_int(const TypeRef& t) { return t && t->kind == TypeKind::Int; }
bool is_pointer(const TypeRef& t) { return t && t->kind == TypeKind::Pointer; }
bool is_struct(const TypeRef& t) { return t && t->kind == TypeKind::Struct; }
bool is_array(const TypeRef& t) { return t && t->kind == TypeKind::Array; }
bool is_void(const TypeRef& t) { return !t || t->kind == TypeKind::Void; }
bool is_scalar(const TypeRef& t) { return is_int(t) || is_pointer(t); }

uint64_t size_of(const TypeRef& t) {
  if (!t) return 0;
  switch (t->kind) {
    case TypeKind::Int: return static_cast<uint64_t>(t->width / 8);
    case TypeKind::Pointer: return 8;
    case TypeKind::Array: return size_of(t->elem) * t->len;
    case TypeKind::Struct: return t->def ? t->def->size : 0;
    case TypeKind::Void: return 0;
  }
  return 0;
}

uint64_t align_of(const TypeRef& t) {
  if (!t) return 1;
  switch (t->kind) {
    case TypeKind::Int: return static_cast<uint64_t>(t->width / 8);
    case TypeKind::Pointer: return 8;
    case TypeKind::Array: return align_of(t->elem);
    case TypeKind::Struct: return t->def ? t->def->align : 1;
    case TypeKind::Void: return 1;
  }
  return 1;
}

uint64_t pointee_size(const TypeRef& t) {
  if (!t || !t->elem) return 1;
  uint64_t s = size_of(t->elem);
  return s == 0 ? 1 : s;
}

bool same_type(const TypeRef& a, const TypeRef& b) {
  if (a == b) return true;
  if (!a || !b) return is_void(a) && is_void(b);
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Int: return a->width == b->width && a->is_signed == b->is_signed;
    case TypeKind::Pointer: return same_type(a->elem, b->elem);
    case TypeKind::Array: return a->len == b->len && same_type(a->elem, b->elem);
    case TypeKind::Struct: return a->def == b->def;
    case TypeKind::Void: return true;
  }
  return false;
}

std::string type_name(const TypeRef& t) {
  if (!t) return "void";
  switch (t->kind) {
    case TypeKind::Int: return t->spelling;
    case TypeKind::Pointer: {
      std::string inner = type_name(t->elem);
      if (!inner.empty() && inner.back() == '*') return inner + "*";
      return inner + " *";
    }
    case TypeKind::Array: return type_name(t->elem) + "[" + std::to_string(t->len) + "]";
    case TypeKind::Struct: return "struct " + (t->def ? t->def->name : std::string("?"));
    case TypeKind::Void: return "void";
  }
  return "?";
}

uint64_t normalize_int(uint64_t bits, int width, bool is_signed) {
  if (width >= 64) return bits;
  uint64_t mask = (uint64_t{1} << width) - 1;
  bits &= mask;
  if (is_signed && (bits >> (width - 1)) & 1) bits |= ~mask;
  return bits;
}

std::optional<TypeRef> fixed_width_type(const std::string& name) {
  static const std::map<std::string, std::pair<int, bool>> m = {
      {"int8_t", {8, true}},    {"int16_t", {16, true}},  {"int32_t", {32, true}},
      {"int64_t", {64, true}},  {"uint8_t", {8, false}},  {"uint16_t", {16, false}},
      {"uint32_t", {32, false}}, {"uint64_t", {64, false}}, {"size_t", {64, false}},
      {"ssize_t", {64, true}},
  };
  auto it = m.find(name);
  if (it == m.end()) return std::nullopt;
  return int_type(it->second.first, it->second.second, name);
}

TypeRef decay(const TypeRef& t) {
  if (is_array(t)) return pointer_to(t->elem);
  return t;
}

TypeRef promote(const TypeRef& t) {
  if (is_int(t) && t->width < 32) return type_int();
  return t;
}

TypeRef common_type(const TypeRef& a, const TypeRef& b) {
  TypeRef pa = promote(a), pb = promote(b);
  if (same_type(pa, pb)) return pa;
  if (pa->width == 64 || pb->width == 64) {
    bool u = (pa->width == 64 && !pa->is_signed) || (pb->width == 64 && !pb->is_signed);
    return int_type(64, !u);
  }
  bool u = !pa->is_signed || !pb->is_signed;
  return int_type(32, !u);
}

void layout_struct(StructDef& def) {
  uint64_t offset = 0;
  uint64_t align = 1;
  for (auto& f : def.fields) {
    uint64_t a = align_of(f.type);
    align = std::max(align, a);
    offset = (offset + a - 1) / a * a;
    f.offset = offset;
    offset += size_of(f.type);
  }
  def.align = align;
  def.size = (offset + align - 1) / align * align;
  if (def.size == 0) def.size = align;
  def.complete = true;
}

}  // namespace patchsmith
