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
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchsmith {

/// Raised for malformed input (syntax errors, unsupported constructs, I/O).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a pipeline stage cannot guarantee a sound patch. Carries the
/// stage name so reports can say where the pipeline stopped.
class Abort : public std::runtime_error {
 public:
  Abort(std::string stage, const std::string& reason)
      : std::runtime_error(reason), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct TypeDesc;
using TypeRef = std::shared_ptr<const TypeDesc>;

enum class TypeKind { Int, Pointer, Struct, Array, Void };

struct Field {
  std::string name;
  TypeRef type;
  uint64_t offset = 0;
};

// Struct bodies are shared so that `struct node *next` can refer to a struct
// whose field list is still being parsed.
struct StructDef {
  std::string name;
  std::vector<Field> fields;
  uint64_t size = 0;
  uint64_t align = 1;
  bool complete = false;

  const Field* find(const std::string& field) const;
};

struct TypeDesc {
  TypeKind kind = TypeKind::Void;
  int width = 0;           // Int: 8/16/32/64
  bool is_signed = true;   // Int
  std::string spelling;    // Int: source spelling ("int", "int64_t", ...)
  TypeRef elem;            // Pointer: pointee; Array: element
  uint64_t len = 0;        // Array
  std::shared_ptr<StructDef> def;  // Struct
};

TypeRef int_type(int width, bool is_signed, std::string spelling = {});
TypeRef void_type();
TypeRef pointer_to(TypeRef elem);
TypeRef array_of(TypeRef elem, uint64_t len);
TypeRef struct_type(std::shared_ptr<StructDef> def);

/// Well-known integer types.
TypeRef type_int();
TypeRef type_long();
TypeRef type_char();

bool is_int(const TypeRef& t);
bool is_pointer(const TypeRef& t);
bool is_struct(const TypeRef& t);
bool is_array(const TypeRef& t);
bool is_void(const TypeRef& t);
bool is_scalar(const TypeRef& t);  // int or pointer

uint64_t size_of(const TypeRef& t);
uint64_t align_of(const TypeRef& t);

/// Element size used for pointer arithmetic on `t` (1 for void*).
uint64_t pointee_size(const TypeRef& t);

bool same_type(const TypeRef& a, const TypeRef& b);

/// C spelling: "int", "char *", "struct vd *". Arrays print as "T[N]".
std::string type_name(const TypeRef& t);

/// Normalizes `bits` to the representation of an integer type: truncates to
/// the width and sign- or zero-extends back to 64 bits.
uint64_t normalize_int(uint64_t bits, int width, bool is_signed);

/// `int64_t`, `size_t` and the other fixed-width names; nullopt otherwise.
std::optional<TypeRef> fixed_width_type(const std::string& name);

/// Array-to-pointer decay; other types unchanged.
TypeRef decay(const TypeRef& t);

/// Integer promotion (narrower than int becomes int).
TypeRef promote(const TypeRef& t);

/// Usual arithmetic conversions for two integer operands.
TypeRef common_type(const TypeRef& a, const TypeRef& b);

/// Computes the struct layout (offsets, size, alignment) in declaration order.
void layout_struct(StructDef& def);

}  // namespace patchsmith
