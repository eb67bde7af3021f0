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
#include <set>
#include <string>
#include <vector>

#include "patchsmith/ir.hpp"

namespace patchsmith {

// Definition id standing for the value a variable has on function entry:
// the argument for parameters, the initializer for globals, nothing for
// locals.
constexpr int kEntryDef = -1;

/// Reaching definitions of named variables. Definitions are named Stores;
/// for globals every call to a defined function also counts.
class ReachingDefs {
 public:
  explicit ReachingDefs(const Function& f);

  /// Definitions of `var` reaching the point just before instruction `uid`.
  std::set<int> before(int uid, const std::string& var) const;
  /// Definitions of `var` live at the end of `block`.
  std::set<int> at_end(int block, const std::string& var) const;

 private:
  using Defs = std::map<std::string, std::set<int>>;
  void apply(const Instruction& in, Defs& d) const;

  const Function& f_;
  std::vector<Defs> in_;
};

/// Variables the instruction defines (named Store; calls for globals).
std::vector<std::string> defined_vars(const Function& f, const Instruction& in);

/// Immediate post-dominators over a virtual exit (index = blocks.size()).
/// Blocks that cannot reach a return map to -1.
std::vector<int> post_dominators(const Function& f);

/// For each block, the branch blocks it is control dependent on.
std::vector<std::set<int>> control_dependence(const Function& f);

/// Variables whose address is taken anywhere in `f` (Allocate of a scalar).
std::set<std::string> address_taken(const Function& f);

}  // namespace patchsmith
