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

#include <fstream>
#include <sstream>
#include <string>

#include "patchsmith/frontend.hpp"

namespace patchsmith::testing {

inline std::string corpus_path(const std::string& rel) {
  return std::string(PATCHSMITH_CORPUS_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<Program> corpus_program(const std::string& bundle) {
  return load_program(corpus_path(bundle + "/program.mc"));
}

inline std::vector<Opcode> opcodes(const Function& f) {
  std::vector<Opcode> out;
  for (const auto& b : f.blocks)
    for (const auto& i : b.insts) out.push_back(i.op);
  return out;
}

}  // namespace patchsmith::testing
