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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace patchsmith {

/// Byte range [begin, end) in a source buffer plus the 1-based line/column of
/// `begin`.
struct SourceSpan {
  size_t begin = 0;
  size_t end = 0;
  int line = 0;
  int column = 0;

  bool empty() const { return begin == end; }
  bool contains(const SourceSpan& other) const {
    return begin <= other.begin && other.end <= end;
  }
  std::string_view text(std::string_view source) const {
    return source.substr(begin, end - begin);
  }
};

/// A textual splice: replace `span` with `replacement`. Insertions use an
/// empty span.
struct Edit {
  SourceSpan span;
  std::string replacement;
};

/// Splices sorted, non-overlapping edits into `source`. Throws Error on
/// overlapping or out-of-range edits. Two insertions at the same offset count
/// as overlapping.
std::string apply_edits(std::string_view source, const std::vector<Edit>& edits);

/// Unified diff with `---/+++/@@` headers and `context` lines of context.
/// Returns an empty string when the inputs are identical.
std::string unified_diff(std::string_view before, std::string_view after,
                         const std::string& before_name,
                         const std::string& after_name, int context = 3);

/// Indentation (leading whitespace) of the line containing `offset`.
std::string line_indent(std::string_view source, size_t offset);

}  // namespace patchsmith
