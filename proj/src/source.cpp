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

#include "patchsmith/source.hpp"

#include <algorithm>
#include <sstream>

#include "patchsmith/types.hpp"

namespace patchsmith {

std::string apply_edits(std::string_view source, const std::vector<Edit>& edits) {
  std::string out;
  out.reserve(source.size());
  size_t cursor = 0;
  bool first = true;
  size_t prev_begin = 0;
  size_t prev_end = 0;
  for (const auto& e : edits) {
    if (e.span.begin > e.span.end || e.span.end > source.size())
      throw Error("edit span out of range");
    if (!first) {
      if (e.span.begin < prev_end || (e.span.begin == prev_begin && e.span.begin == prev_end))
        throw Error("overlapping edits at offset " + std::to_string(e.span.begin));
      if (e.span.begin < prev_begin) throw Error("edits are not sorted");
    }
    out.append(source.substr(cursor, e.span.begin - cursor));
    out.append(e.replacement);
    cursor = e.span.end;
    prev_begin = e.span.begin;
    prev_end = e.span.end;
    first = false;
  }
  out.append(source.substr(cursor));
  return out;
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

enum class Op { Keep, Del, Add };

// LCS over lines; the corpus files are small so the quadratic table is fine.
std::vector<std::pair<Op, size_t>> diff_lines(const std::vector<std::string>& a,
                                              const std::vector<std::string>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<std::vector<uint32_t>> lcs(n + 1, std::vector<uint32_t>(m + 1, 0));
  for (size_t i = n; i-- > 0;)
    for (size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::vector<std::pair<Op, size_t>> ops;
  size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      ops.push_back({Op::Keep, i});
      ++i;
      ++j;
    } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
      ops.push_back({Op::Del, i++});
    } else {
      ops.push_back({Op::Add, j++});
    }
  }
  return ops;
}

}  // namespace

std::string unified_diff(std::string_view before, std::string_view after,
                         const std::string& before_name, const std::string& after_name,
                         int context) {
  if (before == after) return {};
  auto a = split_lines(before);
  auto b = split_lines(after);
  auto ops = diff_lines(a, b);

  // Line numbers (0-based) in a and b before each op.
  std::vector<size_t> ai(ops.size() + 1), bi(ops.size() + 1);
  size_t x = 0, y = 0;
  for (size_t k = 0; k < ops.size(); ++k) {
    ai[k] = x;
    bi[k] = y;
    if (ops[k].first != Op::Add) ++x;
    if (ops[k].first != Op::Del) ++y;
  }
  ai[ops.size()] = x;
  bi[ops.size()] = y;

  std::ostringstream out;
  out << "--- " << before_name << "\n+++ " << after_name << "\n";
  size_t k = 0;
  const size_t ctx = static_cast<size_t>(context);
  while (k < ops.size()) {
    if (ops[k].first == Op::Keep) {
      ++k;
      continue;
    }
    size_t start = k >= ctx ? k - ctx : 0;
    while (start < k && ops[start].first != Op::Keep) ++start;
    size_t end = k;
    // Extend the hunk while changes are within 2*context of each other.
    while (true) {
      while (end < ops.size() && ops[end].first != Op::Keep) ++end;
      size_t next = end;
      while (next < ops.size() && ops[next].first == Op::Keep && next - end < 2 * ctx) ++next;
      if (next < ops.size() && ops[next].first != Op::Keep) {
        end = next;
        continue;
      }
      break;
    }
    size_t stop = std::min(ops.size(), end + ctx);
    size_t a_count = 0, b_count = 0;
    for (size_t t = start; t < stop; ++t) {
      if (ops[t].first != Op::Add) ++a_count;
      if (ops[t].first != Op::Del) ++b_count;
    }
    size_t a_start = a_count ? ai[start] + 1 : ai[start];
    size_t b_start = b_count ? bi[start] + 1 : bi[start];
    out << "@@ -" << a_start << "," << a_count << " +" << b_start << "," << b_count << " @@\n";
    for (size_t t = start; t < stop; ++t) {
      switch (ops[t].first) {
        case Op::Keep: out << " " << a[ops[t].second] << "\n"; break;
        case Op::Del: out << "-" << a[ops[t].second] << "\n"; break;
        case Op::Add: out << "+" << b[ops[t].second] << "\n"; break;
      }
    }
    k = stop;
  }
  return out.str();
}

std::string line_indent(std::string_view source, size_t offset) {
  size_t line_start = source.rfind('\n', offset == 0 ? 0 : offset - 1);
  line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
  if (offset == 0) line_start = 0;
  size_t p = line_start;
  while (p < source.size() && (source[p] == ' ' || source[p] == '\t')) ++p;
  return std::string(source.substr(line_start, p - line_start));
}

}  // namespace patchsmith
