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


#include "patchsmith/dataflow.hpp"

#include <algorithm>

namespace patchsmith {

namespace {

bool calls_defined_function(const Instruction& in) { return in.op == Opcode::Call && !is_intrinsic(in.callee); }

}  // namespace

std::vector<std::string> defined_vars(const Function& f, const Instruction& in) {
  if (in.op == Opcode::Store && !in.var.empty()) return {in.var};
  (void)f;
  return {};
}

ReachingDefs::ReachingDefs(const Function& f) : f_(f), in_(f.blocks.size()) {
  const size_t n = f.blocks.size();
  if (n == 0) return;
  Defs entry;
  for (const auto& p : f.params) entry[p.name] = {kEntryDef};
  for (const auto& [name, t] : f.locals) entry[name] = {kEntryDef};
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (!in.var.empty()) entry.try_emplace(in.var, std::set<int>{kEntryDef});
  in_[0] = entry;
  auto preds = f.predecessors();
  std::vector<Defs> out(n);
  std::vector<char> done(n, 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t b = 0; b < n; ++b) {
      Defs d = b == 0 ? entry : Defs{};
      for (int p : preds[b])
        for (const auto& [v, s] : out[static_cast<size_t>(p)]) d[v].insert(s.begin(), s.end());
      Defs o = d;
      for (const auto& in : f.blocks[b].insts) apply(in, o);
      if (!done[b] || o != out[b] || d != in_[b]) {
        in_[b] = std::move(d);
        out[b] = std::move(o);
        done[b] = 1;
        changed = true;
      }
    }
  }
}

void ReachingDefs::apply(const Instruction& in, Defs& d) const {
  if (in.op == Opcode::Store && !in.var.empty()) {
    d[in.var] = {in.uid};
    return;
  }
  if (calls_defined_function(in)) {
    // Calls may write globals; they add to, not replace, the reaching set.
    for (auto& [v, s] : d)
      if (!f_.is_param(v) && !f_.is_local(v)) s.insert(in.uid);
  }
}

std::set<int> ReachingDefs::before(int uid, const std::string& var) const {
  for (size_t b = 0; b < f_.blocks.size(); ++b) {
    const auto& insts = f_.blocks[b].insts;
    auto it = std::find_if(insts.begin(), insts.end(), [&](const Instruction& i) { return i.uid == uid; });
    if (it == insts.end()) continue;
    Defs d = in_[b];
    for (auto j = insts.begin(); j != it; ++j) apply(*j, d);
    auto v = d.find(var);
    if (v != d.end()) return v->second;
    return {kEntryDef};
  }
  return {};
}

std::set<int> ReachingDefs::at_end(int block, const std::string& var) const {
  Defs d = in_[static_cast<size_t>(block)];
  for (const auto& in : f_.blocks[static_cast<size_t>(block)].insts) apply(in, d);
  auto v = d.find(var);
  return v == d.end() ? std::set<int>{kEntryDef} : v->second;
}

std::vector<int> post_dominators(const Function& f) {
  const int n = static_cast<int>(f.blocks.size());
  const int exit = n;
  // Reverse graph: successors of the virtual exit are returning blocks.
  std::vector<std::vector<int>> rsucc(static_cast<size_t>(n + 1));
  std::vector<std::vector<int>> rpred(static_cast<size_t>(n + 1));
  for (int b = 0; b < n; ++b) {
    auto succ = f.successors(b);
    if (!f.blocks[static_cast<size_t>(b)].insts.empty() &&
        f.blocks[static_cast<size_t>(b)].insts.back().op == Opcode::Ret)
      succ.push_back(exit);
    for (int s : succ) {
      rsucc[static_cast<size_t>(s)].push_back(b);
      rpred[static_cast<size_t>(b)].push_back(s);
    }
  }
  std::vector<std::set<int>> pdom(static_cast<size_t>(n + 1));
  std::set<int> all;
  for (int i = 0; i <= n; ++i) all.insert(i);
  for (int i = 0; i < n; ++i) pdom[static_cast<size_t>(i)] = all;
  pdom[static_cast<size_t>(exit)] = {exit};
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = n - 1; b >= 0; --b) {
      std::set<int> d;
      bool first = true;
      for (int s : rpred[static_cast<size_t>(b)]) {
        if (first) {
          d = pdom[static_cast<size_t>(s)];
          first = false;
        } else {
          std::set<int> t;
          std::set_intersection(d.begin(), d.end(), pdom[static_cast<size_t>(s)].begin(),
                                pdom[static_cast<size_t>(s)].end(), std::inserter(t, t.begin()));
          d = std::move(t);
        }
      }
      if (first) d = all;  // no successors: cannot reach exit
      d.insert(b);
      if (d != pdom[static_cast<size_t>(b)]) {
        pdom[static_cast<size_t>(b)] = std::move(d);
        changed = true;
      }
    }
  }
  std::vector<int> ipdom(static_cast<size_t>(n), -1);
  for (int b = 0; b < n; ++b) {
    const auto& s = pdom[static_cast<size_t>(b)];
    if (!s.count(exit)) continue;
    // The immediate post-dominator is the strict post-dominator that all the
    // others post-dominate, i.e. the one with the largest set.
    int best = -1;
    size_t best_size = 0;
    for (int c : s) {
      if (c == b) continue;
      size_t sz = pdom[static_cast<size_t>(c)].size();
      if (best < 0 || sz > best_size) {
        best = c;
        best_size = sz;
      }
    }
    ipdom[static_cast<size_t>(b)] = best;
  }
  return ipdom;
}

std::vector<std::set<int>> control_dependence(const Function& f) {
  const int n = static_cast<int>(f.blocks.size());
  auto ipdom = post_dominators(f);
  std::vector<std::set<int>> cd(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    auto succ = f.successors(a);
    if (succ.size() < 2) continue;
    for (int s : succ) {
      // Walk the post-dominator tree from s up to ipdom(a).
      int stop = ipdom[static_cast<size_t>(a)];
      int x = s;
      std::set<int> seen;
      while (x >= 0 && x < n && x != stop && seen.insert(x).second) {
        cd[static_cast<size_t>(x)].insert(a);
        x = ipdom[static_cast<size_t>(x)];
      }
      if (stop < 0) {
        // a cannot reach exit on every path; be conservative.
        for (int y = 0; y < n; ++y)
          if (y != a) cd[static_cast<size_t>(y)].insert(a);
      }
    }
  }
  return cd;
}

std::set<std::string> address_taken(const Function& f) {
  std::set<std::string> out;
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (in.op == Opcode::Allocate) {
        TypeRef t = f.var_type(in.var);
        if (t && is_scalar(t)) out.insert(in.var);
      }
  return out;
}

}  // namespace patchsmith
