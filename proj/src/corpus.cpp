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


#include "patchsmith/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "patchsmith/frontend.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace

Bundle load_bundle(const std::string& dir) {
  fs::path d(dir);
  Bundle b;
  b.dir = dir;
  b.name = d.filename().string();
  if (b.name.empty()) b.name = d.parent_path().filename().string();
  b.program_path = (d / "program.mc").string();
  b.source = slurp(b.program_path);
  b.trigger = parse_input(slurp(d / "trigger.json"));
  if (fs::is_directory(d / "benign")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d / "benign"))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) b.benign.push_back(parse_input(slurp(f)));
  }
  b.expect = fs::exists(d / "expect.json") ? read_json(d / "expect.json") : nlohmann::json::object();
  if (fs::exists(d / "grammar.json")) b.grammar = read_json(d / "grammar.json");
  return b;
}

std::vector<Bundle> load_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "program.mc")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<Bundle> out;
  for (const auto& d : dirs) out.push_back(load_bundle(d.string()));
  return out;
}

std::vector<std::string> check_expectations(const RunReport& rep, const nlohmann::json& expect) {
  std::vector<std::string> out;
  auto want = [&](const char* key, const std::string& got) {
    if (!expect.contains(key)) return;
    std::string w = expect[key].get<std::string>();
    if (w != got) out.push_back(std::string(key) + ": expected \"" + w + "\", got \"" + got + "\"");
  };
  want("status", run_status_name(rep.status));
  want("class", rep.cls ? vuln_class_name(*rep.cls) : "");
  want("technique", rep.technique);
  want("placement", rep.placement);
  want("kind", rep.patch ? patch_kind_name(rep.patch->kind) : "");
  want("function", rep.patch ? rep.patch->func : "");
  want("handler", rep.patch ? rep.patch->handler : "");
  want("repair_text", rep.patch ? rep.patch->repair_text : "");
  want("abort_stage", rep.abort_stage);
  if (expect.contains("predicate")) {
    std::string w = expect["predicate"].get<std::string>();
    std::string got;
    try {
      got = rep.predicate.empty() ? "" : canonical(rep.predicate);
      w = canonical(w);
    } catch (const Error& e) {
      got = std::string("unparsable: ") + e.what();
    }
    if (w != got) out.push_back("predicate: expected \"" + w + "\", got \"" + got + "\"");
  }
  if (expect.contains("abort_reason")) {
    std::string w = expect["abort_reason"].get<std::string>();
    if (rep.abort_reason.find(w) == std::string::npos)
      out.push_back("abort_reason: expected to contain \"" + w + "\", got \"" + rep.abort_reason + "\"");
  }
  return out;
}

std::vector<BundleResult> run_corpus(const std::vector<Bundle>& bundles, const RunOptions& base, int threads) {
  std::vector<BundleResult> results(bundles.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < bundles.size(); i = next++) {
      const Bundle& b = bundles[i];
      RunOptions o = base;
      o.benign = b.benign;
      results[i].name = b.name;
      results[i].report = run_pipeline(b.program_path, b.source, b.trigger, o);
      results[i].mismatches = check_expectations(results[i].report, b.expect);
    }
  };
  int n = std::max(1, std::min<int>(threads, static_cast<int>(bundles.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

namespace {

int64_t uniform(std::mt19937_64& rng, const nlohmann::json& range) {
  if (!range.is_array() || range.size() != 2) throw Error("grammar: range must be [lo, hi]");
  int64_t lo = range[0].get<int64_t>(), hi = range[1].get<int64_t>();
  if (hi < lo) throw Error("grammar: empty range");
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

std::string generate(const nlohmann::json& g, std::mt19937_64& rng) {
  if (g.is_string()) return g.get<std::string>();
  if (!g.is_object() || g.size() != 1) throw Error("grammar: bad generator " + g.dump());
  if (g.contains("int")) return std::to_string(uniform(rng, g["int"]));
  if (g.contains("bytes")) {
    const auto& spec = g["bytes"];
    std::string alphabet = spec.at("alphabet").get<std::string>();
    if (alphabet.empty()) throw Error("grammar: empty alphabet");
    int64_t len = uniform(rng, spec.at("len"));
    std::string out;
    for (int64_t i = 0; i < len; ++i) out += alphabet[rng() % alphabet.size()];
    return out;
  }
  if (g.contains("seq")) {
    std::string out;
    for (const auto& part : g["seq"]) out += generate(part, rng);
    return out;
  }
  if (g.contains("repeat")) {
    const auto& spec = g["repeat"];
    int64_t count = uniform(rng, spec.at("count"));
    std::string out;
    for (int64_t i = 0; i < count; ++i) out += generate(spec.at("gen"), rng);
    return out;
  }
  if (g.contains("one_of")) {
    const auto& alts = g["one_of"];
    if (!alts.is_array() || alts.empty()) throw Error("grammar: one_of needs alternatives");
    return generate(alts[rng() % alts.size()], rng);
  }
  throw Error("grammar: bad generator " + g.dump());
}

}  // namespace

TriggerInput sample_input(const nlohmann::json& grammar, std::mt19937_64& rng) {
  TriggerInput in;
  try {
    for (const auto& g : grammar.at("argv")) in.argv.push_back(generate(g, rng));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("grammar: ") + e.what());
  }
  return in;
}

SweepStats soundness_sweep(const Bundle& b, const RunReport& rep, int n, uint64_t seed) {
  if (!b.grammar) throw Error(b.name + ": no grammar");
  if (rep.patched_source.empty()) throw Error(b.name + ": no patched source");
  auto original = parse_program(b.source, b.program_path);
  auto patched = parse_program(rep.patched_source, b.program_path);
  ExecOptions opts;
  opts.step_budget = 2'000'000;
  auto run = [&](const Program& p, const TriggerInput& in) -> std::optional<ExecResult> {
    try {
      ExecResult r = execute(p, in, opts);
      if (r.status == ExecResult::Status::Error) return std::nullopt;
      return r;
    } catch (const Abort&) {
      return std::nullopt;
    }
  };
  SweepStats st;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    TriggerInput in = sample_input(*b.grammar, rng);
    ++st.inputs;
    auto o = run(*original, in);
    auto q = run(*patched, in);
    if (!o || !q) ++st.incomplete;
    if (o && o->status == ExecResult::Status::Faulted) ++st.original_faults;
    if (q && q->status == ExecResult::Status::Faulted) {
      ++st.patched_faults;
      if (st.counterexamples.size() < 3) st.counterexamples.push_back(input_to_json(in));
    }
  }
  return st;
}

namespace {

std::string expressions_cell(const RunReport& r) {
  if (r.status == RunStatus::Clean) return "-";
  if (r.status == RunStatus::Error) return "error";
  if (r.abort_stage == "classify" || r.abort_stage == "expr" || r.abort_stage == "execute") return "no";
  return "yes";
}

std::string loop_cell(const RunReport& r) {
  if (r.technique != "none") return r.technique;
  if (r.abort_stage == "ara" || r.abort_stage == "clone") return "failed";
  return "-";
}

std::string placement_cell(const RunReport& r) {
  if (r.abort_stage == "converge" || r.abort_stage == "placement" || r.abort_stage == "translate") return "failed";
  return r.placement.empty() ? "-" : r.placement;
}

}  // namespace

std::string corpus_table(const std::vector<BundleResult>& results) {
  std::vector<std::vector<std::string>> rows = {
      {"Bundle", "Type", "Expressions", "Loop Analysis", "Patch Placement", "Patched?", "Expectation"}};
  int translated = 0, converged = 0;
  for (const auto& br : results) {
    const RunReport& r = br.report;
    std::string type = r.cls ? vuln_class_name(*r.cls) : "-";
    std::string patched = r.status == RunStatus::Patched ? "yes" : r.status == RunStatus::Clean ? "clean" : "no";
    std::string exp = br.mismatches.empty() ? "met" : "MISMATCH";
    rows.push_back({br.name, type, expressions_cell(r), loop_cell(r), placement_cell(r), patched, exp});
    if (!r.scopes.empty()) {
      ++translated;
      if (placement_cell(r) != "failed") ++converged;
    }
  }
  std::vector<size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream out;
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t i = 0; i < rows[r].size(); ++i) {
      out << rows[r][i];
      if (i + 1 < rows[r].size()) out << std::string(width[i] - rows[r][i].size() + 2, ' ');
    }
    out << "\n";
    if (r == 0) {
      for (size_t i = 0; i < width.size(); ++i) out << std::string(width[i], '-') << (i + 1 < width.size() ? "  " : "");
      out << "\n";
    }
  }
  for (const auto& br : results)
    for (const auto& m : br.mismatches) out << br.name << ": " << m << "\n";
  int met = static_cast<int>(std::count_if(results.begin(), results.end(),
                                           [](const BundleResult& b) { return b.mismatches.empty(); }));
  out << "\nExpectations met: " << met << "/" << results.size() << "\n";
  out << "Converged: " << converged << "/" << translated;
  if (translated) out << " (" << (100 * converged / translated) << "%)";
  out << " of bundles that needed expression translation\n";
  return out.str();
}

}  // namespace patchsmith
