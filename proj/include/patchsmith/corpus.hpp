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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchsmith/pipeline.hpp"

namespace patchsmith {

// A corpus bundle directory holds program.mc, trigger.json, benign/*.json,
// expect.json and optionally grammar.json.
struct Bundle {
  std::string name;
  std::string dir;
  std::string program_path;
  std::string source;
  TriggerInput trigger;
  std::vector<TriggerInput> benign;
  nlohmann::json expect;
  std::optional<nlohmann::json> grammar;
};

/// Throws Error when a required file is missing or malformed.
Bundle load_bundle(const std::string& dir);

/// Bundles in the subdirectories of `dir` that contain program.mc, by name.
std::vector<Bundle> load_corpus(const std::string& dir);

/// Differences between a report and an expectation object. Keys: status,
/// class, technique, placement, kind, function, handler, predicate
/// (compared canonically), repair_text, abort_stage, abort_reason
/// (substring).
std::vector<std::string> check_expectations(const RunReport& rep, const nlohmann::json& expect);

struct BundleResult {
  std::string name;
  RunReport report;
  std::vector<std::string> mismatches;
};

/// Runs every bundle, `threads` at a time.
std::vector<BundleResult> run_corpus(const std::vector<Bundle>& bundles, const RunOptions& base, int threads);

// Input grammars (grammar.json) describe random argv vectors:
//   {"argv": [GEN, ...]}
//   GEN = "literal"
//       | {"int": [lo, hi]}                          decimal, uniform
//       | {"bytes": {"alphabet": "...", "len": [lo, hi]}}
//       | {"seq": [GEN, ...]}                        concatenation
//       | {"repeat": {"gen": GEN, "count": [lo, hi]}}
//       | {"one_of": [GEN, ...]}                     uniform choice

/// One random input. Throws Error for a malformed grammar.
TriggerInput sample_input(const nlohmann::json& grammar, std::mt19937_64& rng);

struct SweepStats {
  int inputs = 0;
  int original_faults = 0;  // unpatched program faults
  int patched_faults = 0;   // patched program faults; must stay 0
  int incomplete = 0;       // step budget or runtime error, either build
  std::vector<std::string> counterexamples;  // first few patched faults
};

/// Runs `n` grammar inputs against the original and patched programs.
/// Requires a bundle with a grammar and a report with a patched source.
SweepStats soundness_sweep(const Bundle& b, const RunReport& rep, int n, uint64_t seed);

/// Summary table plus convergence statistics.
std::string corpus_table(const std::vector<BundleResult>& results);

}  // namespace patchsmith
