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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchsmith/executor.hpp"
#include "patchsmith/ir.hpp"
#include "patchsmith/patchgen.hpp"
#include "patchsmith/translate.hpp"
#include "patchsmith/vuln.hpp"

namespace patchsmith {

enum class Technique { Auto, Ara, Clone };

struct RunOptions {
  Technique technique = Technique::Auto;  // Auto: cloning first, then ARA
  std::vector<TriggerInput> benign;
};

struct StageOutcome {
  std::string name;
  std::string status;  // "ok" or "abort"
  std::string reason;
  double ms = 0;
};

enum class RunStatus { Patched, Aborted, Clean, Error };

const char* run_status_name(RunStatus s);

struct RunReport {
  std::string program;
  TriggerInput input;
  std::vector<StageOutcome> stages;
  RunStatus status = RunStatus::Error;
  std::string error;                  // Error status
  std::string abort_stage, abort_reason;
  std::optional<VulnClass> cls;
  std::string technique = "none";     // "ara", "cloned" or "none"
  std::string placement;              // "trivial" or "translated"
  std::vector<std::string> notes;     // e.g. why cloning was not used
  std::map<std::string, ScopeMap> scopes;
  std::optional<Patch> patch;
  std::string predicate;              // rendered
  std::string patched_source;
  std::string diff;
  std::optional<ValidationVerdict> validation;
  double total_ms = 0;

  std::shared_ptr<Program> prog;  // for dumps
  ExecResult trigger_run;

  int exit_code() const;
  nlohmann::json to_json() const;
};

/// Runs the whole pipeline on one program and trigger input. Never throws
/// for problems in the input program; those end in an Error or Aborted
/// report.
RunReport run_pipeline(const std::string& path, const std::string& source, const TriggerInput& trigger,
                       const RunOptions& opts = {});

}  // namespace patchsmith
