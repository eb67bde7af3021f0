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


#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "patchsmith/corpus.hpp"
#include "patchsmith/pipeline.hpp"

namespace fs = std::filesystem;
using namespace patchsmith;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

Technique technique(bool force_ara, bool force_clone) {
  if (force_ara) return Technique::Ara;
  if (force_clone) return Technique::Clone;
  return Technique::Auto;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patchsmith: sound patches for memory-safety faults in Mini-C programs"};
  app.require_subcommand(1);

  std::string program, input, out_path, report_path;
  std::vector<std::string> benign_files;
  bool force_ara = false, force_clone = false, dump_ir_flag = false, dump_trace_flag = false;
  CLI::App* run = app.add_subcommand("run", "Patch one program given a triggering input");
  run->add_option("program", program, "Mini-C source file")->required()->check(CLI::ExistingFile);
  run->add_option("--input", input, "Trigger input (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--benign", benign_files, "Benign inputs that must behave the same after patching")
      ->check(CLI::ExistingFile);
  run->add_option("-o,--output", out_path, "Write the diff here instead of stdout");
  run->add_option("--report", report_path, "Report path (default: PROGRAM.report.json in the working directory)");
  auto* fa = run->add_flag("--force-ara", force_ara, "Use access range analysis only");
  run->add_flag("--force-clone", force_clone, "Use loop cloning only")->excludes(fa);
  run->add_flag("--dump-ir", dump_ir_flag, "Print the IR to stderr");
  run->add_flag("--dump-trace", dump_trace_flag, "Print the trigger trace to stderr");

  std::string corpus_dir;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool c_ara = false, c_clone = false;
  CLI::App* corpus = app.add_subcommand("corpus", "Run every bundle of a corpus directory");
  corpus->add_option("dir", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  corpus->add_option("-j,--jobs", jobs, "Bundles run in parallel");
  auto* cfa = corpus->add_flag("--force-ara", c_ara, "Use access range analysis only");
  corpus->add_flag("--force-clone", c_clone, "Use loop cloning only")->excludes(cfa);
  int sweep = 0;
  corpus->add_option("--sweep", sweep, "Random grammar inputs per patched bundle, checked for faults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      RunOptions opts;
      opts.technique = technique(force_ara, force_clone);
      for (const auto& b : benign_files) opts.benign.push_back(load_input(b));
      TriggerInput trigger = load_input(input);
      RunReport rep = run_pipeline(program, slurp(program), trigger, opts);
      if (dump_ir_flag && rep.prog) std::cerr << dump_ir(*rep.prog);
      if (dump_trace_flag && rep.prog) std::cerr << dump_trace(*rep.prog, rep.trigger_run);
      if (report_path.empty()) report_path = fs::path(program).stem().string() + ".report.json";
      write_file(report_path, rep.to_json().dump(2) + "\n");
      if (!rep.diff.empty()) {
        if (out_path.empty()) std::cout << rep.diff;
        else write_file(out_path, rep.diff);
      }
      switch (rep.status) {
        case RunStatus::Patched: std::cerr << "patched\n"; break;
        case RunStatus::Clean: std::cerr << "clean: the trigger input does not fault\n"; break;
        case RunStatus::Aborted:
          std::cerr << "aborted (" << rep.abort_stage << "): " << rep.abort_reason << "\n";
          break;
        case RunStatus::Error: std::cerr << "error: " << rep.error << "\n"; break;
      }
      return rep.exit_code();
    }
    RunOptions opts;
    opts.technique = technique(c_ara, c_clone);
    auto bundles = load_corpus(corpus_dir);
    auto results = run_corpus(bundles, opts, jobs);
    std::cout << corpus_table(results);
    int rc = 0;
    for (const auto& r : results)
      if (!r.mismatches.empty()) rc = 1;
    if (sweep > 0) {
      std::vector<std::optional<SweepStats>> stats(bundles.size());
      std::atomic<size_t> next{0};
      auto worker = [&] {
        for (size_t i = next++; i < bundles.size(); i = next++)
          if (bundles[i].grammar && results[i].report.status == RunStatus::Patched)
            stats[i] = soundness_sweep(bundles[i], results[i].report, sweep, 1 + i);
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      std::cout << "\n";
      for (size_t i = 0; i < bundles.size(); ++i) {
        if (!stats[i]) continue;
        const SweepStats& st = *stats[i];
        std::cout << "sweep " << bundles[i].name << ": " << st.inputs << " inputs, " << st.original_faults
                  << " fault the original, " << st.patched_faults << " fault the patch, " << st.incomplete
                  << " incomplete\n";
        for (const auto& c : st.counterexamples) std::cout << "  " << c << "\n";
        if (st.patched_faults) rc = 1;
      }
    }
    return rc;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
