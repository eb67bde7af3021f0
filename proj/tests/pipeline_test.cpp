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


#include "patchsmith/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "patchsmith/corpus.hpp"
#include "test_util.hpp"

namespace patchsmith {
namespace {

using testing::corpus_path;
using testing::read_file;

RunReport run_bundle(const std::string& name, RunOptions opts = {}, const std::string& trigger = "trigger.json") {
  Bundle b = load_bundle(corpus_path(name));
  if (opts.benign.empty()) opts.benign = b.benign;
  return run_pipeline(b.program_path, b.source, load_input(corpus_path(name + "/" + trigger)), opts);
}

TEST(Pipeline, GridPatchedInFoo) {
  RunReport r = run_bundle("grid_copy");
  ASSERT_EQ(r.status, RunStatus::Patched) << r.abort_stage << ": " << r.abort_reason;
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_EQ(r.technique, "ara");
  EXPECT_EQ(r.placement, "translated");
  ASSERT_TRUE(r.patch);
  EXPECT_EQ(r.patch->func, "foo");
  EXPECT_EQ(r.patch->handler, "return -1;");
  EXPECT_NE(r.diff.find("+  if ("), std::string::npos) << r.diff;
  EXPECT_NE(r.diff.find("+    return -1;\n   char *output = foo_malloc(rows, cols + 1);"), std::string::npos) << r.diff;
  ASSERT_TRUE(r.validation);
  EXPECT_TRUE(r.validation->ok);
  EXPECT_EQ(r.stages.back().name, "validate");
}

TEST(Pipeline, DecodeUsesCloning) {
  RunReport r = run_bundle("udf_decode");
  ASSERT_EQ(r.status, RunStatus::Patched) << r.abort_reason;
  EXPECT_EQ(r.technique, "cloned");
  EXPECT_NE(r.patched_source.find("void decode_clone(const char *in, char *out, char *limit, char **start, char **end)"),
            std::string::npos);
  EXPECT_EQ(canonical(r.predicate), canonical("end > data + datalen || start < data"));
}

TEST(Pipeline, ForcedTechniques) {
  RunOptions ara;
  ara.technique = Technique::Ara;
  RunReport r = run_bundle("udf_decode", ara);
  EXPECT_EQ(r.status, RunStatus::Aborted);
  EXPECT_EQ(r.abort_stage, "ara");
  RunOptions clone;
  clone.technique = Technique::Clone;
  RunReport g = run_bundle("grid_copy", clone);
  EXPECT_EQ(g.status, RunStatus::Aborted);
  EXPECT_EQ(g.abort_stage, "clone");
}

TEST(Pipeline, AbortLeavesNoEdits) {
  for (const char* name : {"abort_offpath", "abort_alias", "abort_no_convergence", "abort_no_handler",
                           "abort_unanalyzable"}) {
    RunReport r = run_bundle(name);
    EXPECT_EQ(r.status, RunStatus::Aborted) << name;
    EXPECT_EQ(r.exit_code(), 2) << name;
    EXPECT_FALSE(r.patch) << name;
    EXPECT_TRUE(r.diff.empty()) << name;
    EXPECT_TRUE(r.patched_source.empty()) << name;
    EXPECT_FALSE(r.abort_reason.empty()) << name;
    EXPECT_EQ(r.to_json()["abort"]["stage"], r.abort_stage) << name;
  }
}

TEST(Pipeline, BenignTriggerIsClean) {
  RunReport r = run_bundle("grid_copy", {}, "benign/grid.json");
  EXPECT_EQ(r.status, RunStatus::Clean);
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_TRUE(r.diff.empty());
}

TEST(Pipeline, ParseErrorIsAnError) {
  RunReport r = run_pipeline("bad.mc", "int main( { return 0; }", TriggerInput{{"bad"}, {}});
  EXPECT_EQ(r.status, RunStatus::Error);
  EXPECT_EQ(r.exit_code(), 1);
  EXPECT_FALSE(r.error.empty());
}

TEST(Pipeline, RuntimeErrorIsAnAbort) {
  RunReport r = run_pipeline("div.mc", "int main(int argc, char **argv) { return 10 / (argc - 1); }",
                             TriggerInput{{"div"}, {}});
  EXPECT_EQ(r.status, RunStatus::Aborted);
  EXPECT_EQ(r.abort_stage, "execute");
}

nlohmann::json without_timings(nlohmann::json j) {
  j.erase("timings");
  for (auto& s : j["stages"]) s.erase("ms");
  return j;
}

TEST(Report, DeterministicModuloTimings) {
  for (const char* name : {"grid_copy", "cve_2016_5844", "abort_alias"}) {
    auto a = run_bundle(name).to_json(), b = run_bundle(name).to_json();
    EXPECT_EQ(without_timings(a), without_timings(b)) << name;
  }
}

TEST(Report, Schema) {
  auto j = run_bundle("cve_2016_5844").to_json();
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["status"], "patched");
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_EQ(j["class"], "integer_overflow");
  EXPECT_EQ(j["patch"]["kind"], "repair_cast");
  EXPECT_EQ(j["patch"]["text"], "skipsize = 2048 * (int64_t)vd->location;");
  EXPECT_TRUE(j["validation"]["ok"]);
  EXPECT_TRUE(j["timings"]["total_ms"].is_number());
  for (const auto& s : j["stages"]) EXPECT_EQ(s["status"], "ok");
}

TEST(Corpus, ExpectationMismatchIsReported) {
  RunReport r = run_bundle("grid_copy");
  EXPECT_TRUE(check_expectations(r, load_bundle(corpus_path("grid_copy")).expect).empty());
  auto bad = check_expectations(r, nlohmann::json{{"status", "aborted"}, {"abort_stage", "converge"}});
  EXPECT_EQ(bad.size(), 2u);
}

TEST(Corpus, EmptyDirectory) {
  auto dir = std::filesystem::temp_directory_path() / "patchsmith_empty_corpus";
  std::filesystem::create_directories(dir);
  auto bundles = load_corpus(dir.string());
  EXPECT_TRUE(bundles.empty());
  auto table = corpus_table(run_corpus(bundles, {}, 2));
  EXPECT_NE(table.find("Expectations met: 0/0"), std::string::npos) << table;
}

TEST(Corpus, WholeCorpusMeetsExpectations) {
  auto results = run_corpus(load_corpus(PATCHSMITH_CORPUS_DIR), {}, 4);
  EXPECT_GE(results.size(), 15u);
  for (const auto& r : results)
    for (const auto& m : r.mismatches) ADD_FAILURE() << r.name << ": " << m;
}

TEST(Grammar, SamplesFollowTheGenerators) {
  auto g = nlohmann::json::parse(R"({"argv": ["x", {"int": [3, 5]}, {"bytes": {"alphabet": "ab", "len": [2, 2]}},
      {"seq": ["<", {"one_of": ["p", "q"]}, ">"]}, {"repeat": {"gen": "z", "count": [1, 3]}}]})");
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    TriggerInput in = sample_input(g, rng);
    ASSERT_EQ(in.argv.size(), 5u);
    EXPECT_EQ(in.argv[0], "x");
    int v = std::stoi(in.argv[1]);
    EXPECT_TRUE(v >= 3 && v <= 5);
    EXPECT_EQ(in.argv[2].size(), 2u);
    EXPECT_EQ(in.argv[2].find_first_not_of("ab"), std::string::npos);
    EXPECT_TRUE(in.argv[3] == "<p>" || in.argv[3] == "<q>");
    EXPECT_TRUE(in.argv[4] == "z" || in.argv[4] == "zz" || in.argv[4] == "zzz");
  }
  EXPECT_THROW(sample_input(nlohmann::json::parse(R"({"argv": [{"int": [5, 1]}]})"), rng), Error);
  EXPECT_THROW(sample_input(nlohmann::json::parse(R"({"argv": [{"nope": 1}]})"), rng), Error);
}

}  // namespace
}  // namespace patchsmith
