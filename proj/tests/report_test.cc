// Copyright 2026 The sotverse Authors
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

#include "sotverse/report.h"

#include <gtest/gtest.h>

#include "fixture_runs.h"
#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "test_util.h"

namespace sotverse {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ReportTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("report");
    corpus_ = new FixtureCorpus(write_fixture_corpus(dir_->path() / "corpus"));
    const fs::path attrs = testing::annotate_fixture(*corpus_, dir_->path() / "attrs");
    ctx_ = new EvalContext(load_context({corpus_->manifest, {}, attrs, {}}));
    plain_ = new EvalContext(load_context({corpus_->manifest, {}, {}, {}}));
  }
  static void TearDownTestSuite() {
    delete plain_;
    delete ctx_;
    delete corpus_;
    delete dir_;
  }

  static std::vector<ReportEntry> entries() {
    std::vector<ReportEntry> out;
    for (const auto& t : corpus_->trackers) {
      out.push_back(testing::replay_entry(*ctx_, testing::replay_dir(*corpus_, t), t));
    }
    out.push_back(rope_entry());
    return out;
  }

  // R-OPE with an in-process tracker that loses the target for 12 frames
  // in the middle of every unit.
  static ReportEntry rope_entry() {
    RunData run;
    run.record = {"scripted", ctx_->space_id, ctx_->environment.id, Mechanism::kRope, {}, {}};
    for (const auto& unit : ctx_->units) {
      const Sequence& seq = unit.seq;
      const std::size_t lost = seq.size() / 2;
      TrackerSession session(scripted_channel("scripted", [&](const ProtocolMessage& m) -> Region {
        const std::size_t t = *m.index;
        if (m.type == MessageType::kFrame && t >= lost && t < lost + 12) {
          return BoundingBox{0, 0, 1, 1};
        }
        return seq.groundtruth[t];
      }));
      session.handshake();
      RopeResult r = run_rope(session, seq, unit.starts);
      run.record.units.push_back(unit.id);
      run.trajectories.emplace(unit.id, std::move(r.trajectory));
      run.logs.emplace(unit.id, std::move(r.log));
    }
    return make_entry(run.record, score_run(*ctx_, run));
  }

  static testing::TempDir* dir_;
  static FixtureCorpus* corpus_;
  static EvalContext* ctx_;
  static EvalContext* plain_;
};

testing::TempDir* ReportTest::dir_ = nullptr;
FixtureCorpus* ReportTest::corpus_ = nullptr;
EvalContext* ReportTest::ctx_ = nullptr;
EvalContext* ReportTest::plain_ = nullptr;

TEST_F(ReportTest, NothingToReport) {
  testing::TempDir out("report-empty");
  try {
    emit_report({}, out.path());
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("nothing to report"), std::string::npos);
  }
}

TEST_F(ReportTest, OneTrackerOneSequenceGivesSixPlots) {
  EvalContext one = *plain_;
  one.units.resize(1);
  testing::TempDir out("report-one");
  emit_report({testing::replay_entry(one, testing::replay_dir(*corpus_, "oracle"), "oracle")},
              out.path());
  for (const char* f : kPlotFiles) {
    ASSERT_TRUE(fs::exists(out / f)) << f;
    const std::string svg = text::read_file(out / f);
    EXPECT_NE(svg.find("<svg"), std::string::npos) << f;
    EXPECT_NE(svg.find("</svg>"), std::string::npos) << f;
  }
  EXPECT_EQ(std::size(kPlotFiles), 6u);
  ASSERT_TRUE(fs::exists(out / "report.json"));

  const json doc = json::parse(text::read_file(out / "report.json"));
  EXPECT_EQ(doc["schema"], 1);
  ASSERT_EQ(doc["entries"].size(), 1u);
  const json& e = doc["entries"][0];
  EXPECT_EQ(e["tracker"], "oracle");
  EXPECT_EQ(e["units"], 1);
  EXPECT_EQ(e["headlines"]["success_auc"], 1.0);
  EXPECT_EQ(e["headlines"]["precision"], 1.0);
  // No attribute tables: the dependent indicators are null, not zero.
  EXPECT_TRUE(e["headlines"]["challenging"].is_null());
  EXPECT_TRUE(e["curves"]["challenging"].is_null());
  EXPECT_TRUE(e["attribute_ratios"].is_null());
  EXPECT_TRUE(e["robust"].is_null());
}

TEST_F(ReportTest, FullBundle) {
  testing::TempDir out("report-full");
  emit_report(entries(), out.path(), {true});
  const json doc = json::parse(text::read_file(out / "report.json"));
  ASSERT_EQ(doc["entries"].size(), 4u);
  // Sorted by space, mechanism, tracker.
  EXPECT_EQ(doc["entries"][0]["tracker"], "drifter");
  EXPECT_EQ(doc["entries"][1]["tracker"], "offset");
  EXPECT_EQ(doc["entries"][2]["tracker"], "oracle");
  EXPECT_EQ(doc["entries"][3]["tracker"], "scripted");
  EXPECT_EQ(doc["entries"][3]["mechanism"], "rope");

  const json& oracle = doc["entries"][2];
  EXPECT_EQ(oracle["curves"]["success"]["values"].size(), 101u);
  EXPECT_EQ(oracle["curves"]["success"]["headline_threshold"], 0.5);
  EXPECT_EQ(oracle["curves"]["challenging"]["headline_threshold"], 0.75);
  EXPECT_TRUE(oracle.contains("weighted_headlines"));
  EXPECT_TRUE(oracle["curves"].contains("challenging_micro"));
  // A perfect tracker has no fail frames, so every ratio is undefined.
  EXPECT_EQ(oracle["attribute_ratios"]["fail_frames"], 0);
  EXPECT_TRUE(oracle["attribute_ratios"]["main_failure"].is_null());
  EXPECT_TRUE(oracle["attribute_ratios"]["ratios"]["fast_motion"].is_null());

  const json& drifter = doc["entries"][0];
  EXPECT_GT(drifter["attribute_ratios"]["fail_frames"].get<int>(), 0);
  EXPECT_TRUE(drifter["attribute_ratios"]["main_failure"].is_string());
  EXPECT_LT(drifter["headlines"]["success_auc"].get<double>(), 1.0);

  const json& rope = doc["entries"][3];
  ASSERT_TRUE(rope["robust"].is_object());
  EXPECT_GT(rope["robust"]["restarts"].get<double>(), 0.0);
  for (const auto& row : rope["per_unit"]) {
    EXPECT_LE(row["restarts"].get<int>(), 1);
    EXPECT_LE(row["longest_segment"].get<int>(), row["length"].get<int>());
  }

  const std::string headlines = text::read_file(out / "headlines.csv");
  EXPECT_EQ(headlines.substr(0, headlines.find('\n')),
            "tracker,space,mechanism,units,precision,normalized_precision,success_auc,"
            "mean_overlap,challenging,restarts,longest_segment");
  EXPECT_TRUE(fs::exists(out / "per_unit.csv"));
  EXPECT_TRUE(fs::exists(out / "attribute_ratios.csv"));
  EXPECT_NE(text::read_file(out / "robust.svg").find("scripted"), std::string::npos);
}

TEST_F(ReportTest, Deterministic) {
  testing::TempDir a("report-a"), b("report-b");
  emit_report(entries(), a.path());
  auto reversed = entries();
  std::reverse(reversed.begin(), reversed.end());
  emit_report(reversed, b.path());
  std::size_t files = 0;
  for (const auto& f : fs::directory_iterator(a.path())) {
    const auto name = f.path().filename();
    EXPECT_EQ(text::read_file(f.path()), text::read_file(b.path() / name)) << name;
    ++files;
  }
  EXPECT_EQ(files, 10u);
}

TEST_F(ReportTest, WriteFailureNamesThePath) {
  testing::TempDir out("report-bad");
  text::write_file(out / "blocker", "x");
  try {
    emit_report(entries(), out / "blocker");
    FAIL() << "expected a write error";
  } catch (const LoadError& e) {
    EXPECT_NE(e.where().find("blocker"), std::string::npos) << e.where();
  }
}

TEST_F(ReportTest, ScoreRunsReadsWrittenRuns) {
  testing::TempDir runs("report-runs");
  const fs::path attrs = dir_->path() / "attrs";
  for (const auto& t : corpus_->trackers) {
    RunData run = testing::replay_run(*ctx_, directory_lookup(testing::replay_dir(*corpus_, t)), t);
    run.record.sources = {corpus_->manifest, {}, attrs, {}};
    write_run(runs / t, run);
  }
  const auto loaded = score_runs(runs.path());
  ASSERT_EQ(loaded.size(), 3u);
  std::vector<ReportEntry> direct;
  for (const auto& t : corpus_->trackers) {
    direct.push_back(testing::replay_entry(*ctx_, testing::replay_dir(*corpus_, t), t));
  }
  EXPECT_EQ(format_report_json(loaded), format_report_json(direct));
  EXPECT_THROW(score_runs(runs / "missing"), LoadError);
}

}  // namespace
}  // namespace sotverse
