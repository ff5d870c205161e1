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

#include "sotverse/ingestion.h"

#include <fmt/format.h>
#include <gtest/gtest.h>

#include <random>
#include <string>

#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "test_util.h"

namespace sotverse {
namespace {

namespace fs = std::filesystem;

// Annotation-only canonical sequence: groundtruth rows plus a meta.json stub.
void write_stub(const fs::path& dir, const std::vector<std::string>& rows, int width = 320,
                int height = 240) {
  fs::create_directories(dir);
  std::string gt;
  for (const auto& r : rows) gt += r + "\n";
  text::write_file(dir / "groundtruth.csv", gt);
  text::write_file(dir / "meta.json", fmt::format(R"({{"width":{},"height":{},"frames":{}}})",
                                                  width, height, rows.size()));
}

std::vector<std::string> box_rows(std::size_t n) {
  std::vector<std::string> rows;
  for (std::size_t t = 0; t < n; ++t) rows.push_back(fmt::format("{},{},20,30", t, 2 * t));
  return rows;
}

std::string manifest_json(const std::vector<std::string>& ids, const std::string& extra = "") {
  std::string seqs;
  for (const auto& id : ids) {
    if (!seqs.empty()) seqs += ",";
    seqs += fmt::format(R"({{"id":"{}","dir":"{}"}})", id, id);
  }
  return fmt::format(R"({{"schema":1,"environment":"env","sequences":[{}]{}}})", seqs, extra);
}

TEST(IngestionTest, LoadsPlainSequence) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "s", box_rows(100));
  const Sequence seq = load_sequence(tmp / "s", SourceFormat::kCanonical);
  EXPECT_EQ(seq.id, "s");
  EXPECT_EQ(seq.size(), 100u);
  EXPECT_EQ(seq.absent_count(), 0u);
  EXPECT_EQ(seq.frames[5].width, 320);
  EXPECT_EQ(seq.groundtruth[7], (BoundingBox{7, 14, 20, 30}));
  EXPECT_NO_THROW(seq.validate());
}

TEST(IngestionTest, AbsenceFileMarksFrames) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "s", box_rows(100));
  std::string flags;
  for (int t = 0; t < 100; ++t) flags += (t >= 40 && t < 50) ? "1\n" : "0\n";
  text::write_file(tmp / "s" / "absence.csv", flags);
  const Sequence seq = load_sequence(tmp / "s", SourceFormat::kCanonical);
  EXPECT_EQ(seq.absent_count(), 10u);
  for (int t = 40; t < 50; ++t) EXPECT_FALSE(seq.groundtruth[static_cast<std::size_t>(t)]);
  EXPECT_TRUE(seq.groundtruth[39]);
  EXPECT_TRUE(seq.groundtruth[50]);
}

TEST(IngestionTest, ParsesDecimalRow) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "s", {"10.5,20.0,30.0,40.0", "1,1,1,1"});
  const Sequence seq = load_sequence(tmp / "s", SourceFormat::kCanonical);
  EXPECT_EQ(seq.groundtruth[0], (BoundingBox{10.5, 20, 30, 40}));
}

TEST(IngestionTest, ErrorsNameTheLine) {
  testing::TempDir tmp("ing");
  auto rows = box_rows(10);
  rows[6] = "1,2,three,4";
  write_stub(tmp / "s", rows);
  try {
    load_sequence(tmp / "s", SourceFormat::kCanonical);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.where(), (tmp / "s" / "groundtruth.csv").string() + ":7");
  }
  rows[6] = "1,2,3";
  write_stub(tmp / "s", rows);
  EXPECT_THROW(load_sequence(tmp / "s", SourceFormat::kCanonical), LoadError);
  rows[6] = "1,2,0,4";
  write_stub(tmp / "s", rows);
  EXPECT_THROW(load_sequence(tmp / "s", SourceFormat::kCanonical), LoadError);
}

TEST(IngestionTest, RowCountMismatch) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "s", box_rows(10));
  text::write_file(tmp / "s" / "meta.json", R"({"width":10,"height":10,"frames":11})");
  EXPECT_THROW(load_sequence(tmp / "s", SourceFormat::kCanonical), LoadError);
  write_stub(tmp / "s", box_rows(10));
  text::write_file(tmp / "s" / "absence.csv", "0\n0\n");
  EXPECT_THROW(load_sequence(tmp / "s", SourceFormat::kCanonical), LoadError);
}

TEST(IngestionTest, FirstFrameAbsentIsRejected) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "s", box_rows(5));
  text::write_file(tmp / "s" / "absence.csv", "1\n0\n0\n0\n0\n");
  EXPECT_THROW(load_sequence(tmp / "s", SourceFormat::kCanonical), LoadError);
}

TEST(IngestionTest, MissingDirectory) {
  EXPECT_THROW(load_sequence("/nonexistent/seq", SourceFormat::kCanonical), LoadError);
}

TEST(IngestionTest, ImagesDefineFrameCountAndResolution) {
  testing::TempDir tmp("ing");
  const fs::path dir = tmp / "img";
  fs::create_directories(dir / "frames");
  for (int t = 0; t < 3; ++t) {
    text::write_file(dir / "frames" / fmt::format("{:06d}.ppm", t),
                     std::string("P6\n7 5\n255\n") + std::string(7 * 5 * 3, '\x40'));
  }
  text::write_file(dir / "groundtruth.csv", "1,1,2,2\n1,1,2,2\n1,1,2,2\n");
  const Sequence seq = load_sequence(dir, SourceFormat::kCanonical);
  EXPECT_EQ(seq.frames[2].image_path, "frames/000002.ppm");
  EXPECT_EQ(seq.frames[0].width, 7);
  EXPECT_EQ(seq.frames[0].height, 5);
  EXPECT_EQ(seq.image_file(1), dir / "frames" / "000001.ppm");
}

TEST(IngestionTest, VotPolygonBecomesHull) {
  testing::TempDir tmp("ing");
  const fs::path dir = tmp / "vot";
  fs::create_directories(dir);
  text::write_file(dir / "groundtruth.txt", "1,2,11,2,11,7,1,7\n0,5,5,0,10,5,5,10\n\n");
  text::write_file(dir / "meta.json", R"({"width":64,"height":48,"frames":3})");
  const Sequence seq = load_sequence(dir, SourceFormat::kVot, "v", "vot2019");
  EXPECT_EQ(seq.groundtruth[0], (BoundingBox{1, 2, 10, 5}));
  EXPECT_EQ(seq.groundtruth[1], (BoundingBox{0, 0, 10, 10}));
  EXPECT_FALSE(seq.groundtruth[2]);
  EXPECT_EQ(seq.dataset_id, "vot2019");
}

TEST(IngestionTest, LasotFlagsBecomeAbsence) {
  testing::TempDir tmp("ing");
  const fs::path dir = tmp / "las";
  fs::create_directories(dir);
  text::write_file(dir / "groundtruth.txt", "1,1,5,5\n1,1,5,5\n0,0,0,0\n1,1,5,5\n");
  text::write_file(dir / "full_occlusion.txt", "0,1,0,0\n");
  text::write_file(dir / "out_of_view.txt", "0,0,1,0\n");
  text::write_file(dir / "meta.json", R"({"width":64,"height":48,"frames":4})");
  const Sequence seq = load_sequence(dir, SourceFormat::kLasot);
  EXPECT_TRUE(seq.groundtruth[0]);
  EXPECT_FALSE(seq.groundtruth[1]);
  EXPECT_FALSE(seq.groundtruth[2]);
  EXPECT_TRUE(seq.groundtruth[3]);
}

TEST(IngestionTest, Got10kAbsenceLabel) {
  testing::TempDir tmp("ing");
  const fs::path dir = tmp / "got";
  fs::create_directories(dir);
  text::write_file(dir / "groundtruth.txt", "1,1,5,5\n1,1,5,5\n1,1,5,5\n");
  text::write_file(dir / "absence.label", "0\n0\n1\n");
  text::write_file(dir / "meta.json", R"({"width":64,"height":48,"frames":3})");
  const Sequence seq = load_sequence(dir, SourceFormat::kGot10k);
  EXPECT_EQ(seq.absent_count(), 1u);
  EXPECT_FALSE(seq.groundtruth[2]);
}

TEST(IngestionTest, OtbTabSeparatedRows) {
  testing::TempDir tmp("ing");
  const fs::path dir = tmp / "otb";
  fs::create_directories(dir);
  text::write_file(dir / "groundtruth_rect.txt", "1\t2\t3\t4\n5 6 7 8\n");
  text::write_file(dir / "meta.json", R"({"width":64,"height":48,"frames":2})");
  const Sequence seq = load_sequence(dir, SourceFormat::kOtb);
  EXPECT_EQ(seq.groundtruth[1], (BoundingBox{5, 6, 7, 8}));
}

TEST(IngestionTest, SourceFormatTags) {
  for (const char* tag : {"canonical", "otb", "vot", "got10k", "lasot"}) {
    EXPECT_EQ(to_string(parse_source_format(tag)), tag);
  }
  EXPECT_THROW(parse_source_format("mot"), ConfigError);
}

TEST(IngestionTest, CanonicalRoundTrip) {
  std::mt19937_64 rng(5);
  testing::TempDir tmp("ing");
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + testing::below(rng, 60);
    Sequence seq;
    seq.id = "rt";
    for (std::size_t t = 0; t < n; ++t) {
      seq.frames.push_back({"rt", t, fmt::format("frames/{:06d}.jpg", t), 640, 360});
      if (t > 0 && testing::below(rng, 6) == 0) {
        seq.groundtruth.push_back(std::nullopt);
      } else {
        seq.groundtruth.push_back(testing::random_box(rng));
      }
    }
    const fs::path dir = tmp / fmt::format("rt{}", trial);
    write_canonical(seq, dir);
    const Sequence back = load_sequence(dir, SourceFormat::kCanonical, "rt");
    ASSERT_EQ(back.groundtruth, seq.groundtruth);
    ASSERT_EQ(back.size(), seq.size());
    for (std::size_t t = 0; t < n; ++t) {
      ASSERT_EQ(back.frames[t].width, 640);
      ASSERT_EQ(back.frames[t].height, 360);
    }
    // Writing the reloaded sequence again is byte-identical.
    ASSERT_EQ(format_groundtruth_csv(back), text::read_file(dir / "groundtruth.csv"));
  }
}

TEST(IngestionTest, ManifestOfTwoSequences) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "a", box_rows(10));
  write_stub(tmp / "b", box_rows(30));
  text::write_file(tmp / "m.json", manifest_json({"a", "b"}));
  const Environment env = load_manifest(tmp / "m.json");
  EXPECT_EQ(env.id, "env");
  ASSERT_EQ(env.sequences.size(), 2u);
  EXPECT_EQ(env.sequence("b").size(), 30u);
  const DatasetSummary s = dataset_summary(env);
  EXPECT_EQ(s.mean_rounded(), 20u);
  EXPECT_EQ(s.total_frames, 40u);
  EXPECT_EQ(s.min_frames, 10u);
  EXPECT_EQ(s.max_frames, 30u);
}

TEST(IngestionTest, ManifestErrors) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "a", box_rows(10));
  text::write_file(tmp / "dup.json", manifest_json({"a", "a"}));
  EXPECT_THROW(load_manifest(tmp / "dup.json"), LoadError);
  text::write_file(tmp / "missing.json", manifest_json({"a", "zz"}));
  try {
    load_manifest(tmp / "missing.json");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
  text::write_file(tmp / "schema.json", R"({"schema":2,"environment":"e","sequences":[]})");
  EXPECT_THROW(load_manifest(tmp / "schema.json"), LoadError);
  text::write_file(tmp / "notjson.json", "{");
  EXPECT_THROW(load_manifest(tmp / "notjson.json"), LoadError);
  text::write_file(tmp / "badid.json", manifest_json({"a@1"}));
  EXPECT_THROW(load_manifest(tmp / "badid.json"), LoadError);
}

TEST(IngestionTest, ExpectedVideoCountMismatch) {
  testing::TempDir tmp("ing");
  std::vector<std::string> ids;
  for (int i = 0; i < 99; ++i) {
    ids.push_back(fmt::format("s{:03d}", i));
    write_stub(tmp / ids.back(), box_rows(3));
  }
  text::write_file(tmp / "m.json", manifest_json(ids, R"(,"expected":{"videos":100})"));
  try {
    load_manifest(tmp / "m.json");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("videos expected 100 got 99"), std::string::npos)
        << e.what();
  }
}

TEST(IngestionTest, OtbShapedStubMatchesPublishedStatistics) {
  // 100 sequences: one of 71 frames, one of 3872, 79 of 562 and 19 of 561.
  testing::TempDir tmp("ing");
  std::vector<std::size_t> lengths{71, 3872};
  lengths.insert(lengths.end(), 79, 562);
  lengths.insert(lengths.end(), 19, 561);
  std::string seqs;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::string id = fmt::format("otb{:03d}", i);
    const fs::path dir = tmp / id;
    fs::create_directories(dir);
    std::string gt;
    for (std::size_t t = 0; t < lengths[i]; ++t) gt += "10\t10\t30\t40\n";
    text::write_file(dir / "groundtruth_rect.txt", gt);
    text::write_file(dir / "meta.json",
                     fmt::format(R"({{"width":640,"height":480,"frames":{}}})", lengths[i]));
    if (!seqs.empty()) seqs += ",";
    seqs += fmt::format(R"({{"id":"{}","format":"otb","dataset":"otb2015"}})", id);
  }
  text::write_file(
      tmp / "m.json",
      fmt::format(R"({{"schema":1,"environment":"otb2015","sequences":[{}],)"
                  R"("expected":{{"videos":100,"min_frames":71,"mean_frames":590,)"
                  R"("max_frames":3872,"total_frames":"59K"}}}})",
                  seqs));
  const Environment env = load_manifest(tmp / "m.json");
  const DatasetSummary s = dataset_summary(env);
  EXPECT_EQ(s.count, 100u);
  EXPECT_EQ(s.min_frames, 71u);
  EXPECT_EQ(s.mean_rounded(), 590u);
  EXPECT_EQ(s.max_frames, 3872u);
  EXPECT_EQ(s.total_frames, 59000u);
}

TEST(IngestionTest, SummaryExamples) {
  Environment env;
  env.id = "one";
  Sequence a;
  a.id = "a";
  a.frames.resize(50);
  a.groundtruth.assign(50, BoundingBox{1, 1, 1, 1});
  env.sequences.push_back(a);
  DatasetSummary s = dataset_summary(env);
  EXPECT_EQ(s.count, 1u);
  EXPECT_EQ(s.min_frames, 50u);
  EXPECT_EQ(s.mean_rounded(), 50u);
  EXPECT_EQ(s.max_frames, 50u);
  EXPECT_EQ(s.total_frames, 50u);
  EXPECT_THROW(dataset_summary(Environment{}), DomainError);
}

TEST(IngestionTest, MeanRoundsHalfToEven) {
  EXPECT_EQ((DatasetSummary{2, 0, 0, 5, 0}).mean_rounded(), 2u);
  EXPECT_EQ((DatasetSummary{2, 0, 0, 7, 0}).mean_rounded(), 4u);
  EXPECT_EQ((DatasetSummary{3, 0, 0, 8, 0}).mean_rounded(), 3u);
  EXPECT_EQ((DatasetSummary{3, 0, 0, 7, 0}).mean_rounded(), 2u);
  EXPECT_DOUBLE_EQ((DatasetSummary{3, 0, 0, 7, 0}).mean(), 7.0 / 3.0);
}

TEST(IngestionTest, RoundedCounts) {
  EXPECT_EQ(parse_rounded_count("59K"), std::make_pair(59000.0, 500.0));
  EXPECT_EQ(parse_rounded_count("1.5M"), std::make_pair(1500000.0, 50000.0));
  EXPECT_EQ(parse_rounded_count("3872"), std::make_pair(3872.0, 0.0));
  EXPECT_THROW(parse_rounded_count("many"), ConfigError);
}

TEST(IngestionTest, CheckExpectedTolerance) {
  ExpectedStats ex;
  ex.total_frames = 59000;
  ex.total_tolerance = 500;
  EXPECT_NO_THROW(check_expected({100, 1, 1, 59499, 0}, ex, "e"));
  EXPECT_THROW(check_expected({100, 1, 1, 59501, 0}, ex, "e"), LoadError);
}

TEST(IngestionTest, LoadsAreDeterministic) {
  testing::TempDir tmp("ing");
  write_stub(tmp / "a", box_rows(17));
  write_stub(tmp / "b", box_rows(23));
  text::write_file(tmp / "m.json", manifest_json({"a", "b"}));
  const DatasetSummary s1 = dataset_summary(load_manifest(tmp / "m.json"));
  const DatasetSummary s2 = dataset_summary(load_manifest(tmp / "m.json"));
  EXPECT_EQ(s1.total_frames, s2.total_frames);
  EXPECT_EQ(s1.total_frames, 40u);
  EXPECT_EQ(s1.mean(), s2.mean());
}

}  // namespace
}  // namespace sotverse
