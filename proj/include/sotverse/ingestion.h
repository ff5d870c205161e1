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

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sotverse/model.h"

namespace sotverse {

// Source layouts understood by load_sequence.
//   canonical  groundtruth.csv, optional absence.csv, frames/, optional meta.json
//   otb        groundtruth_rect.txt, img/
//   vot        groundtruth.txt (4 values or 8-point polygon per row), images in dir
//   got10k     groundtruth.txt, optional absence.label, images in dir
//   lasot      groundtruth.txt, full_occlusion.txt, out_of_view.txt, img/
enum class SourceFormat { kCanonical, kOtb, kVot, kGot10k, kLasot };

SourceFormat parse_source_format(std::string_view tag);
std::string_view to_string(SourceFormat f);

// Published statistics a manifest can be checked against.
struct ExpectedStats {
  std::optional<std::size_t> videos;
  std::optional<std::size_t> min_frames;
  std::optional<std::size_t> mean_frames;
  std::optional<std::size_t> max_frames;
  // Total with the precision it was published at ("59K" -> 59000 +- 500).
  std::optional<double> total_frames;
  double total_tolerance = 0;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path dir;
  SourceFormat format = SourceFormat::kCanonical;
  std::string dataset;
};

struct Manifest {
  std::string environment;
  EnvironmentKind kind = EnvironmentKind::kNormal;
  std::vector<std::string> provenance;
  std::vector<ManifestEntry> entries;
  std::optional<ExpectedStats> expected;
};

// Parses and checks the document (schema, unique ids). Relative directories
// are resolved against `base_dir`.
Manifest parse_manifest(std::string_view json_text,
                        const std::filesystem::path& base_dir);

// Loads every sequence of the manifest. Images are never decoded here; only
// their paths and the frame resolution are recorded. Throws LoadError naming
// the offending entry; nothing is returned on failure.
Environment load_manifest(const std::filesystem::path& path);

Sequence load_sequence(const std::filesystem::path& dir, SourceFormat format,
                       std::string id = {}, std::string dataset = {});

// Writes groundtruth.csv, absence.csv (when any frame is absent) and
// meta.json. Frames are referenced, not copied, unless `copy_frames`.
void write_canonical(const Sequence& seq, const std::filesystem::path& dir,
                     bool copy_frames = false);

std::string format_groundtruth_csv(const Sequence& seq);

struct DatasetSummary {
  std::size_t count = 0;
  std::size_t min_frames = 0;
  std::size_t max_frames = 0;
  std::size_t total_frames = 0;
  std::size_t absent_frames = 0;

  // Exact mean as a fraction total_frames / count.
  double mean() const;
  // Mean rounded half-to-even, as displayed.
  std::size_t mean_rounded() const;
};

DatasetSummary dataset_summary(const Environment& env);

// Throws LoadError listing every statistic that disagrees.
void check_expected(const DatasetSummary& summary, const ExpectedStats& expected,
                    const std::string& environment);

// "59K" -> (59000, 500); "1.45M" -> (1450000, 5000); "59040" -> (59040, 0).
std::pair<double, double> parse_rounded_count(std::string_view text);

}  // namespace sotverse
