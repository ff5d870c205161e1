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

#include <filesystem>
#include <string>
#include <vector>

#include "sotverse/evaluation.h"
#include "sotverse/metrics.h"

namespace sotverse {

// One tracker x space x mechanism.
struct ReportEntry {
  std::string tracker;
  std::string space;
  std::string environment;
  Mechanism mechanism = Mechanism::kOpe;
  std::vector<SequenceScores> units;
  AggregateScores aggregate;
};

struct ReportOptions {
  // Adds the pooled-count challenging curve to every entry.
  bool challenging_micro = false;
};

ReportEntry make_entry(const RunRecord& record, std::vector<SequenceScores> units);

// Loads every run under `runs_dir` (the directory itself when it holds
// run.json, otherwise its immediate subdirectories, in name order) and scores it.
std::vector<ReportEntry> score_runs(const std::filesystem::path& runs_dir);

std::string format_report_json(std::vector<ReportEntry> entries,
                               const ReportOptions& options = {});

// report.json, six SVG plots and CSV tables. Throws DomainError
// "nothing to report" on an empty entry list.
void emit_report(std::vector<ReportEntry> entries, const std::filesystem::path& out_dir,
                 const ReportOptions& options = {});

inline constexpr const char* kPlotFiles[] = {
    "precision.svg", "normalized_precision.svg", "success.svg",
    "challenging.svg", "attribute.svg", "robust.svg"};

}  // namespace sotverse
