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
#include <string>
#include <vector>

#include "sotverse/attributes.h"
#include "sotverse/calibration.h"
#include "sotverse/model.h"

namespace sotverse {

// Quality filters for frames where a tracker may be (re)initialized.
struct StartPolicy {
  double min_scale = 0.02;
  double min_sharpness = 95;
  std::size_t absence_margin = 10;
};

struct StartPointList {
  std::string sequence_id;
  std::vector<std::size_t> frames;  // ascending

  bool empty() const { return frames.empty(); }
  // Smallest start point strictly greater than `frame`.
  std::optional<std::size_t> next_after(std::size_t frame) const;
  // Start points inside [start, end), shifted so that `start` becomes 0.
  StartPointList slice(std::size_t start, std::size_t end) const;
};

StartPointList find_start_points(const Sequence& seq, const AttributeTable& attrs,
                                 const StartPolicy& policy = {});

inline constexpr std::size_t kMinSubsequenceLength = 100;

struct SubsequenceRef {
  std::string sequence;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  AttributeId attribute = AttributeId::kRatio;
  double density = 0;     // fraction of challenging frames

  std::size_t length() const { return end - start; }
  friend bool operator==(const SubsequenceRef&, const SubsequenceRef&) = default;
};

// For each start point, the longest span [start, end) whose challenging
// fraction is at least one half; no candidate when none exists.
std::vector<SubsequenceRef> screen_subsequences(const std::string& sequence_id,
                                                const std::vector<bool>& flags,
                                                const StartPointList& starts,
                                                AttributeId attribute);

// Longest first (ties by start). Drops spans shorter than 100 frames and
// spans overlapping an already kept span by half of their own length.
std::vector<SubsequenceRef> deduplicate(std::vector<SubsequenceRef> candidates);

struct Subspace {
  std::string id;
  AttributeId attribute = AttributeId::kRatio;
  std::string threshold_set_id;
  std::string environment_id;
  std::vector<SubsequenceRef> refs;
};

Subspace construct_subspace(const Environment& env, const AttributeTableMap& tables,
                            AttributeId attr, const ThresholdSet& thresholds,
                            const StartPolicy& policy = {}, unsigned jobs = 1);

std::string format_subspace_json(const Subspace& space);
Subspace parse_subspace_json(std::string_view json_text);
Subspace load_subspace(const std::filesystem::path& path);
void save_subspace(const Subspace& space, const std::filesystem::path& path);

}  // namespace sotverse
