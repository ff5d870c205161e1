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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sotverse/attributes.h"
#include "sotverse/model.h"

namespace sotverse {

enum class PredicateKind { kBelow, kAbove, kOutside };

std::string_view to_string(PredicateKind k);
PredicateKind parse_predicate_kind(std::string_view text);

// Abnormal region of one attribute. Inclusive predicates use <= / >=, as in
// the published table; calibrated ones are strict so values on a whisker
// stay normal.
struct AbnormalPredicate {
  PredicateKind kind = PredicateKind::kOutside;
  double low = 0;   // used by kBelow and kOutside
  double high = 0;  // used by kAbove and kOutside
  bool inclusive = true;

  bool abnormal(double v) const;
  friend bool operator==(const AbnormalPredicate&, const AbnormalPredicate&) = default;
};

struct ThresholdSet {
  std::string id;
  std::string provenance;  // "published" or "calibrated"
  std::array<std::optional<AbnormalPredicate>, kAttributeCount> predicates{};

  const std::optional<AbnormalPredicate>& operator[](AttributeId a) const {
    return predicates[index_of(a)];
  }
  std::optional<AbnormalPredicate>& operator[](AttributeId a) {
    return predicates[index_of(a)];
  }
  void validate() const;
  friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

// The shipped abnormal intervals.
ThresholdSet default_thresholds();

std::string format_thresholds_json(const ThresholdSet& set);
ThresholdSet parse_thresholds_json(std::string_view json_text);
ThresholdSet load_thresholds(const std::filesystem::path& path);
void save_thresholds(const ThresholdSet& set, const std::filesystem::path& path);

// Box-plot summary of a pooled attribute distribution.
struct DistributionSummary {
  AttributeId attribute = AttributeId::kRatio;
  double q1 = 0, q2 = 0, q3 = 0;
  double whisker_low = 0, whisker_high = 0;
  double min = 0, max = 0;
  std::size_t count = 0;
};

// Linear-interpolation quantile (type 7) of an ascending sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

// Quartiles and whiskers at q1 - k*IQR and q3 + k*IQR, clamped to the data
// range. Throws DomainError on an empty sample.
DistributionSummary summarize_distribution(std::vector<double> values,
                                           AttributeId attribute,
                                           double whisker_k = 1.5);

// Pools every available value of `attr` over sequences whose dataset is not
// excluded.
DistributionSummary attribute_distribution(const Environment& env,
                                           const AttributeTableMap& tables,
                                           AttributeId attr,
                                           const std::set<std::string>& exclusions,
                                           double whisker_k = 1.5);

struct AttributePolicy {
  PredicateKind side = PredicateKind::kOutside;
  std::set<std::string> exclude_low;
  std::set<std::string> exclude_high;
};

struct CalibrationPolicy {
  double whisker_k = 1.5;
  std::array<std::optional<AttributePolicy>, kAttributeCount> attributes{};
};

// Table shapes for all ten attributes, with the shipped dataset exclusions.
CalibrationPolicy default_calibration_policy();
CalibrationPolicy parse_calibration_policy(std::string_view json_text);
CalibrationPolicy load_calibration_policy(const std::filesystem::path& path);

ThresholdSet calibrate_thresholds(const Environment& env,
                                  const AttributeTableMap& tables,
                                  const CalibrationPolicy& policy);

using FlagRow = std::array<bool, kAttributeCount>;

struct ChallengeFlags {
  std::string sequence_id;
  std::vector<FlagRow> rows;

  std::size_t size() const { return rows.size(); }
  // One attribute's flag per frame.
  std::vector<bool> column(AttributeId a) const;
  ChallengeFlags slice(std::size_t start, std::size_t end) const;
};

FlagRow classify_frame(const AttributeRecord& record, const ThresholdSet& thresholds);
ChallengeFlags classify_table(const AttributeTable& table, const ThresholdSet& thresholds);

std::string format_flags_csv(const ChallengeFlags& flags);
ChallengeFlags parse_flags_csv(std::string_view csv, std::string sequence_id);

}  // namespace sotverse
