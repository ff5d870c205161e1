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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sotverse/attributes.h"
#include "sotverse/calibration.h"
#include "sotverse/engine.h"
#include "sotverse/model.h"

namespace sotverse {

// Indicator names accepted in task specs and reports.
const std::vector<std::string_view>& indicator_names();
bool is_known_indicator(std::string_view name);

// A curve point is nullopt when its denominator is empty.
struct Curve {
  std::vector<double> thresholds;
  std::vector<std::optional<double>> values;
  std::size_t headline_index = 0;

  std::size_t size() const { return thresholds.size(); }
  double headline_threshold() const { return thresholds.at(headline_index); }
  std::optional<double> headline() const { return values.at(headline_index); }
};

// Threshold grids. Each point is k / divisor so the grids are exact decimals.
std::vector<double> precision_thresholds();             // 0..50 step 1
std::vector<double> normalized_precision_thresholds();  // 0..0.5 step 0.01
std::vector<double> success_thresholds();               // 0..1 step 0.01
std::vector<double> challenging_thresholds();           // 0..1 step 0.05

inline constexpr double kPrecisionHeadline = 20;
inline constexpr double kNormalizedPrecisionHeadline = 0.2;
inline constexpr double kChallengingHeadline = 0.75;
inline constexpr double kSuccessOverlap = 0.5;

// Frames that enter the scores: ground truth present and state `tracking`.
// An absent prediction has infinite distance and zero overlap.
struct EvaluatedFrames {
  std::vector<std::size_t> index;
  std::vector<double> distance;
  std::vector<double> normalized_distance;
  std::vector<double> overlap;

  std::size_t size() const { return index.size(); }
};

EvaluatedFrames evaluate_frames(const Trajectory& traj, const Sequence& seq);

Curve precision_curve(const EvaluatedFrames& frames);
Curve normalized_precision_curve(const EvaluatedFrames& frames);

struct SuccessScores {
  Curve curve;
  std::optional<double> auc;           // mean of the curve values
  std::optional<double> mean_overlap;  // mean of s_t
};
SuccessScores success_curve(const EvaluatedFrames& frames);

// Per threshold: frames with rho <= theta, and those among them with
// overlap >= 0.5. Frames without a corrcoef value are not counted.
struct ChallengingCounts {
  std::vector<std::size_t> hits;
  std::vector<std::size_t> totals;
};
// nullopt when the table carries no corrcoef column.
std::optional<ChallengingCounts> challenging_counts(const EvaluatedFrames& frames,
                                                    const AttributeTable& attrs);
Curve challenging_curve_from(const ChallengingCounts& counts);
std::optional<Curve> challenging_curve(const EvaluatedFrames& frames,
                                       const AttributeTable& attrs);

struct AttributeBreakdown {
  std::size_t fail_frames = 0;
  std::array<std::size_t, kAttributeCount> flagged{};
  // flagged / fail_frames; all nullopt without fail frames.
  std::array<std::optional<double>, kAttributeCount> ratios() const;
};
AttributeBreakdown attribute_breakdown(const EvaluatedFrames& frames,
                                       const ChallengeFlags& flags);

struct RobustPoint {
  double restarts = 0;
  double longest_segment = 0;
};
// Throws DomainError on an empty list.
RobustPoint robust_summary(const std::vector<RestartLog>& logs);

struct SequenceScores {
  std::string unit;
  Mechanism mechanism = Mechanism::kOpe;
  std::size_t length = 0;
  std::size_t evaluated = 0;
  Curve precision;
  Curve normalized_precision;
  SuccessScores success;
  std::optional<Curve> challenging;
  std::optional<ChallengingCounts> challenging_counts;
  std::optional<AttributeBreakdown> attributes;
  std::optional<RestartLog> restarts;
};

// `attrs` and `flags` may be null; the dependent indicators are then absent.
SequenceScores score_sequence(const Trajectory& traj, const Sequence& seq,
                              const AttributeTable* attrs, const ChallengeFlags* flags,
                              const RestartLog* log = nullptr);

struct Headlines {
  std::optional<double> precision;
  std::optional<double> normalized_precision;
  std::optional<double> success_auc;
  std::optional<double> mean_overlap;
  std::optional<double> challenging;
};

// Keys of Headlines in report order.
const std::vector<std::string_view>& headline_keys();
std::optional<double> headline_value(const Headlines& h, std::string_view key);

struct AggregateScores {
  Mechanism mechanism = Mechanism::kOpe;
  std::size_t units = 0;
  Curve precision, normalized_precision, success;
  std::optional<Curve> challenging;
  // Length-weighted counterparts.
  Curve weighted_precision, weighted_normalized_precision, weighted_success;
  std::optional<Curve> weighted_challenging;
  Headlines headlines;
  Headlines weighted_headlines;
  // Pooled over every fail frame of every unit.
  std::optional<AttributeBreakdown> attributes;
  std::optional<RobustPoint> robust;
  // Challenging curve from counts pooled over units instead of per-unit ratios.
  std::optional<Curve> challenging_micro;
};

// Means over units, skipping undefined values. Throws ConfigError when the
// units mix mechanisms and DomainError when the list is empty.
AggregateScores aggregate_environment(const std::vector<SequenceScores>& units);

// Unweighted mean of several aggregates' headlines, e.g. datasets of a subtask.
Headlines mean_headlines(const std::vector<Headlines>& parts);

}  // namespace sotverse
