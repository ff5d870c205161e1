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

#include "sotverse/metrics.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sotverse/errors.h"

namespace sotverse {

const std::vector<std::string_view>& indicator_names() {
  static const std::vector<std::string_view> names = {
      "precision", "normalized_precision", "success", "challenging", "attribute", "robust"};
  return names;
}

bool is_known_indicator(std::string_view name) {
  const auto& n = indicator_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

std::vector<double> grid(int count, double divisor) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k <= count; ++k) out.push_back(k / divisor);
  return out;
}

std::size_t index_of_threshold(const std::vector<double>& thresholds, double value) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] == value) return i;
  }
  throw DomainError(fmt::format("threshold {} not on the grid", value));
}

// Fraction of `values` satisfying `pred(v, theta)` for each threshold.
template <typename Pred>
Curve fraction_curve(const std::vector<double>& values, std::vector<double> thresholds,
                     double headline, Pred pred) {
  Curve c;
  c.headline_index = index_of_threshold(thresholds, headline);
  c.values.assign(thresholds.size(), std::nullopt);
  if (!values.empty()) {
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      std::size_t hits = 0;
      for (double v : values) hits += pred(v, thresholds[k]) ? 1 : 0;
      c.values[k] = static_cast<double>(hits) / static_cast<double>(values.size());
    }
  }
  c.thresholds = std::move(thresholds);
  return c;
}

}  // namespace

std::vector<double> precision_thresholds() { return grid(50, 1.0); }
std::vector<double> normalized_precision_thresholds() { return grid(50, 100.0); }
std::vector<double> success_thresholds() { return grid(100, 100.0); }
std::vector<double> challenging_thresholds() { return grid(20, 20.0); }

EvaluatedFrames evaluate_frames(const Trajectory& traj, const Sequence& seq) {
  if (traj.size() != seq.size()) {
    throw DomainError(fmt::format("{}: trajectory has {} frames, sequence {}", seq.id,
                                  traj.size(), seq.size()));
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  EvaluatedFrames out;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto& gt = seq.groundtruth[t];
    const auto& entry = traj.frames[t];
    if (!gt || entry.state != FrameState::kTracking) continue;
    out.index.push_back(t);
    if (entry.box) {
      out.distance.push_back(center_distance(*entry.box, *gt));
      out.normalized_distance.push_back(normalized_center_distance(*entry.box, *gt));
      out.overlap.push_back(iou(*entry.box, *gt));
    } else {
      out.distance.push_back(kInf);
      out.normalized_distance.push_back(kInf);
      out.overlap.push_back(0.0);
    }
  }
  return out;
}

Curve precision_curve(const EvaluatedFrames& frames) {
  return fraction_curve(frames.distance, precision_thresholds(), kPrecisionHeadline,
                        [](double d, double th) { return d <= th; });
}

Curve normalized_precision_curve(const EvaluatedFrames& frames) {
  return fraction_curve(frames.normalized_distance, normalized_precision_thresholds(),
                        kNormalizedPrecisionHeadline,
                        [](double d, double th) { return d <= th; });
}

SuccessScores success_curve(const EvaluatedFrames& frames) {
  SuccessScores out;
  // Success is read at the 0.5 overlap point when ranking by a single value.
  out.curve = fraction_curve(frames.overlap, success_thresholds(), kSuccessOverlap,
                             [](double s, double th) { return s >= th; });
  if (!frames.overlap.empty()) {
    double sum = 0;
    for (const auto& v : out.curve.values) sum += *v;
    out.auc = sum / static_cast<double>(out.curve.size());
    double overlap = 0;
    for (double s : frames.overlap) overlap += s;
    out.mean_overlap = overlap / static_cast<double>(frames.overlap.size());
  }
  return out;
}

std::optional<ChallengingCounts> challenging_counts(const EvaluatedFrames& frames,
                                                    const AttributeTable& attrs) {
  if (attrs.mode != AnnotationMode::kFull) return std::nullopt;
  const auto thresholds = challenging_thresholds();
  ChallengingCounts c;
  c.hits.assign(thresholds.size(), 0);
  c.totals.assign(thresholds.size(), 0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t t = frames.index[i];
    if (t >= attrs.size()) {
      throw DomainError(fmt::format("{}: attribute table shorter than trajectory",
                                    attrs.sequence_id));
    }
    const auto& rho = attrs.records[t][AttributeId::kCorrcoef];
    if (!rho) continue;
    const bool success = frames.overlap[i] >= kSuccessOverlap;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (*rho <= thresholds[k]) {
        ++c.totals[k];
        if (success) ++c.hits[k];
      }
    }
  }
  return c;
}

Curve challenging_curve_from(const ChallengingCounts& counts) {
  Curve c;
  c.thresholds = challenging_thresholds();
  c.headline_index = index_of_threshold(c.thresholds, kChallengingHeadline);
  c.values.assign(c.thresholds.size(), std::nullopt);
  for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
    if (counts.totals[k] > 0) {
      c.values[k] = static_cast<double>(counts.hits[k]) / static_cast<double>(counts.totals[k]);
    }
  }
  return c;
}

std::optional<Curve> challenging_curve(const EvaluatedFrames& frames,
                                       const AttributeTable& attrs) {
  const auto counts = challenging_counts(frames, attrs);
  if (!counts) return std::nullopt;
  return challenging_curve_from(*counts);
}

std::array<std::optional<double>, kAttributeCount> AttributeBreakdown::ratios() const {
  std::array<std::optional<double>, kAttributeCount> out{};
  if (fail_frames == 0) return out;
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    out[i] = static_cast<double>(flagged[i]) / static_cast<double>(fail_frames);
  }
  return out;
}

AttributeBreakdown attribute_breakdown(const EvaluatedFrames& frames,
                                       const ChallengeFlags& flags) {
  AttributeBreakdown out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames.overlap[i] >= kSuccessOverlap) continue;
    const std::size_t t = frames.index[i];
    if (t >= flags.size()) {
      throw DomainError(fmt::format("{}: flag table shorter than trajectory",
                                    flags.sequence_id));
    }
    ++out.fail_frames;
    for (std::size_t a = 0; a < kAttributeCount; ++a) {
      if (flags.rows[t][a]) ++out.flagged[a];
    }
  }
  return out;
}

RobustPoint robust_summary(const std::vector<RestartLog>& logs) {
  if (logs.empty()) throw DomainError("robust_summary: no restart logs");
  double restarts = 0;
  double longest = 0;
  for (const auto& log : logs) {
    restarts += static_cast<double>(log.restart_count());
    longest += static_cast<double>(log.longest_segment());
  }
  const double n = static_cast<double>(logs.size());
  return {restarts / n, longest / n};
}

SequenceScores score_sequence(const Trajectory& traj, const Sequence& seq,
                              const AttributeTable* attrs, const ChallengeFlags* flags,
                              const RestartLog* log) {
  const EvaluatedFrames frames = evaluate_frames(traj, seq);
  SequenceScores s;
  s.unit = seq.id;
  s.mechanism = traj.mechanism;
  s.length = seq.size();
  s.evaluated = frames.size();
  s.precision = precision_curve(frames);
  s.normalized_precision = normalized_precision_curve(frames);
  s.success = success_curve(frames);
  if (attrs) {
    s.challenging_counts = challenging_counts(frames, *attrs);
    if (s.challenging_counts) s.challenging = challenging_curve_from(*s.challenging_counts);
  }
  if (flags) s.attributes = attribute_breakdown(frames, *flags);
  if (log) s.restarts = *log;
  return s;
}

const std::vector<std::string_view>& headline_keys() {
  static const std::vector<std::string_view> keys = {
      "precision", "normalized_precision", "success_auc", "mean_overlap", "challenging"};
  return keys;
}

std::optional<double> headline_value(const Headlines& h, std::string_view key) {
  if (key == "precision") return h.precision;
  if (key == "normalized_precision") return h.normalized_precision;
  if (key == "success_auc") return h.success_auc;
  if (key == "mean_overlap") return h.mean_overlap;
  if (key == "challenging") return h.challenging;
  throw ConfigError(fmt::format("unknown headline '{}'", key));
}

namespace {

struct Weighted {
  double sum = 0;
  double weight = 0;
  void add(const std::optional<double>& v, double w) {
    if (!v) return;
    sum += w * *v;
    weight += w;
  }
  std::optional<double> mean() const {
    if (weight <= 0) return std::nullopt;
    return sum / weight;
  }
};

// Pointwise mean of the curves selected by `get`; nullopt if no unit has one.
template <typename Get>
std::optional<Curve> mean_curve(const std::vector<SequenceScores>& units, Get get,
                                bool weighted) {
  const Curve* first = nullptr;
  for (const auto& u : units) {
    if (const Curve* c = get(u)) {
      first = c;
      break;
    }
  }
  if (!first) return std::nullopt;
  Curve out;
  out.thresholds = first->thresholds;
  out.headline_index = first->headline_index;
  out.values.assign(out.thresholds.size(), std::nullopt);
  for (std::size_t k = 0; k < out.thresholds.size(); ++k) {
    Weighted acc;
    for (const auto& u : units) {
      const Curve* c = get(u);
      if (!c) continue;
      acc.add(c->values[k], weighted ? static_cast<double>(u.length) : 1.0);
    }
    out.values[k] = acc.mean();
  }
  return out;
}

template <typename Get>
std::optional<double> mean_value(const std::vector<SequenceScores>& units, Get get,
                                 bool weighted) {
  Weighted acc;
  for (const auto& u : units) acc.add(get(u), weighted ? static_cast<double>(u.length) : 1.0);
  return acc.mean();
}

Headlines headlines_of(const std::vector<SequenceScores>& units, bool weighted,
                       const Curve& precision, const Curve& normalized,
                       const std::optional<Curve>& challenging) {
  Headlines h;
  h.precision = precision.headline();
  h.normalized_precision = normalized.headline();
  h.success_auc = mean_value(
      units, [](const SequenceScores& u) { return u.success.auc; }, weighted);
  h.mean_overlap = mean_value(
      units, [](const SequenceScores& u) { return u.success.mean_overlap; }, weighted);
  if (challenging) h.challenging = challenging->headline();
  return h;
}

}  // namespace

AggregateScores aggregate_environment(const std::vector<SequenceScores>& units) {
  if (units.empty()) throw DomainError("aggregate_environment: no units");
  AggregateScores out;
  out.mechanism = units.front().mechanism;
  for (const auto& u : units) {
    if (u.mechanism != out.mechanism) {
      throw ConfigError(fmt::format("cannot aggregate {} and {} results together",
                                    to_string(out.mechanism), to_string(u.mechanism)));
    }
  }
  out.units = units.size();
  const auto prec = [](const SequenceScores& u) { return &u.precision; };
  const auto norm = [](const SequenceScores& u) { return &u.normalized_precision; };
  const auto succ = [](const SequenceScores& u) { return &u.success.curve; };
  const auto chal = [](const SequenceScores& u) -> const Curve* {
    return u.challenging ? &*u.challenging : nullptr;
  };
  out.precision = *mean_curve(units, prec, false);
  out.normalized_precision = *mean_curve(units, norm, false);
  out.success = *mean_curve(units, succ, false);
  out.challenging = mean_curve(units, chal, false);
  out.weighted_precision = *mean_curve(units, prec, true);
  out.weighted_normalized_precision = *mean_curve(units, norm, true);
  out.weighted_success = *mean_curve(units, succ, true);
  out.weighted_challenging = mean_curve(units, chal, true);
  out.headlines = headlines_of(units, false, out.precision, out.normalized_precision,
                               out.challenging);
  out.weighted_headlines =
      headlines_of(units, true, out.weighted_precision, out.weighted_normalized_precision,
                   out.weighted_challenging);

  std::vector<RestartLog> logs;
  for (const auto& u : units) {
    if (u.attributes) {
      if (!out.attributes) out.attributes = AttributeBreakdown{};
      out.attributes->fail_frames += u.attributes->fail_frames;
      for (std::size_t a = 0; a < kAttributeCount; ++a) {
        out.attributes->flagged[a] += u.attributes->flagged[a];
      }
    }
    if (u.restarts) logs.push_back(*u.restarts);
  }
  if (!logs.empty()) out.robust = robust_summary(logs);

  ChallengingCounts pooled;
  bool any = false;
  for (const auto& u : units) {
    if (!u.challenging_counts) continue;
    if (!any) {
      pooled.hits.assign(u.challenging_counts->hits.size(), 0);
      pooled.totals.assign(u.challenging_counts->totals.size(), 0);
      any = true;
    }
    for (std::size_t k = 0; k < pooled.hits.size(); ++k) {
      pooled.hits[k] += u.challenging_counts->hits[k];
      pooled.totals[k] += u.challenging_counts->totals[k];
    }
  }
  if (any) out.challenging_micro = challenging_curve_from(pooled);
  return out;
}

Headlines mean_headlines(const std::vector<Headlines>& parts) {
  if (parts.empty()) throw DomainError("mean_headlines: nothing to average");
  Weighted p, n, s, m, c;
  for (const auto& h : parts) {
    p.add(h.precision, 1);
    n.add(h.normalized_precision, 1);
    s.add(h.success_auc, 1);
    m.add(h.mean_overlap, 1);
    c.add(h.challenging, 1);
  }
  return {p.mean(), n.mean(), s.mean(), m.mean(), c.mean()};
}

}  // namespace sotverse
