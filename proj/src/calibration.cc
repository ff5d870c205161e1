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

#include "sotverse/calibration.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"

namespace sotverse {

using nlohmann::json;

std::string_view to_string(PredicateKind k) {
  switch (k) {
    case PredicateKind::kBelow: return "below";
    case PredicateKind::kAbove: return "above";
    case PredicateKind::kOutside: return "outside";
  }
  return "outside";
}

PredicateKind parse_predicate_kind(std::string_view text) {
  if (text == "below") return PredicateKind::kBelow;
  if (text == "above") return PredicateKind::kAbove;
  if (text == "outside") return PredicateKind::kOutside;
  throw ConfigError(fmt::format("unknown predicate kind '{}'", text));
}

bool AbnormalPredicate::abnormal(double v) const {
  const bool lo = inclusive ? v <= low : v < low;
  const bool hi = inclusive ? v >= high : v > high;
  switch (kind) {
    case PredicateKind::kBelow: return lo;
    case PredicateKind::kAbove: return hi;
    case PredicateKind::kOutside: return lo || hi;
  }
  return false;
}

void ThresholdSet::validate() const {
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    const auto& p = predicates[i];
    if (!p) continue;
    const auto name = attribute_names()[i];
    if (!std::isfinite(p->low) || !std::isfinite(p->high)) {
      throw ConfigError(fmt::format("thresholds: {} has a non-finite bound", name));
    }
    if (p->kind == PredicateKind::kOutside &&
        (p->inclusive ? !(p->low < p->high) : !(p->low <= p->high))) {
      throw ConfigError(fmt::format("thresholds: {} interval is empty", name));
    }
  }
}

ThresholdSet default_thresholds() {
  ThresholdSet t;
  t.id = "default";
  t.provenance = "published";
  auto outside = [](double lo, double hi) {
    return AbnormalPredicate{PredicateKind::kOutside, lo, hi, true};
  };
  auto below = [](double lo) { return AbnormalPredicate{PredicateKind::kBelow, lo, 0, true}; };
  auto above = [](double hi) { return AbnormalPredicate{PredicateKind::kAbove, 0, hi, true}; };
  t[AttributeId::kRatio] = outside(0.28, 2.38);
  t[AttributeId::kRelativeScale] = outside(0.02, 0.39);
  t[AttributeId::kIllumination] = outside(0.01, 0.13);
  t[AttributeId::kBlur] = below(95);
  t[AttributeId::kDeltaRatio] = above(0.2);
  t[AttributeId::kDeltaRelativeScale] = above(0.01);
  t[AttributeId::kDeltaIllumination] = above(0.0012);
  t[AttributeId::kDeltaBlur] = above(250);
  t[AttributeId::kFastMotion] = above(0.16);
  t[AttributeId::kCorrcoef] = below(0.75);
  return t;
}

std::string format_thresholds_json(const ThresholdSet& set) {
  json attrs = json::object();
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    const auto& p = set.predicates[i];
    if (!p) continue;
    json bounds = json::array();
    switch (p->kind) {
      case PredicateKind::kBelow: bounds = {p->low}; break;
      case PredicateKind::kAbove: bounds = {p->high}; break;
      case PredicateKind::kOutside: bounds = {p->low, p->high}; break;
    }
    attrs[std::string(attribute_names()[i])] = {
        {"kind", to_string(p->kind)}, {"bounds", bounds}, {"inclusive", p->inclusive}};
  }
  json doc = {{"schema", 1},
              {"id", set.id},
              {"provenance", set.provenance},
              {"attributes", attrs}};
  return doc.dump(2) + "\n";
}

ThresholdSet parse_thresholds_json(std::string_view json_text) {
  ThresholdSet set;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("schema", 0) != 1) throw ConfigError("thresholds: schema must be 1");
    set.id = doc.value("id", "");
    set.provenance = doc.value("provenance", "calibrated");
    for (const auto& [name, spec] : doc.at("attributes").items()) {
      AbnormalPredicate p;
      p.kind = parse_predicate_kind(spec.at("kind").get<std::string>());
      p.inclusive = spec.value("inclusive", true);
      const auto bounds = spec.at("bounds").get<std::vector<double>>();
      const std::size_t want = p.kind == PredicateKind::kOutside ? 2 : 1;
      if (bounds.size() != want) {
        throw ConfigError(fmt::format("thresholds: {} needs {} bound(s)", name, want));
      }
      if (p.kind == PredicateKind::kOutside) {
        p.low = bounds[0];
        p.high = bounds[1];
      } else if (p.kind == PredicateKind::kBelow) {
        p.low = bounds[0];
      } else {
        p.high = bounds[0];
      }
      set[parse_attribute(name)] = p;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("thresholds: ") + e.what());
  }
  set.validate();
  return set;
}

ThresholdSet load_thresholds(const std::filesystem::path& path) {
  return parse_thresholds_json(text::read_file(path));
}

void save_thresholds(const ThresholdSet& set, const std::filesystem::path& path) {
  text::write_file(path, format_thresholds_json(set));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DistributionSummary summarize_distribution(std::vector<double> values,
                                           AttributeId attribute, double whisker_k) {
  if (values.empty()) {
    throw DomainError(fmt::format("no values for attribute {}", to_string(attribute)));
  }
  std::sort(values.begin(), values.end());
  DistributionSummary s;
  s.attribute = attribute;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.q2 = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  const double iqr = s.q3 - s.q1;
  s.whisker_low = std::max(s.min, s.q1 - whisker_k * iqr);
  s.whisker_high = std::min(s.max, s.q3 + whisker_k * iqr);
  return s;
}

DistributionSummary attribute_distribution(const Environment& env,
                                           const AttributeTableMap& tables,
                                           AttributeId attr,
                                           const std::set<std::string>& exclusions,
                                           double whisker_k) {
  std::vector<double> pool;
  for (const Sequence& seq : env.sequences) {
    if (exclusions.count(seq.dataset_id)) continue;
    const auto it = tables.find(seq.id);
    if (it == tables.end()) {
      throw DomainError("no attribute table for sequence " + seq.id);
    }
    for (const AttributeRecord& rec : it->second.records) {
      if (rec[attr]) pool.push_back(*rec[attr]);
    }
  }
  return summarize_distribution(std::move(pool), attr, whisker_k);
}

CalibrationPolicy default_calibration_policy() {
  CalibrationPolicy p;
  auto set = [&](AttributeId a, PredicateKind side, std::set<std::string> excl_low = {}) {
    p.attributes[index_of(a)] = AttributePolicy{side, std::move(excl_low), {}};
  };
  set(AttributeId::kRatio, PredicateKind::kOutside);
  set(AttributeId::kRelativeScale, PredicateKind::kOutside);
  set(AttributeId::kIllumination, PredicateKind::kOutside, {"otb2015"});
  set(AttributeId::kBlur, PredicateKind::kBelow, {"videocube"});
  set(AttributeId::kDeltaRatio, PredicateKind::kAbove);
  set(AttributeId::kDeltaRelativeScale, PredicateKind::kAbove);
  set(AttributeId::kDeltaIllumination, PredicateKind::kAbove);
  set(AttributeId::kDeltaBlur, PredicateKind::kAbove);
  set(AttributeId::kFastMotion, PredicateKind::kAbove);
  set(AttributeId::kCorrcoef, PredicateKind::kBelow);
  return p;
}

CalibrationPolicy parse_calibration_policy(std::string_view json_text) {
  CalibrationPolicy policy;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("schema", 0) != 1) throw ConfigError("calibration policy: schema must be 1");
    if (doc.value("quartile", "linear") != "linear") {
      throw ConfigError("calibration policy: only the linear quartile convention is supported");
    }
    policy.whisker_k = doc.value("whisker_k", 1.5);
    if (!(policy.whisker_k >= 0)) throw ConfigError("calibration policy: whisker_k < 0");
    for (const auto& [name, spec] : doc.at("attributes").items()) {
      AttributePolicy ap;
      ap.side = parse_predicate_kind(spec.at("side").get<std::string>());
      ap.exclude_low = spec.value("exclude_low", std::set<std::string>{});
      ap.exclude_high = spec.value("exclude_high", std::set<std::string>{});
      policy.attributes[index_of(parse_attribute(name))] = std::move(ap);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration policy: ") + e.what());
  }
  return policy;
}

CalibrationPolicy load_calibration_policy(const std::filesystem::path& path) {
  return parse_calibration_policy(text::read_file(path));
}

ThresholdSet calibrate_thresholds(const Environment& env,
                                  const AttributeTableMap& tables,
                                  const CalibrationPolicy& policy) {
  ThresholdSet set;
  set.id = "calibrated-" + env.id;
  set.provenance = "calibrated";
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    const auto& ap = policy.attributes[i];
    if (!ap) continue;
    const auto attr = static_cast<AttributeId>(i);
    AbnormalPredicate p;
    p.kind = ap->side;
    p.inclusive = false;
    if (ap->side != PredicateKind::kAbove) {
      p.low = attribute_distribution(env, tables, attr, ap->exclude_low, policy.whisker_k)
                  .whisker_low;
    }
    if (ap->side != PredicateKind::kBelow) {
      p.high = attribute_distribution(env, tables, attr, ap->exclude_high, policy.whisker_k)
                   .whisker_high;
    }
    set.predicates[i] = p;
  }
  set.validate();
  return set;
}

std::vector<bool> ChallengeFlags::column(AttributeId a) const {
  std::vector<bool> out(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) out[t] = rows[t][index_of(a)];
  return out;
}

ChallengeFlags ChallengeFlags::slice(std::size_t start, std::size_t end) const {
  if (start >= end || end > rows.size()) {
    throw DomainError(fmt::format("{}: invalid flag slice [{}, {})", sequence_id, start, end));
  }
  ChallengeFlags out;
  out.sequence_id = unit_id(sequence_id, start, end);
  out.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(start),
                  rows.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

FlagRow classify_frame(const AttributeRecord& record, const ThresholdSet& thresholds) {
  FlagRow row{};
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    const auto& p = thresholds.predicates[i];
    row[i] = p && record.values[i] && p->abnormal(*record.values[i]);
  }
  return row;
}

ChallengeFlags classify_table(const AttributeTable& table, const ThresholdSet& thresholds) {
  ChallengeFlags flags;
  flags.sequence_id = table.sequence_id;
  flags.rows.reserve(table.size());
  for (const auto& rec : table.records) flags.rows.push_back(classify_frame(rec, thresholds));
  return flags;
}

std::string format_flags_csv(const ChallengeFlags& flags) {
  std::string out;
  const auto& names = attribute_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  out += '\n';
  for (const FlagRow& row : flags.rows) {
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      if (i) out += ',';
      out += row[i] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

ChallengeFlags parse_flags_csv(std::string_view csv, std::string sequence_id) {
  ChallengeFlags flags;
  flags.sequence_id = std::move(sequence_id);
  auto lines = text::split(csv, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw LoadError(flags.sequence_id, "flags table has no header");
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = text::split(text::trim(lines[l]), ',');
    if (cells.size() != kAttributeCount) {
      throw LoadError(fmt::format("{}:{}", flags.sequence_id, l + 1), "bad flag row");
    }
    FlagRow row{};
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      if (cells[i] != "0" && cells[i] != "1") {
        throw LoadError(fmt::format("{}:{}", flags.sequence_id, l + 1), "flag must be 0 or 1");
      }
      row[i] = cells[i] == "1";
    }
    flags.rows.push_back(row);
  }
  return flags;
}

}  // namespace sotverse
