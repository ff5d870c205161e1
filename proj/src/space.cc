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

#include "sotverse/space.h"

#include <fmt/format.h>

#include <algorithm>

#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/parallel.h"

namespace sotverse {

using nlohmann::json;

std::optional<std::size_t> StartPointList::next_after(std::size_t frame) const {
  const auto it = std::upper_bound(frames.begin(), frames.end(), frame);
  if (it == frames.end()) return std::nullopt;
  return *it;
}

StartPointList StartPointList::slice(std::size_t start, std::size_t end) const {
  StartPointList out;
  out.sequence_id = unit_id(sequence_id, start, end);
  for (std::size_t f : frames) {
    if (f >= start && f < end) out.frames.push_back(f - start);
  }
  return out;
}

StartPointList find_start_points(const Sequence& seq, const AttributeTable& attrs,
                                 const StartPolicy& policy) {
  if (attrs.size() != seq.size()) {
    throw DomainError(fmt::format("{}: attribute table has {} rows for {} frames",
                                  seq.id, attrs.size(), seq.size()));
  }
  StartPointList out;
  out.sequence_id = seq.id;
  // Index of the nearest absent frame at or after t.
  std::vector<std::size_t> next_absent(seq.size() + 1, seq.size() + policy.absence_margin + 1);
  for (std::size_t t = seq.size(); t-- > 0;) {
    next_absent[t] = seq.groundtruth[t] ? next_absent[t + 1] : t;
  }
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (!seq.groundtruth[t]) continue;
    const AttributeRecord& rec = attrs.records[t];
    const auto& scale = rec[AttributeId::kRelativeScale];
    if (!scale || *scale < policy.min_scale) continue;
    const auto& blur = rec[AttributeId::kBlur];
    if (blur && *blur < policy.min_sharpness) continue;
    if (next_absent[t + 1] <= t + policy.absence_margin) continue;
    out.frames.push_back(t);
  }
  return out;
}

std::vector<SubsequenceRef> screen_subsequences(const std::string& sequence_id,
                                                const std::vector<bool>& flags,
                                                const StartPointList& starts,
                                                AttributeId attribute) {
  const std::size_t n = flags.size();
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + (flags[t] ? 1 : 0);

  std::vector<SubsequenceRef> out;
  for (std::size_t start : starts.frames) {
    if (start >= n) continue;
    for (std::size_t end = n; end > start; --end) {
      const std::size_t hits = prefix[end] - prefix[start];
      const std::size_t len = end - start;
      if (2 * hits >= len) {
        out.push_back({sequence_id, start, end, attribute,
                       static_cast<double>(hits) / static_cast<double>(len)});
        break;
      }
    }
  }
  return out;
}

std::vector<SubsequenceRef> deduplicate(std::vector<SubsequenceRef> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SubsequenceRef& a, const SubsequenceRef& b) {
                     if (a.length() != b.length()) return a.length() > b.length();
                     return a.start < b.start;
                   });
  std::vector<SubsequenceRef> kept;
  for (SubsequenceRef& cand : candidates) {
    if (cand.length() < kMinSubsequenceLength) continue;
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const SubsequenceRef& base) {
      if (base.sequence != cand.sequence) return false;
      const std::size_t lo = std::max(base.start, cand.start);
      const std::size_t hi = std::min(base.end, cand.end);
      const std::size_t inter = hi > lo ? hi - lo : 0;
      return 2 * inter >= cand.length();
    });
    if (!overlaps) kept.push_back(std::move(cand));
  }
  return kept;
}

Subspace construct_subspace(const Environment& env, const AttributeTableMap& tables,
                            AttributeId attr, const ThresholdSet& thresholds,
                            const StartPolicy& policy, unsigned jobs) {
  std::vector<std::vector<SubsequenceRef>> per_seq(env.sequences.size());
  parallel_for(env.sequences.size(), jobs, [&](std::size_t i) {
    const Sequence& seq = env.sequences[i];
    const auto it = tables.find(seq.id);
    if (it == tables.end()) throw DomainError("no attribute table for sequence " + seq.id);
    const ChallengeFlags flags = classify_table(it->second, thresholds);
    const StartPointList starts = find_start_points(seq, it->second, policy);
    per_seq[i] = deduplicate(screen_subsequences(seq.id, flags.column(attr), starts, attr));
  });
  Subspace space;
  space.attribute = attr;
  space.environment_id = env.id;
  space.threshold_set_id = thresholds.id;
  space.id = fmt::format("{}-{}", env.id, to_string(attr));
  for (auto& refs : per_seq) {
    for (auto& r : refs) space.refs.push_back(std::move(r));
  }
  return space;
}

std::string format_subspace_json(const Subspace& space) {
  json refs = json::array();
  for (const auto& r : space.refs) {
    refs.push_back({{"sequence", r.sequence},
                    {"start", r.start},
                    {"end", r.end},
                    {"density", r.density}});
  }
  json doc = {{"schema", 1},
              {"id", space.id},
              {"attribute", to_string(space.attribute)},
              {"threshold_set_id", space.threshold_set_id},
              {"environment", space.environment_id},
              {"refs", refs}};
  return doc.dump(2) + "\n";
}

Subspace parse_subspace_json(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    if (doc.value("schema", 1) != 1) throw ConfigError("subspace: schema must be 1");
    Subspace s;
    s.attribute = parse_attribute(doc.at("attribute").get<std::string>());
    s.threshold_set_id = doc.value("threshold_set_id", "");
    s.environment_id = doc.value("environment", "");
    s.id = doc.value("id", fmt::format("{}-{}", s.environment_id, to_string(s.attribute)));
    for (const auto& r : doc.at("refs")) {
      SubsequenceRef ref;
      ref.sequence = r.at("sequence").get<std::string>();
      ref.start = r.at("start").get<std::size_t>();
      ref.end = r.at("end").get<std::size_t>();
      ref.density = r.value("density", 0.0);
      ref.attribute = s.attribute;
      if (ref.end <= ref.start) {
        throw ConfigError(fmt::format("subspace: empty ref on {}", ref.sequence));
      }
      s.refs.push_back(std::move(ref));
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("subspace: ") + e.what());
  }
}

Subspace load_subspace(const std::filesystem::path& path) {
  return parse_subspace_json(text::read_file(path));
}

void save_subspace(const Subspace& space, const std::filesystem::path& path) {
  text::write_file(path, format_subspace_json(space));
}

}  // namespace sotverse
