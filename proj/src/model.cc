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

#include "sotverse/model.h"

#include <fmt/format.h>

#include "json.hpp"
#include <algorithm>

#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/metrics.h"

namespace sotverse {

std::size_t Sequence::absent_count() const {
  return static_cast<std::size_t>(
      std::count(groundtruth.begin(), groundtruth.end(), std::nullopt));
}

Sequence Sequence::slice(std::size_t start, std::size_t end) const {
  if (start >= end || end > size()) {
    throw DomainError(fmt::format("{}: invalid slice [{}, {}) of {} frames", id,
                                  start, end, size()));
  }
  if (!groundtruth[start]) {
    throw DomainError(
        fmt::format("{}: slice starts on absent frame {}", id, start));
  }
  Sequence out;
  out.id = unit_id(id, start, end);
  out.dataset_id = dataset_id;
  out.root = root;
  out.parent_id = parent_id.empty() ? id : parent_id;
  out.offset = offset + start;
  out.frames.assign(frames.begin() + static_cast<std::ptrdiff_t>(start),
                    frames.begin() + static_cast<std::ptrdiff_t>(end));
  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    out.frames[i].index = i;
    out.frames[i].sequence_id = out.id;
  }
  out.groundtruth.assign(groundtruth.begin() + static_cast<std::ptrdiff_t>(start),
                         groundtruth.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

void Sequence::validate() const {
  if (frames.empty()) throw DomainError(id + ": sequence has no frames");
  if (groundtruth.size() != frames.size()) {
    throw DomainError(fmt::format("{}: {} groundtruth rows for {} frames", id,
                                  groundtruth.size(), frames.size()));
  }
  if (!groundtruth.front()) {
    throw DomainError(id + ": first frame ground truth is absent");
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].index != t) {
      throw DomainError(fmt::format("{}: frame indices not contiguous at {}", id, t));
    }
    if (frames[t].width <= 0 || frames[t].height <= 0) {
      throw DomainError(fmt::format("{}: frame {} has no resolution", id, t));
    }
    if (groundtruth[t] && !groundtruth[t]->valid()) {
      throw DomainError(fmt::format("{}: degenerate ground truth at frame {}", id, t));
    }
  }
}

std::string unit_id(std::string_view sequence, std::size_t start,
                    std::size_t end) {
  return fmt::format("{}@{}-{}", sequence, start, end);
}

std::string_view to_string(EnvironmentKind kind) {
  return kind == EnvironmentKind::kNormal ? "normal" : "challenging";
}

EnvironmentKind parse_environment_kind(std::string_view text) {
  if (text == "normal") return EnvironmentKind::kNormal;
  if (text == "challenging") return EnvironmentKind::kChallenging;
  throw ConfigError(fmt::format("unknown environment kind '{}'", text));
}

const Sequence* Environment::find(std::string_view seq_id) const {
  for (const Sequence& s : sequences) {
    if (s.id == seq_id) return &s;
  }
  return nullptr;
}

const Sequence& Environment::sequence(std::string_view seq_id) const {
  if (const Sequence* s = find(seq_id)) return *s;
  throw DomainError(fmt::format("environment {} has no sequence '{}'", id, seq_id));
}

std::string_view to_string(Mechanism m) {
  return m == Mechanism::kOpe ? "ope" : "rope";
}

Mechanism parse_mechanism(std::string_view text) {
  if (text == "ope" || text == "OPE") return Mechanism::kOpe;
  if (text == "rope" || text == "R-OPE" || text == "r-ope") return Mechanism::kRope;
  throw ConfigError(fmt::format("unknown mechanism '{}'", text));
}

TaskSpec parse_task_spec(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("task spec: ") + e.what());
  }
  try {
    if (doc.value("schema", 0) != 1) throw ConfigError("task spec: schema must be 1");
    TaskSpec spec;
    spec.environment = doc.at("environment").get<std::string>();
    for (const auto& m : doc.at("mechanisms")) {
      spec.mechanisms.insert(parse_mechanism(m.get<std::string>()));
    }
    for (const auto& ind : doc.at("indicators")) {
      const auto name = ind.get<std::string>();
      if (!is_known_indicator(name)) {
        throw ConfigError(fmt::format("task spec: unknown indicator '{}'", name));
      }
      spec.indicators.insert(name);
    }
    for (const auto& ex : doc.value("executors", nlohmann::json::array())) {
      ExecutorEntry e;
      e.name = ex.at("name").get<std::string>();
      e.command = ex.value("command", "");
      e.listen = ex.value("listen", "");
      if (e.command.empty() && e.listen.empty()) {
        throw ConfigError("task spec: executor " + e.name +
                          " needs a command or a listen address");
      }
      spec.executors.push_back(std::move(e));
    }
    if (spec.environment.empty()) throw ConfigError("task spec: empty environment");
    if (spec.mechanisms.empty()) throw ConfigError("task spec: no mechanism");
    if (spec.indicators.empty()) throw ConfigError("task spec: no indicator");
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("task spec: ") + e.what());
  }
}

TaskSpec load_task_spec(const std::filesystem::path& path) {
  return parse_task_spec(text::read_file(path));
}

}  // namespace sotverse
