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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sotverse/geometry.h"

namespace sotverse {

struct FrameRef {
  std::string sequence_id;
  std::size_t index = 0;
  // Relative to the owning sequence's root directory.
  std::string image_path;
  int width = 0;
  int height = 0;
};

struct Sequence {
  std::string id;
  std::string dataset_id;
  std::filesystem::path root;
  std::vector<FrameRef> frames;
  std::vector<Region> groundtruth;
  // Set for slices: the sequence this one was cut from and the first frame.
  std::string parent_id;
  std::size_t offset = 0;

  std::size_t size() const { return frames.size(); }
  std::filesystem::path image_file(std::size_t t) const {
    return root / frames.at(t).image_path;
  }
  std::size_t absent_count() const;

  // Frames [start, end) re-indexed from 0. Throws DomainError on an empty or
  // out-of-range span, or when the first frame of the span is absent.
  Sequence slice(std::size_t start, std::size_t end) const;

  // Throws DomainError when a structural invariant does not hold.
  void validate() const;
};

// Identifier used for evaluation units cut from a sequence.
std::string unit_id(std::string_view sequence, std::size_t start,
                    std::size_t end);

enum class EnvironmentKind { kNormal, kChallenging };

std::string_view to_string(EnvironmentKind kind);
EnvironmentKind parse_environment_kind(std::string_view text);

struct Environment {
  std::string id;
  EnvironmentKind kind = EnvironmentKind::kNormal;
  std::vector<std::string> provenance;
  std::vector<Sequence> sequences;

  const Sequence& sequence(std::string_view id) const;
  const Sequence* find(std::string_view id) const;
};

enum class Mechanism { kOpe, kRope };

std::string_view to_string(Mechanism m);
Mechanism parse_mechanism(std::string_view text);

struct ExecutorEntry {
  std::string name;
  std::string command;
  std::string listen;  // host:port for TCP trackers, empty for subprocesses
};

// One subtask: environment x mechanisms x indicators x executors.
struct TaskSpec {
  std::string environment;
  std::set<Mechanism> mechanisms;
  std::set<std::string> indicators;
  std::vector<ExecutorEntry> executors;
};

TaskSpec parse_task_spec(std::string_view json_text);
TaskSpec load_task_spec(const std::filesystem::path& path);

}  // namespace sotverse
