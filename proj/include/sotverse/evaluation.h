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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sotverse/attributes.h"
#include "sotverse/calibration.h"
#include "sotverse/engine.h"
#include "sotverse/metrics.h"
#include "sotverse/model.h"
#include "sotverse/space.h"

namespace sotverse {

// One sequence or subsequence to run a tracker on.
struct EvalUnit {
  std::string id;  // sequence id, or seq@start-end for a subsequence
  Sequence seq;    // re-indexed from 0; seq.id == id
  std::optional<AttributeTable> attrs;
  std::optional<ChallengeFlags> flags;
  StartPointList starts;
};

struct EvalContext {
  std::string space_id;
  Environment environment;
  std::vector<EvalUnit> units;

  const EvalUnit* find(std::string_view unit) const;
};

// Where a context is loaded from; recorded verbatim in run.json.
struct ContextSources {
  std::filesystem::path manifest;
  std::filesystem::path space_file;       // empty: every whole sequence
  std::filesystem::path attributes_dir;   // empty: annotation-only start points
  std::filesystem::path thresholds_file;  // empty: the shipped defaults
};

// `tables` may be null; units then carry no attributes or flags and start
// points come from annotation-only tables.
EvalContext build_context(Environment env, const Subspace* space,
                          const AttributeTableMap* tables, const ThresholdSet& thresholds,
                          const StartPolicy& policy = {});
EvalContext load_context(const ContextSources& sources, const StartPolicy& policy = {});

// Reads `<dir>/<sequence id>.csv` for every sequence of the environment.
AttributeTableMap load_attribute_dir(const std::filesystem::path& dir, const Environment& env);

// Frames [start, end) of a trajectory; the first becomes the init frame.
Trajectory slice_trajectory(const Trajectory& traj, std::size_t start, std::size_t end,
                            std::string unit);

// Replay file lookup by name ("<unit>.csv" or "<sequence>.csv"); returns the
// file content when present.
using ReplayLookup = std::function<std::optional<std::string>(const std::string& name)>;

// Trajectory of `unit` from a per-unit file, else from the full-length file
// of its parent sequence. Throws LoadError when neither exists.
Trajectory replay_unit(const EvalContext& ctx, const EvalUnit& unit, const ReplayLookup& lookup,
                       const std::string& tracker);
ReplayLookup directory_lookup(const std::filesystem::path& dir);
// Units with no replay file of either kind.
std::vector<std::string> missing_replays(const EvalContext& ctx, const ReplayLookup& lookup);

struct RunRecord {
  std::string tracker;
  std::string space_id;
  std::string environment_id;
  Mechanism mechanism = Mechanism::kOpe;
  ContextSources sources;
  std::vector<std::string> units;
};

struct RunData {
  RunRecord record;
  std::map<std::string, Trajectory> trajectories;
  std::map<std::string, RestartLog> logs;
};

// run.json, trajectories/<unit>.csv, logs/<unit>.json (R-OPE), timing/<unit>.csv.
void write_run(const std::filesystem::path& dir, const RunData& run);
RunData read_run(const std::filesystem::path& dir);
std::string format_run_json(const RunRecord& record);

// Per-unit scores in context order. Throws LoadError for a missing unit.
std::vector<SequenceScores> score_run(const EvalContext& ctx, const RunData& run);

}  // namespace sotverse
