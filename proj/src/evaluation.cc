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

#include "sotverse/evaluation.h"

#include <fmt/format.h>

#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/ingestion.h"

namespace sotverse {

namespace fs = std::filesystem;
using nlohmann::json;

const EvalUnit* EvalContext::find(std::string_view unit) const {
  for (const auto& u : units) {
    if (u.id == unit) return &u;
  }
  return nullptr;
}

EvalContext build_context(Environment env, const Subspace* space,
                          const AttributeTableMap* tables, const ThresholdSet& thresholds,
                          const StartPolicy& policy) {
  EvalContext ctx;
  ctx.space_id = space ? space->id : env.id;
  if (space && space->environment_id != env.id) {
    throw ConfigError(fmt::format("space '{}' was built on environment '{}', not '{}'",
                                  space->id, space->environment_id, env.id));
  }
  struct Full {
    std::optional<AttributeTable> attrs;
    std::optional<ChallengeFlags> flags;
    StartPointList starts;
  };
  std::map<std::string, Full, std::less<>> full;
  const auto prepare = [&](const Sequence& seq) -> const Full& {
    auto it = full.find(seq.id);
    if (it != full.end()) return it->second;
    Full f;
    if (tables) {
      const auto t = tables->find(seq.id);
      if (t == tables->end()) {
        throw LoadError(seq.id, "no attribute table for this sequence");
      }
      if (t->second.size() != seq.size()) {
        throw LoadError(seq.id, fmt::format("attribute table has {} rows for {} frames",
                                            t->second.size(), seq.size()));
      }
      f.attrs = t->second;
      f.flags = classify_table(t->second, thresholds);
      f.starts = find_start_points(seq, t->second, policy);
    } else {
      f.starts = find_start_points(seq, annotate_sequence(seq, AnnotationMode::kAnnotationOnly),
                                   policy);
    }
    return full.emplace(seq.id, std::move(f)).first->second;
  };

  if (space) {
    for (const auto& ref : space->refs) {
      const Sequence* seq = env.find(ref.sequence);
      if (!seq) {
        throw ConfigError(fmt::format("space '{}' refers to unknown sequence '{}'", space->id,
                                      ref.sequence));
      }
      const Full& f = prepare(*seq);
      EvalUnit unit;
      unit.seq = seq->slice(ref.start, ref.end);
      unit.id = unit.seq.id;
      if (f.attrs) unit.attrs = f.attrs->slice(ref.start, ref.end);
      if (f.flags) unit.flags = f.flags->slice(ref.start, ref.end);
      unit.starts = f.starts.slice(ref.start, ref.end);
      ctx.units.push_back(std::move(unit));
    }
  } else {
    for (const auto& seq : env.sequences) {
      const Full& f = prepare(seq);
      EvalUnit unit;
      unit.id = seq.id;
      unit.seq = seq;
      unit.attrs = f.attrs;
      unit.flags = f.flags;
      unit.starts = f.starts;
      ctx.units.push_back(std::move(unit));
    }
  }
  ctx.environment = std::move(env);
  return ctx;
}

AttributeTableMap load_attribute_dir(const fs::path& dir, const Environment& env) {
  AttributeTableMap out;
  for (const auto& seq : env.sequences) {
    const fs::path file = dir / (seq.id + ".csv");
    if (!fs::exists(file)) throw LoadError(file.string(), "attribute table not found");
    out.emplace(seq.id, read_attribute_table(file, seq.id));
  }
  return out;
}

EvalContext load_context(const ContextSources& sources, const StartPolicy& policy) {
  Environment env = load_manifest(sources.manifest);
  std::optional<Subspace> space;
  if (!sources.space_file.empty()) space = load_subspace(sources.space_file);
  std::optional<AttributeTableMap> tables;
  if (!sources.attributes_dir.empty()) tables = load_attribute_dir(sources.attributes_dir, env);
  const ThresholdSet thresholds = sources.thresholds_file.empty()
                                      ? default_thresholds()
                                      : load_thresholds(sources.thresholds_file);
  return build_context(std::move(env), space ? &*space : nullptr, tables ? &*tables : nullptr,
                       thresholds, policy);
}

Trajectory slice_trajectory(const Trajectory& traj, std::size_t start, std::size_t end,
                            std::string unit) {
  if (start >= end || end > traj.size()) {
    throw DomainError(fmt::format("{}: invalid trajectory slice [{}, {})", traj.sequence_id,
                                  start, end));
  }
  Trajectory out;
  out.tracker = traj.tracker;
  out.sequence_id = std::move(unit);
  out.mechanism = traj.mechanism;
  out.frames.assign(traj.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    traj.frames.begin() + static_cast<std::ptrdiff_t>(end));
  out.frames.front().state = FrameState::kInit;
  if (traj.wall_ms.size() == traj.size()) {
    out.wall_ms.assign(traj.wall_ms.begin() + static_cast<std::ptrdiff_t>(start),
                       traj.wall_ms.begin() + static_cast<std::ptrdiff_t>(end));
  } else {
    out.wall_ms.assign(out.frames.size(), 0.0);
  }
  return out;
}

namespace {

const std::string& parent_of(const EvalUnit& unit) {
  return unit.seq.parent_id.empty() ? unit.seq.id : unit.seq.parent_id;
}

}  // namespace

Trajectory replay_unit(const EvalContext& ctx, const EvalUnit& unit, const ReplayLookup& lookup,
                       const std::string& tracker) {
  Trajectory traj;
  if (auto own = lookup(unit.id + ".csv")) {
    traj = parse_replay(*own, unit.seq, unit.id + ".csv");
  } else if (unit.seq.parent_id.empty()) {
    throw LoadError(unit.id + ".csv", "replay file not found");
  } else if (auto whole = lookup(parent_of(unit) + ".csv")) {
    const Sequence& parent = ctx.environment.sequence(parent_of(unit));
    const Trajectory full = parse_replay(*whole, parent, parent.id + ".csv");
    traj = slice_trajectory(full, unit.seq.offset, unit.seq.offset + unit.seq.size(), unit.id);
  } else {
    throw LoadError(unit.id + ".csv",
                    fmt::format("replay file not found (nor {}.csv)", parent_of(unit)));
  }
  traj.tracker = tracker;
  traj.sequence_id = unit.id;
  return traj;
}

ReplayLookup directory_lookup(const fs::path& dir) {
  return [dir](const std::string& name) -> std::optional<std::string> {
    const fs::path p = dir / name;
    if (!fs::is_regular_file(p)) return std::nullopt;
    return text::read_file(p);
  };
}

std::vector<std::string> missing_replays(const EvalContext& ctx, const ReplayLookup& lookup) {
  std::vector<std::string> missing;
  for (const auto& u : ctx.units) {
    if (lookup(u.id + ".csv")) continue;
    if (!u.seq.parent_id.empty() && lookup(parent_of(u) + ".csv")) continue;
    missing.push_back(u.id);
  }
  return missing;
}

std::string format_run_json(const RunRecord& r) {
  json doc = {{"schema", 1},
              {"tracker", r.tracker},
              {"space", r.space_id},
              {"environment", r.environment_id},
              {"mechanism", std::string(to_string(r.mechanism))},
              {"manifest", r.sources.manifest.generic_string()},
              {"space_file", r.sources.space_file.generic_string()},
              {"attributes", r.sources.attributes_dir.generic_string()},
              {"thresholds", r.sources.thresholds_file.generic_string()},
              {"units", r.units}};
  return doc.dump(2) + "\n";
}

void write_run(const fs::path& dir, const RunData& run) {
  text::write_file(dir / "run.json", format_run_json(run.record));
  for (const auto& unit : run.record.units) {
    const auto it = run.trajectories.find(unit);
    if (it == run.trajectories.end()) throw DomainError("no trajectory for unit " + unit);
    text::write_file(dir / "trajectories" / (unit + ".csv"), format_trajectory_csv(it->second));
    text::write_file(dir / "timing" / (unit + ".csv"), format_timing_csv(it->second));
    const auto log = run.logs.find(unit);
    if (log != run.logs.end()) {
      text::write_file(dir / "logs" / (unit + ".json"), format_restart_log_json(log->second));
    }
  }
}

RunData read_run(const fs::path& dir) {
  const fs::path run_json = dir / "run.json";
  RunData run;
  try {
    const json doc = json::parse(text::read_file(run_json));
    if (doc.at("schema").get<int>() != 1) throw ConfigError("unsupported run schema");
    RunRecord& r = run.record;
    r.tracker = doc.at("tracker").get<std::string>();
    r.space_id = doc.at("space").get<std::string>();
    r.environment_id = doc.at("environment").get<std::string>();
    r.mechanism = parse_mechanism(doc.at("mechanism").get<std::string>());
    r.sources.manifest = doc.at("manifest").get<std::string>();
    r.sources.space_file = doc.at("space_file").get<std::string>();
    r.sources.attributes_dir = doc.at("attributes").get<std::string>();
    r.sources.thresholds_file = doc.at("thresholds").get<std::string>();
    r.units = doc.at("units").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw LoadError(run_json.string(), e.what());
  } catch (const ConfigError& e) {
    throw LoadError(run_json.string(), e.what());
  }
  for (const auto& unit : run.record.units) {
    const fs::path tfile = dir / "trajectories" / (unit + ".csv");
    Trajectory traj = parse_trajectory_csv(text::read_file(tfile), unit, tfile.string());
    traj.tracker = run.record.tracker;
    traj.mechanism = run.record.mechanism;
    run.trajectories.emplace(unit, std::move(traj));
    if (run.record.mechanism == Mechanism::kRope) {
      const fs::path lfile = dir / "logs" / (unit + ".json");
      try {
        run.logs.emplace(unit, parse_restart_log_json(text::read_file(lfile)));
      } catch (const std::exception& e) {
        throw LoadError(lfile.string(), e.what());
      }
    }
  }
  return run;
}

std::vector<SequenceScores> score_run(const EvalContext& ctx, const RunData& run) {
  std::vector<SequenceScores> out;
  out.reserve(ctx.units.size());
  for (const auto& unit : ctx.units) {
    const auto it = run.trajectories.find(unit.id);
    if (it == run.trajectories.end()) {
      throw LoadError(unit.id, fmt::format("run of '{}' has no trajectory for this unit",
                                           run.record.tracker));
    }
    const auto log = run.logs.find(unit.id);
    out.push_back(score_sequence(it->second, unit.seq, unit.attrs ? &*unit.attrs : nullptr,
                                 unit.flags ? &*unit.flags : nullptr,
                                 log == run.logs.end() ? nullptr : &log->second));
  }
  return out;
}

}  // namespace sotverse
