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

#include <fmt/format.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>

#include "CLI11.hpp"
#include "sotverse/archive.h"
#include "sotverse/attributes.h"
#include "sotverse/calibration.h"
#include "sotverse/channel.h"
#include "sotverse/engine.h"
#include "sotverse/errors.h"
#include "sotverse/evaluation.h"
#include "sotverse/format.h"
#include "sotverse/ingestion.h"
#include "sotverse/parallel.h"
#include "sotverse/report.h"
#include "sotverse/service.h"
#include "sotverse/space.h"
#include "sotverse/synthetic.h"

namespace fs = std::filesystem;
using namespace sotverse;

namespace {

AttributeTableMap annotate_all(const Environment& env, AnnotationMode mode,
                               const AnnotateOptions& opts, unsigned jobs) {
  std::vector<AttributeTable> tables(env.sequences.size());
  parallel_for(env.sequences.size(), jobs, [&](std::size_t i) {
    tables[i] = annotate_sequence(env.sequences[i], mode, opts);
  });
  AttributeTableMap out;
  for (auto& t : tables) out.emplace(t.sequence_id, std::move(t));
  return out;
}

int cmd_synth(const fs::path& out) {
  const FixtureCorpus c = write_fixture_corpus(out);
  fmt::print("wrote {} sequences and {} replay sets; manifest {}\n", c.sequences.size(),
             c.trackers.size(), c.manifest.string());
  return 0;
}

int cmd_summary(const fs::path& manifest_path) {
  const Manifest manifest = parse_manifest(text::read_file(manifest_path),
                                           manifest_path.parent_path());
  const Environment env = load_manifest(manifest_path);
  const DatasetSummary s = dataset_summary(env);
  fmt::print("environment {}\nvideos {}\nmin frames {}\nmean frames {}\nmax frames {}\n"
             "total frames {}\nabsent frames {}\n",
             env.id, s.count, s.min_frames, s.mean_rounded(), s.max_frames, s.total_frames,
             s.absent_frames);
  if (manifest.expected) {
    check_expected(s, *manifest.expected, env.id);
    fmt::print("matches expected statistics\n");
  }
  return 0;
}

struct EvalArgs {
  fs::path manifest, space, attributes, thresholds, out, replay;
  std::string mechanism = "ope";
  std::string tracker_cmd, listen, tracker_name;
  int timeout_ms = 60000;
  double fail_threshold = 0.5;
  std::size_t consecutive = 10;
  unsigned jobs = 1;
};

int cmd_eval(const EvalArgs& a) {
  ContextSources sources{a.manifest, a.space, a.attributes, a.thresholds};
  const EvalContext ctx = load_context(sources);
  const Mechanism mechanism = parse_mechanism(a.mechanism);
  const int modes = !a.replay.empty() + !a.tracker_cmd.empty() + !a.listen.empty();
  if (modes != 1) throw ConfigError("give exactly one of --replay, --tracker-cmd, --listen");

  RunData run;
  run.record.space_id = ctx.space_id;
  run.record.environment_id = ctx.environment.id;
  run.record.mechanism = mechanism;
  run.record.sources = sources;
  for (const auto& u : ctx.units) run.record.units.push_back(u.id);

  const RopePolicy policy{a.fail_threshold, a.consecutive};
  std::vector<Trajectory> trajs(ctx.units.size());
  std::vector<std::optional<RestartLog>> logs(ctx.units.size());
  std::string tracker_name = a.tracker_name;
  std::mutex name_mu;

  const auto drive = [&](TrackerSession& session, std::size_t i) {
    session.handshake();
    {
      std::lock_guard lock(name_mu);
      if (tracker_name.empty()) tracker_name = session.name();
    }
    const EvalUnit& unit = ctx.units[i];
    if (mechanism == Mechanism::kOpe) {
      trajs[i] = run_ope(session, unit.seq);
    } else {
      RopeResult r = run_rope(session, unit.seq, unit.starts, policy);
      trajs[i] = std::move(r.trajectory);
      logs[i] = std::move(r.log);
    }
    session.quit();
    if (!trajs[i].error.empty()) {
      std::cerr << fmt::format("warning: {}: {}\n", unit.id, trajs[i].error);
    }
  };

  if (!a.replay.empty()) {
    if (mechanism == Mechanism::kRope) {
      throw ConfigError("replayed results support OPE only; R-OPE needs a live tracker");
    }
    if (tracker_name.empty()) tracker_name = a.replay.filename().string();
    const auto lookup = directory_lookup(a.replay);
    for (std::size_t i = 0; i < ctx.units.size(); ++i) {
      trajs[i] = replay_unit(ctx, ctx.units[i], lookup, tracker_name);
    }
  } else if (!a.tracker_cmd.empty()) {
    parallel_for(ctx.units.size(), a.jobs, [&](std::size_t i) {
      TrackerSession session(ProcessChannel::spawn(a.tracker_cmd),
                             std::chrono::milliseconds(a.timeout_ms));
      drive(session, i);
    });
  } else {
    const auto [host, port] = parse_host_port(a.listen);
    TcpListener listener(host, port);
    std::cerr << fmt::format("listening on {}:{}\n", host, listener.port());
    for (std::size_t i = 0; i < ctx.units.size(); ++i) {
      TrackerSession session(listener.accept(std::chrono::milliseconds(a.timeout_ms)),
                             std::chrono::milliseconds(a.timeout_ms));
      drive(session, i);
    }
  }
  run.record.tracker = tracker_name;
  for (std::size_t i = 0; i < ctx.units.size(); ++i) {
    trajs[i].tracker = tracker_name;
    run.trajectories.emplace(ctx.units[i].id, std::move(trajs[i]));
    if (logs[i]) run.logs.emplace(ctx.units[i].id, std::move(*logs[i]));
  }
  write_run(a.out, run);
  fmt::print("{} units evaluated under {}; run written to {}\n", ctx.units.size(),
             to_string(mechanism), a.out.string());
  return 0;
}

int cmd_pack(const fs::path& replay, const fs::path& out) {
  std::vector<ArchiveMember> members;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(replay)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) members.push_back({f.filename().string(), text::read_file(f)});
  text::write_file(out, write_tar(members));
  fmt::print("packed {} result files into {}\n", members.size(), out.string());
  return 0;
}

HttpFrontend* g_frontend = nullptr;

void on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sotverse: build evaluation spaces for single-object trackers and score them"};
  app.require_subcommand(1);

  fs::path out;
  fs::path manifest;
  fs::path attributes;
  fs::path thresholds;
  unsigned jobs = 1;

  auto* synth = app.add_subcommand("synth", "write the synthetic fixture corpus");
  synth->add_option("--out", out, "output directory")->required();

  fs::path source;
  std::string format = "canonical", id, dataset;
  bool copy_frames = false;
  auto* import = app.add_subcommand("import", "convert a sequence to the canonical layout");
  import->add_option("--source", source, "sequence directory")->required();
  import->add_option("--format", format, "canonical|otb|vot|got10k|lasot");
  import->add_option("--id", id, "sequence id (default: directory name)");
  import->add_option("--dataset", dataset, "dataset id");
  import->add_option("--out", out, "output directory")->required();
  import->add_flag("--copy-frames", copy_frames, "copy images instead of referencing them");

  auto* summary = app.add_subcommand("summary", "dataset statistics of a manifest");
  summary->add_option("--manifest", manifest)->required();

  std::string mode = "full";
  double sog_norm = 6;
  auto* annotate = app.add_subcommand("annotate", "compute per-frame attribute tables");
  annotate->add_option("--manifest", manifest)->required();
  annotate->add_option("--out", out, "directory for <sequence>.csv tables")->required();
  annotate->add_option("--mode", mode, "full|annotation-only");
  annotate->add_option("--sog-norm", sog_norm, "Shades-of-Gray norm order");
  annotate->add_option("--jobs", jobs);

  fs::path policy_path;
  auto* calibrate = app.add_subcommand("calibrate", "derive thresholds from box-plot whiskers");
  calibrate->add_option("--manifest", manifest)->required();
  calibrate->add_option("--attributes", attributes)->required();
  calibrate->add_option("--policy", policy_path, "calibration policy JSON");
  calibrate->add_option("--out", out, "thresholds JSON to write")->required();

  auto* classify = app.add_subcommand("classify", "write per-frame challenge flags");
  classify->add_option("--manifest", manifest)->required();
  classify->add_option("--attributes", attributes)->required();
  classify->add_option("--thresholds", thresholds, "thresholds JSON (default: shipped)");
  classify->add_option("--out", out, "directory for <sequence>.csv flag tables")->required();

  std::vector<std::string> attr_names;
  auto* construct = app.add_subcommand("construct", "mine challenging subspaces");
  construct->add_option("--manifest", manifest)->required();
  construct->add_option("--attributes", attributes)->required();
  construct->add_option("--thresholds", thresholds, "thresholds JSON (default: shipped)");
  construct->add_option("--attr,--attribute", attr_names, "attribute names (default: all)");
  construct->add_option("--out", out, "directory for <space>.json files")->required();
  construct->add_option("--jobs", jobs);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "run or replay a tracker over a space");
  eval->add_option("--manifest", ev.manifest)->required();
  eval->add_option("--space", ev.space, "subspace JSON (default: whole sequences)");
  eval->add_option("--attributes", ev.attributes, "attribute tables directory");
  eval->add_option("--thresholds", ev.thresholds, "thresholds JSON (default: shipped)");
  eval->add_option("--mechanism", ev.mechanism, "ope|rope");
  eval->add_option("--tracker-cmd", ev.tracker_cmd, "tracker command speaking on stdio");
  eval->add_option("--listen", ev.listen, "host:port to accept a TCP tracker on");
  eval->add_option("--replay", ev.replay, "directory of recorded result files");
  eval->add_option("--tracker-name", ev.tracker_name, "name recorded in the run");
  eval->add_option("--timeout-ms", ev.timeout_ms, "per-frame reply timeout");
  eval->add_option("--fail-threshold", ev.fail_threshold, "R-OPE failure overlap");
  eval->add_option("--consecutive", ev.consecutive, "R-OPE failures before restart");
  eval->add_option("--jobs", ev.jobs, "concurrent tracker processes");
  eval->add_option("--out", ev.out, "run directory")->required();

  fs::path runs;
  bool micro = false;
  auto* report = app.add_subcommand("report", "score runs and write the report bundle");
  report->add_option("--runs", runs, "a run directory or a directory of runs")->required();
  report->add_option("--out", out)->required();
  report->add_flag("--challenging-micro", micro, "add the pooled challenging curve");

  fs::path replay;
  auto* pack = app.add_subcommand("pack", "bundle result files into a submission archive");
  pack->add_option("--replay", replay)->required();
  pack->add_option("--out", out, "tar file")->required();

  fs::path data;
  std::string bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "run the submission and leaderboard service");
  serve->add_option("--data", data)->required();
  serve->add_option("--bind", bind, "host:port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(out);
    if (import->parsed()) {
      const Sequence seq = load_sequence(source, parse_source_format(format), id, dataset);
      write_canonical(seq, out, copy_frames);
      fmt::print("{}: {} frames, {} absent\n", seq.id, seq.size(), seq.absent_count());
      return 0;
    }
    if (summary->parsed()) return cmd_summary(manifest);
    if (annotate->parsed()) {
      const Environment env = load_manifest(manifest);
      AnnotateOptions opts;
      opts.sog_norm = sog_norm;
      const auto tables = annotate_all(env, parse_annotation_mode(mode), opts, jobs);
      for (const auto& [sid, table] : tables) write_attribute_table(table, out / (sid + ".csv"));
      fmt::print("annotated {} sequences into {}\n", tables.size(), out.string());
      return 0;
    }
    if (calibrate->parsed()) {
      const Environment env = load_manifest(manifest);
      const auto tables = load_attribute_dir(attributes, env);
      const CalibrationPolicy policy = policy_path.empty() ? default_calibration_policy()
                                                           : load_calibration_policy(policy_path);
      const ThresholdSet set = calibrate_thresholds(env, tables, policy);
      save_thresholds(set, out);
      fmt::print("wrote {} ({})\n", out.string(), set.id);
      return 0;
    }
    if (classify->parsed()) {
      const Environment env = load_manifest(manifest);
      const auto tables = load_attribute_dir(attributes, env);
      const ThresholdSet set = thresholds.empty() ? default_thresholds() : load_thresholds(thresholds);
      for (const auto& [sid, table] : tables) {
        text::write_file(out / (sid + ".csv"), format_flags_csv(classify_table(table, set)));
      }
      fmt::print("classified {} sequences with {}\n", tables.size(), set.id);
      return 0;
    }
    if (construct->parsed()) {
      const Environment env = load_manifest(manifest);
      const auto tables = load_attribute_dir(attributes, env);
      const ThresholdSet set = thresholds.empty() ? default_thresholds() : load_thresholds(thresholds);
      std::vector<AttributeId> attrs;
      if (attr_names.empty()) {
        for (std::size_t i = 0; i < kAttributeCount; ++i) attrs.push_back(AttributeId(i));
      } else {
        for (const auto& n : attr_names) attrs.push_back(parse_attribute(n));
      }
      for (const AttributeId a : attrs) {
        const Subspace space = construct_subspace(env, tables, a, set, {}, jobs);
        save_subspace(space, out / (space.id + ".json"));
        fmt::print("{}: {} subsequences\n", space.id, space.refs.size());
      }
      return 0;
    }
    if (eval->parsed()) return cmd_eval(ev);
    if (report->parsed()) {
      ReportOptions opts;
      opts.challenging_micro = micro;
      auto entries = score_runs(runs);
      const std::size_t n = entries.size();
      emit_report(std::move(entries), out, opts);
      fmt::print("report for {} entries written to {}\n", n, out.string());
      return 0;
    }
    if (pack->parsed()) return cmd_pack(replay, out);
    if (serve->parsed()) {
      const auto [host, port] = parse_host_port(bind);
      SubmissionService service(ServiceConfig{data});
      HttpFrontend frontend(service);
      g_frontend = &frontend;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << fmt::format("serving {} spaces on {}:{}\n", service.space_ids().size(), host,
                               port);
      frontend.run(host, port);
      g_frontend = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
