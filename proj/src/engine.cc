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

#include "sotverse/engine.h"

#include <fmt/format.h>

#include <algorithm>

#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"

namespace sotverse {

using nlohmann::json;

std::string_view to_string(FrameState s) {
  switch (s) {
    case FrameState::kInit: return "init";
    case FrameState::kTracking: return "tracking";
    case FrameState::kFailed: return "failed";
    case FrameState::kSkipped: return "skipped";
  }
  return "failed";
}

FrameState parse_frame_state(std::string_view text) {
  if (text == "init") return FrameState::kInit;
  if (text == "tracking") return FrameState::kTracking;
  if (text == "failed") return FrameState::kFailed;
  if (text == "skipped") return FrameState::kSkipped;
  throw ConfigError(fmt::format("unknown frame state '{}'", text));
}

std::size_t RestartLog::longest_segment() const {
  std::size_t best = 0;
  for (const auto& s : segments) best = std::max(best, s.length());
  return best;
}

TrackerSession::TrackerSession(std::unique_ptr<LineChannel> channel,
                               std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {}

TrackerSession::~TrackerSession() { quit(); }

void TrackerSession::handshake() {
  channel_->write_line(encode(ProtocolMessage::hello_engine()));
  auto line = channel_->read_line(timeout_);
  if (!line) throw TrackerFault("tracker did not answer the handshake");
  ProtocolMessage reply;
  try {
    reply = decode(*line);
  } catch (const ProtocolError& e) {
    throw TrackerFault(std::string("bad handshake reply: ") + e.what());
  }
  if (reply.type == MessageType::kError) {
    throw TrackerFault("tracker error: " + reply.message);
  }
  if (reply.type != MessageType::kHello || reply.name.empty()) {
    throw TrackerFault("expected hello{name} from tracker");
  }
  name_ = reply.name;
}

Region TrackerSession::exchange(const ProtocolMessage& request) {
  channel_->write_line(encode(request));
  auto line = channel_->read_line(timeout_);
  if (!line) {
    throw TrackerFault(fmt::format("tracker timed out after {} ms", timeout_.count()));
  }
  ProtocolMessage reply;
  try {
    reply = decode(*line);
  } catch (const ProtocolError& e) {
    throw TrackerFault(std::string("malformed reply: ") + e.what());
  }
  if (reply.type == MessageType::kError) {
    throw TrackerFault("tracker error: " + reply.message);
  }
  if (reply.type != MessageType::kState || !reply.bbox) {
    throw TrackerFault(fmt::format("expected state reply, got {}", to_string(reply.type)));
  }
  if (!(reply.bbox->w > 0 && reply.bbox->h > 0)) return std::nullopt;
  return reply.bbox;
}

Region TrackerSession::init(const std::string& frame, std::size_t index,
                            const BoundingBox& box) {
  return exchange(ProtocolMessage::init(frame, box, index));
}

Region TrackerSession::track(const std::string& frame, std::size_t index) {
  return exchange(ProtocolMessage::next_frame(frame, index));
}

void TrackerSession::quit() noexcept {
  if (closed_ || !channel_) return;
  closed_ = true;
  try {
    channel_->write_line(encode(ProtocolMessage::quit()));
  } catch (...) {
  }
}

std::unique_ptr<LineChannel> scripted_channel(std::string name, ScriptedPolicy policy) {
  return std::make_unique<CallbackChannel>(
      [name = std::move(name), policy = std::move(policy)](
          std::string_view line) -> std::optional<std::string> {
        const ProtocolMessage msg = decode(line);
        switch (msg.type) {
          case MessageType::kHello:
            return encode(ProtocolMessage::hello_tracker(name));
          case MessageType::kInit:
          case MessageType::kFrame: {
            const Region box = policy(msg);
            return encode(ProtocolMessage::state(box.value_or(BoundingBox{0, 0, 0, 0})));
          }
          default:
            return std::nullopt;
        }
      });
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

Trajectory empty_trajectory(const TrackerSession& session, const Sequence& seq,
                            Mechanism mechanism) {
  Trajectory traj;
  traj.tracker = session.name();
  traj.sequence_id = seq.id;
  traj.mechanism = mechanism;
  traj.frames.assign(seq.size(), TrajectoryEntry{std::nullopt, FrameState::kSkipped});
  traj.wall_ms.assign(seq.size(), 0.0);
  return traj;
}

void mark_failed_from(Trajectory& traj, std::size_t t, const std::string& error) {
  for (std::size_t i = t; i < traj.frames.size(); ++i) {
    traj.frames[i] = TrajectoryEntry{std::nullopt, FrameState::kFailed};
  }
  traj.error = fmt::format("frame {}: {}", t, error);
}

void check_runnable(const Sequence& seq) {
  if (seq.size() == 0) throw DomainError(seq.id + ": empty sequence");
  if (!seq.groundtruth.front()) throw DomainError(seq.id + ": first frame is absent");
}

}  // namespace

Trajectory run_ope(TrackerSession& session, const Sequence& seq) {
  check_runnable(seq);
  Trajectory traj = empty_trajectory(session, seq, Mechanism::kOpe);
  std::size_t t = 0;
  try {
    for (; t < seq.size(); ++t) {
      const auto t0 = Clock::now();
      const std::string frame = seq.image_file(t).string();
      if (t == 0) {
        traj.frames[t] = {session.init(frame, t, *seq.groundtruth[0]), FrameState::kInit};
      } else {
        traj.frames[t] = {session.track(frame, t), FrameState::kTracking};
      }
      traj.wall_ms[t] = elapsed_ms(t0);
    }
  } catch (const TrackerFault& e) {
    mark_failed_from(traj, t, e.what());
  }
  return traj;
}

RopeResult run_rope(TrackerSession& session, const Sequence& seq,
                    const StartPointList& starts, const RopePolicy& policy) {
  check_runnable(seq);
  if (starts.empty()) throw DomainError(seq.id + ": no start points for R-OPE");
  if (policy.consecutive_n == 0) throw ConfigError("consecutive_n must be positive");
  RopeResult out;
  Trajectory& traj = out.trajectory;
  traj = empty_trajectory(session, seq, Mechanism::kRope);
  RestartLog& log = out.log;
  log.sequence_id = seq.id;

  const std::size_t n = seq.size();
  std::size_t init_frame = 0;
  std::size_t streak = 0;
  std::size_t streak_start = 0;
  std::size_t t = 0;
  bool ended = false;
  try {
    while (t < n) {
      const auto t0 = Clock::now();
      const std::string frame = seq.image_file(t).string();
      if (t == init_frame) {
        traj.frames[t] = {session.init(frame, t, *seq.groundtruth[t]), FrameState::kInit};
        traj.wall_ms[t] = elapsed_ms(t0);
        ++t;
        continue;
      }
      const Region box = session.track(frame, t);
      traj.frames[t] = {box, FrameState::kTracking};
      traj.wall_ms[t] = elapsed_ms(t0);

      const Region& gt = seq.groundtruth[t];
      if (gt) {
        const double overlap = box ? iou(*box, *gt) : 0.0;
        if (overlap < policy.fail_overlap_threshold) {
          if (streak == 0) streak_start = t;
          ++streak;
        } else {
          streak = 0;
        }
      }
      if (streak < policy.consecutive_n) {
        ++t;
        continue;
      }
      log.segments.push_back({init_frame, streak_start});
      streak = 0;
      const auto next = starts.next_after(t);
      if (!next || *next >= n) {
        ended = true;
        break;
      }
      log.restarts.push_back({t, *next});
      init_frame = *next;
      t = *next;
    }
  } catch (const TrackerFault& e) {
    mark_failed_from(traj, t, e.what());
    log.segments.push_back({init_frame, t});
    return out;
  }
  if (!ended) log.segments.push_back({init_frame, n});
  return out;
}

namespace {

Region parse_box_row(std::string_view row, const std::string& where, std::size_t line) {
  const auto trimmed = text::trim(row);
  if (trimmed == "absent") return std::nullopt;
  const auto fields = text::split_fields(trimmed);
  if (fields.size() != 4) {
    throw LoadError(fmt::format("{}:{}", where, line),
                    fmt::format("expected x,y,w,h or 'absent', got '{}'", trimmed));
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    const auto d = text::parse_double(fields[static_cast<std::size_t>(i)]);
    if (!d) {
      throw LoadError(fmt::format("{}:{}", where, line),
                      fmt::format("not a number: '{}'", fields[static_cast<std::size_t>(i)]));
    }
    v[i] = *d;
  }
  const BoundingBox box{v[0], v[1], v[2], v[3]};
  if (!(box.w > 0 && box.h > 0)) return std::nullopt;
  return box;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines = text::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

}  // namespace

Trajectory parse_replay(std::string_view text, const Sequence& seq, const std::string& where) {
  const auto lines = split_lines(text);
  if (lines.size() != seq.size()) {
    const std::string detail =
        lines.size() < seq.size()
            ? fmt::format("{} rows for a {}-frame sequence ({} missing)", lines.size(),
                          seq.size(), seq.size() - lines.size())
            : fmt::format("{} rows for a {}-frame sequence ({} extra)", lines.size(),
                          seq.size(), lines.size() - seq.size());
    throw LoadError(where, detail);
  }
  Trajectory traj;
  traj.tracker = "replay";
  traj.sequence_id = seq.id;
  traj.mechanism = Mechanism::kOpe;
  traj.frames.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    traj.frames.push_back({parse_box_row(lines[i], where, i + 1),
                           i == 0 ? FrameState::kInit : FrameState::kTracking});
  }
  traj.wall_ms.assign(lines.size(), 0.0);
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& result_file, const Sequence& seq) {
  std::string content;
  try {
    content = text::read_file(result_file);
  } catch (const std::exception& e) {
    throw LoadError(result_file.string(), e.what());
  }
  return parse_replay(content, seq, result_file.string());
}

std::string format_trajectory_csv(const Trajectory& traj) {
  std::string out = "state,x,y,w,h\n";
  for (const auto& f : traj.frames) {
    out += to_string(f.state);
    if (f.box) {
      out += fmt::format(",{},{},{},{}\n", text::shortest(f.box->x), text::shortest(f.box->y),
                         text::shortest(f.box->w), text::shortest(f.box->h));
    } else {
      out += ",,,,\n";
    }
  }
  return out;
}

Trajectory parse_trajectory_csv(std::string_view text, std::string sequence_id,
                                const std::string& where) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != "state,x,y,w,h") {
    throw LoadError(where, "missing header 'state,x,y,w,h'");
  }
  Trajectory traj;
  traj.sequence_id = std::move(sequence_id);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = text::split(lines[i], ',');
    const std::string loc = fmt::format("{}:{}", where, i + 1);
    if (cells.size() != 5) throw LoadError(loc, "expected 5 cells");
    TrajectoryEntry entry;
    try {
      entry.state = parse_frame_state(cells[0]);
    } catch (const ConfigError& e) {
      throw LoadError(loc, e.what());
    }
    if (!cells[1].empty()) {
      double v[4];
      for (std::size_t k = 0; k < 4; ++k) {
        const auto d = text::parse_double(cells[k + 1]);
        if (!d) throw LoadError(loc, fmt::format("not a number: '{}'", cells[k + 1]));
        v[k] = *d;
      }
      entry.box = BoundingBox{v[0], v[1], v[2], v[3]};
    }
    traj.frames.push_back(entry);
  }
  traj.wall_ms.assign(traj.frames.size(), 0.0);
  if (!traj.frames.empty() && traj.frames.front().state == FrameState::kInit) {
    traj.mechanism = Mechanism::kOpe;
  }
  for (const auto& f : traj.frames) {
    if (f.state == FrameState::kSkipped) traj.mechanism = Mechanism::kRope;
  }
  return traj;
}

std::string format_timing_csv(const Trajectory& traj) {
  std::string out = "frame,wall_ms\n";
  for (std::size_t i = 0; i < traj.wall_ms.size(); ++i) {
    out += fmt::format("{},{:.3f}\n", i, traj.wall_ms[i]);
  }
  return out;
}

std::string format_restart_log_json(const RestartLog& log) {
  json restarts = json::array();
  for (const auto& r : log.restarts) {
    restarts.push_back({{"fail_frame", r.fail_frame}, {"reinit_frame", r.reinit_frame}});
  }
  json segments = json::array();
  for (const auto& s : log.segments) segments.push_back(json::array({s.start, s.end}));
  json doc = {{"schema", 1},
              {"sequence", log.sequence_id},
              {"restarts", restarts},
              {"segments", segments}};
  return doc.dump(2) + "\n";
}

RestartLog parse_restart_log_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema").get<int>() != 1) throw ConfigError("unsupported restart log schema");
    RestartLog log;
    log.sequence_id = doc.at("sequence").get<std::string>();
    for (const auto& r : doc.at("restarts")) {
      log.restarts.push_back(
          {r.at("fail_frame").get<std::size_t>(), r.at("reinit_frame").get<std::size_t>()});
    }
    for (const auto& s : doc.at("segments")) {
      log.segments.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
    }
    return log;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("restart log: ") + e.what());
  }
}

}  // namespace sotverse
