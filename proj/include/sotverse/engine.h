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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sotverse/channel.h"
#include "sotverse/geometry.h"
#include "sotverse/model.h"
#include "sotverse/protocol.h"
#include "sotverse/space.h"

namespace sotverse {

enum class FrameState { kInit, kTracking, kFailed, kSkipped };

std::string_view to_string(FrameState s);
FrameState parse_frame_state(std::string_view text);

struct TrajectoryEntry {
  Region box;  // nullopt: predicted absent, or no prediction at all
  FrameState state = FrameState::kTracking;
  friend bool operator==(const TrajectoryEntry&, const TrajectoryEntry&) = default;
};

struct Trajectory {
  std::string tracker;
  std::string sequence_id;
  Mechanism mechanism = Mechanism::kOpe;
  std::vector<TrajectoryEntry> frames;
  // Wall time per frame in milliseconds; informational only.
  std::vector<double> wall_ms;
  // Set when the session faulted; frames from that point on are kFailed.
  std::string error;

  std::size_t size() const { return frames.size(); }
};

struct RestartEvent {
  std::size_t fail_frame = 0;    // frame at which the failure streak completed
  std::size_t reinit_frame = 0;  // start point the tracker was re-initialized on
  friend bool operator==(const RestartEvent&, const RestartEvent&) = default;
};

struct Segment {
  std::size_t start = 0;  // init frame
  std::size_t end = 0;    // first frame of the failure streak, or sequence end
  std::size_t length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct RestartLog {
  std::string sequence_id;
  std::vector<RestartEvent> restarts;
  std::vector<Segment> segments;

  std::size_t restart_count() const { return restarts.size(); }
  std::size_t longest_segment() const;
  friend bool operator==(const RestartLog&, const RestartLog&) = default;
};

struct RopePolicy {
  double fail_overlap_threshold = 0.5;
  std::size_t consecutive_n = 10;
};

// Tracker timed out, replied with garbage, or reported an error. The session
// cannot be trusted afterwards.
class TrackerFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Request/reply wrapper over one channel. Not thread-safe.
class TrackerSession {
 public:
  explicit TrackerSession(std::unique_ptr<LineChannel> channel,
                          std::chrono::milliseconds timeout = std::chrono::seconds(60));
  TrackerSession(TrackerSession&&) noexcept = default;
  TrackerSession& operator=(TrackerSession&&) noexcept = default;
  ~TrackerSession();

  // Sends hello{version} and waits for hello{name}.
  void handshake();
  const std::string& name() const { return name_; }

  Region init(const std::string& frame, std::size_t index, const BoundingBox& box);
  Region track(const std::string& frame, std::size_t index);
  // Best effort; never throws.
  void quit() noexcept;

 private:
  Region exchange(const ProtocolMessage& request);

  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::string name_;
  bool closed_ = false;
};

// In-process tracker for tests and harnesses. `policy` sees every init and
// frame request and returns the predicted box (nullopt = absent).
using ScriptedPolicy = std::function<Region(const ProtocolMessage& request)>;
std::unique_ptr<LineChannel> scripted_channel(std::string name, ScriptedPolicy policy);

Trajectory run_ope(TrackerSession& session, const Sequence& seq);

struct RopeResult {
  Trajectory trajectory;
  RestartLog log;
};

RopeResult run_rope(TrackerSession& session, const Sequence& seq,
                    const StartPointList& starts, const RopePolicy& policy = {});

// Result replay: one row per frame, `x,y,w,h` or `absent`, no header.
Trajectory parse_replay(std::string_view text, const Sequence& seq,
                        const std::string& where = "replay");
Trajectory load_trajectory(const std::filesystem::path& result_file, const Sequence& seq);

// Trajectory file: header `state,x,y,w,h`, empty box cells when absent.
std::string format_trajectory_csv(const Trajectory& traj);
Trajectory parse_trajectory_csv(std::string_view text, std::string sequence_id,
                                const std::string& where = "trajectory");
std::string format_timing_csv(const Trajectory& traj);
std::string format_restart_log_json(const RestartLog& log);
RestartLog parse_restart_log_json(std::string_view text);

}  // namespace sotverse
