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

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sotverse/evaluation.h"

namespace sotverse {

// Request rejected; `status` is the HTTP status to answer with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SubmissionStatus { kQueued, kScored, kFailed };
std::string_view to_string(SubmissionStatus s);

struct Submission {
  std::string id;
  std::string tracker;
  std::string space;
  Mechanism mechanism = Mechanism::kOpe;
  SubmissionStatus status = SubmissionStatus::kQueued;
  std::string created_at;
  std::size_t sequence = 0;  // arrival order, breaks created_at ties
  std::string error;
};

struct ServiceConfig {
  std::filesystem::path data_dir;
  std::size_t max_archive_bytes = 64u << 20;
  // Start the scoring thread in the constructor.
  bool start_worker = true;
};

// Storage layout under data_dir:
//   spaces.json         registered spaces (id -> context sources)
//   store/<id>.tar      uploaded archives, content addressed
//   index.jsonl         append-only submission events
//   reports/<id>.json   report.json of scored submissions
class SubmissionService {
 public:
  explicit SubmissionService(ServiceConfig config);
  ~SubmissionService();
  SubmissionService(const SubmissionService&) = delete;
  SubmissionService& operator=(const SubmissionService&) = delete;

  struct SubmitResult {
    Submission submission;
    bool duplicate = false;
  };
  // `meta_json`: {"tracker": ..., "space": ..., "mechanism": "ope"}.
  SubmitResult submit(std::string_view archive, std::string_view meta_json);

  std::optional<Submission> find(const std::string& id) const;
  // Report document when scored, status document otherwise; 404 ServiceError
  // for an unknown id.
  std::string report_document(const std::string& id) const;
  std::string leaderboard_document(const std::string& space, const std::string& metric) const;
  std::vector<std::string> space_ids() const;
  std::size_t max_archive_bytes() const { return config_.max_archive_bytes; }

  // Blocks until the scoring queue is empty.
  void wait_idle();
  // Scores queued submissions on the calling thread (no worker mode).
  void drain();

  // Id of an upload: SHA-256 over the canonical meta line and the archive.
  static std::string content_id(std::string_view archive, const std::string& tracker,
                                const std::string& space, Mechanism mechanism);

 private:
  struct SpaceEntry {
    ContextSources sources;
    std::shared_ptr<const EvalContext> context;
  };

  void load_spaces();
  void replay_index();
  void append_index(const std::string& line);
  std::shared_ptr<const EvalContext> context_for(const std::string& space);
  void score(const std::string& id);
  void worker_loop();

  ServiceConfig config_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, SpaceEntry> spaces_;
  std::map<std::string, Submission> submissions_;
  std::deque<std::string> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::size_t next_sequence_ = 0;
  std::mutex index_mu_;
  std::mutex context_mu_;
  std::thread worker_;
};

// HTTP front end:
//   POST /api/v1/submissions              multipart fields `archive`, `meta`
//   GET  /api/v1/submissions/{id}/report
//   GET  /api/v1/leaderboard?space=..&metric=..
class HttpFrontend {
 public:
  explicit HttpFrontend(SubmissionService& service);
  ~HttpFrontend();

  // Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sotverse
