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

#include "sotverse/service.h"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>

#include "httplib.h"
#include "json.hpp"
#include "sotverse/archive.h"
#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/log.h"
#include "sotverse/report.h"

namespace sotverse {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(SubmissionStatus s) {
  switch (s) {
    case SubmissionStatus::kQueued: return "queued";
    case SubmissionStatus::kScored: return "scored";
    case SubmissionStatus::kFailed: return "failed";
  }
  return "failed";
}

namespace {

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                          now.time_since_epoch()).count() % 1000000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:06d}Z", buf, micros);
}

std::string error_document(const std::string& message) {
  ordered_json doc = {{"schema", 1}, {"error", message}};
  return doc.dump() + "\n";
}

std::string status_document(const Submission& s) {
  ordered_json doc = {{"schema", 1}, {"id", s.id}, {"status", std::string(to_string(s.status))}};
  if (s.status == SubmissionStatus::kFailed) doc["error"] = s.error;
  return doc.dump() + "\n";
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string base_name(const std::string& member) {
  const auto slash = member.find_last_of('/');
  return slash == std::string::npos ? member : member.substr(slash + 1);
}

// Replay files of an archive keyed by file name.
std::map<std::string, std::string> archive_files(std::string_view bytes) {
  std::map<std::string, std::string> files;
  for (auto& m : read_tar(bytes)) {
    std::string name = base_name(m.name);
    if (name.empty() || name.front() == '.') continue;
    if (!files.emplace(name, std::move(m.data)).second) {
      throw LoadError("archive", fmt::format("duplicate member '{}'", name));
    }
  }
  return files;
}

ReplayLookup map_lookup(const std::map<std::string, std::string>& files) {
  return [&files](const std::string& name) -> std::optional<std::string> {
    const auto it = files.find(name);
    if (it == files.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

std::string SubmissionService::content_id(std::string_view archive, const std::string& tracker,
                                          const std::string& space, Mechanism mechanism) {
  const json meta = {{"mechanism", std::string(to_string(mechanism))},
                     {"space", space},
                     {"tracker", tracker}};
  std::string payload = meta.dump();
  payload += '\n';
  payload.append(archive);
  return sha256_hex(payload);
}

SubmissionService::SubmissionService(ServiceConfig config) : config_(std::move(config)) {
  fs::create_directories(config_.data_dir / "store");
  fs::create_directories(config_.data_dir / "reports");
  load_spaces();
  replay_index();
  if (config_.start_worker) worker_ = std::thread([this] { worker_loop(); });
}

SubmissionService::~SubmissionService() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void SubmissionService::load_spaces() {
  const fs::path file = config_.data_dir / "spaces.json";
  if (!fs::exists(file)) return;
  try {
    const json doc = json::parse(text::read_file(file));
    if (doc.at("schema").get<int>() != 1) throw ConfigError("unsupported schema");
    for (const auto& s : doc.at("spaces")) {
      SpaceEntry entry;
      entry.sources.manifest = resolve(config_.data_dir, s.at("manifest").get<std::string>());
      entry.sources.space_file = resolve(config_.data_dir, s.value("space_file", ""));
      entry.sources.attributes_dir = resolve(config_.data_dir, s.value("attributes", ""));
      entry.sources.thresholds_file = resolve(config_.data_dir, s.value("thresholds", ""));
      const std::string id = s.at("id").get<std::string>();
      if (!spaces_.emplace(id, std::move(entry)).second) {
        throw ConfigError(fmt::format("duplicate space id '{}'", id));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
  }
}

void SubmissionService::replay_index() {
  const fs::path file = config_.data_dir / "index.jsonl";
  if (!fs::exists(file)) return;
  for (const auto& line : text::read_lines(file)) {
    if (text::trim(line).empty()) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::exception&) {
      // A torn final write from a crash; everything before it is intact.
      warn("index.jsonl: skipping unreadable line");
      continue;
    }
    const std::string kind = ev.at("event").get<std::string>();
    const std::string id = ev.at("id").get<std::string>();
    if (kind == "submitted") {
      Submission s;
      s.id = id;
      s.tracker = ev.at("tracker").get<std::string>();
      s.space = ev.at("space").get<std::string>();
      s.mechanism = parse_mechanism(ev.at("mechanism").get<std::string>());
      s.created_at = ev.at("created_at").get<std::string>();
      s.sequence = ev.at("sequence").get<std::size_t>();
      next_sequence_ = std::max(next_sequence_, s.sequence + 1);
      submissions_.emplace(id, std::move(s));
    } else if (auto it = submissions_.find(id); it != submissions_.end()) {
      if (kind == "scored" && fs::exists(config_.data_dir / "reports" / (id + ".json"))) {
        it->second.status = SubmissionStatus::kScored;
      } else if (kind == "failed") {
        it->second.status = SubmissionStatus::kFailed;
        it->second.error = ev.value("error", "");
      }
    }
  }
  std::vector<const Submission*> pending;
  for (const auto& [id, s] : submissions_) {
    if (s.status == SubmissionStatus::kQueued) pending.push_back(&s);
  }
  std::sort(pending.begin(), pending.end(),
            [](const Submission* a, const Submission* b) { return a->sequence < b->sequence; });
  for (const auto* s : pending) queue_.push_back(s->id);
}

void SubmissionService::append_index(const std::string& line) {
  std::lock_guard lock(index_mu_);
  const fs::path file = config_.data_dir / "index.jsonl";
  std::FILE* f = std::fopen(file.c_str(), "ab");
  if (!f) throw LoadError(file.string(), "cannot open index for append");
  const std::string data = line + "\n";
  const bool ok = std::fwrite(data.data(), 1, data.size(), f) == data.size();
  const bool flushed = std::fflush(f) == 0;
  std::fclose(f);
  if (!ok || !flushed) throw LoadError(file.string(), "index write failed");
}

std::shared_ptr<const EvalContext> SubmissionService::context_for(const std::string& space) {
  std::lock_guard lock(context_mu_);
  const auto it = spaces_.find(space);
  if (it == spaces_.end()) throw ServiceError(400, fmt::format("unknown space '{}'", space));
  if (!it->second.context) {
    it->second.context = std::make_shared<const EvalContext>(load_context(it->second.sources));
  }
  return it->second.context;
}

std::vector<std::string> SubmissionService::space_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, entry] : spaces_) ids.push_back(id);
  return ids;
}

SubmissionService::SubmitResult SubmissionService::submit(std::string_view archive,
                                                          std::string_view meta_json) {
  if (archive.size() > config_.max_archive_bytes) {
    throw ServiceError(413, fmt::format("archive of {} bytes exceeds the {} byte limit",
                                        archive.size(), config_.max_archive_bytes));
  }
  std::string tracker, space;
  Mechanism mechanism = Mechanism::kOpe;
  try {
    const json meta = json::parse(meta_json);
    tracker = meta.at("tracker").get<std::string>();
    space = meta.at("space").get<std::string>();
    mechanism = parse_mechanism(meta.value("mechanism", "ope"));
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("bad meta: ") + e.what());
  } catch (const ConfigError& e) {
    throw ServiceError(400, std::string("bad meta: ") + e.what());
  }
  if (tracker.empty()) throw ServiceError(400, "bad meta: empty tracker name");
  if (mechanism == Mechanism::kRope) {
    throw ServiceError(400,
                       "R-OPE results cannot be verified from files; run `sotverse eval "
                       "--mechanism rope` locally against a live tracker");
  }
  const auto ctx = context_for(space);
  std::map<std::string, std::string> files;
  try {
    files = archive_files(archive);
  } catch (const LoadError& e) {
    throw ServiceError(400, e.what());
  }
  const auto missing = missing_replays(*ctx, map_lookup(files));
  if (!missing.empty()) {
    throw ServiceError(400, fmt::format("archive misses result files for: {}",
                                        fmt::join(missing, ", ")));
  }

  const std::string id = content_id(archive, tracker, space, mechanism);
  std::unique_lock lock(mu_);
  if (const auto it = submissions_.find(id); it != submissions_.end()) {
    return {it->second, true};
  }
  Submission s;
  s.id = id;
  s.tracker = tracker;
  s.space = space;
  s.mechanism = mechanism;
  s.created_at = now_utc();
  s.sequence = next_sequence_++;
  text::write_file(config_.data_dir / "store" / (id + ".tar"), archive);
  const ordered_json ev = {{"event", "submitted"},
                           {"id", id},
                           {"tracker", tracker},
                           {"space", space},
                           {"mechanism", std::string(to_string(mechanism))},
                           {"created_at", s.created_at},
                           {"sequence", s.sequence}};
  append_index(ev.dump());
  submissions_.emplace(id, s);
  queue_.push_back(id);
  lock.unlock();
  cv_.notify_all();
  return {s, false};
}

void SubmissionService::score(const std::string& id) {
  Submission s;
  {
    std::lock_guard lock(mu_);
    s = submissions_.at(id);
  }
  std::string error;
  try {
    const auto ctx = context_for(s.space);
    const std::string archive = text::read_file(config_.data_dir / "store" / (id + ".tar"));
    const auto files = archive_files(archive);
    const auto lookup = map_lookup(files);
    RunData run;
    run.record.tracker = s.tracker;
    run.record.space_id = ctx->space_id;
    run.record.environment_id = ctx->environment.id;
    run.record.mechanism = s.mechanism;
    for (const auto& unit : ctx->units) {
      run.record.units.push_back(unit.id);
      run.trajectories.emplace(unit.id, replay_unit(*ctx, unit, lookup, s.tracker));
    }
    std::vector<ReportEntry> entries;
    entries.push_back(make_entry(run.record, score_run(*ctx, run)));
    text::write_file(config_.data_dir / "reports" / (id + ".json"),
                     format_report_json(std::move(entries)));
    append_index(ordered_json{{"event", "scored"}, {"id", id}}.dump());
  } catch (const std::exception& e) {
    error = e.what();
    try {
      append_index(ordered_json{{"event", "failed"}, {"id", id}, {"error", error}}.dump());
    } catch (const std::exception& e2) {
      warn(fmt::format("cannot record failure of {}: {}", id, e2.what()));
    }
  }
  std::lock_guard lock(mu_);
  auto& sub = submissions_.at(id);
  if (error.empty()) {
    sub.status = SubmissionStatus::kScored;
  } else {
    sub.status = SubmissionStatus::kFailed;
    sub.error = error;
  }
}

void SubmissionService::worker_loop() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (stopping_) return;
    const std::string id = queue_.front();
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    score(id);
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

void SubmissionService::wait_idle() {
  if (!worker_.joinable()) {
    drain();
    return;
  }
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void SubmissionService::drain() {
  while (true) {
    std::string id;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty()) return;
      id = queue_.front();
      queue_.pop_front();
    }
    score(id);
  }
}

std::optional<Submission> SubmissionService::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = submissions_.find(id);
  if (it == submissions_.end()) return std::nullopt;
  return it->second;
}

std::string SubmissionService::report_document(const std::string& id) const {
  const auto s = find(id);
  if (!s) throw ServiceError(404, fmt::format("submission '{}' not found", id));
  if (s->status != SubmissionStatus::kScored) return status_document(*s);
  return text::read_file(config_.data_dir / "reports" / (id + ".json"));
}

std::string SubmissionService::leaderboard_document(const std::string& space,
                                                    const std::string& metric) const {
  if (!spaces_.count(space)) throw ServiceError(400, fmt::format("unknown space '{}'", space));
  const auto& keys = headline_keys();
  if (std::find(keys.begin(), keys.end(), metric) == keys.end()) {
    throw ServiceError(400, fmt::format("unknown metric '{}'", metric));
  }
  struct Row {
    Submission sub;
    double value;
  };
  std::vector<Row> rows;
  std::vector<Submission> scored;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, s] : submissions_) {
      if (s.space == space && s.status == SubmissionStatus::kScored) scored.push_back(s);
    }
  }
  for (const auto& s : scored) {
    const json report = json::parse(text::read_file(config_.data_dir / "reports" / (s.id + ".json")));
    const json& value = report.at("entries").at(0).at("headlines").at(metric);
    if (value.is_null()) continue;
    rows.push_back({s, value.get<double>()});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.sub.created_at != b.sub.created_at) return a.sub.created_at < b.sub.created_at;
    return a.sub.sequence < b.sub.sequence;
  });
  ordered_json entries = ordered_json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    entries.push_back({{"rank", i + 1},
                       {"id", rows[i].sub.id},
                       {"tracker", rows[i].sub.tracker},
                       {"value", rows[i].value},
                       {"created_at", rows[i].sub.created_at}});
  }
  ordered_json doc = {{"schema", 1}, {"space", space}, {"metric", metric}, {"entries", entries}};
  return doc.dump(2) + "\n";
}

struct HttpFrontend::Impl {
  SubmissionService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(SubmissionService& s) : service(s) {}

  static void reply_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(error_document(message), "application/json");
  }

  template <typename Fn>
  static void guarded(httplib::Response& res, Fn fn) {
    try {
      fn();
    } catch (const ServiceError& e) {
      reply_error(res, e.status(), e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  }

  void install() {
    server.set_payload_max_length(service.max_archive_bytes() + (1u << 20));
    server.Post("/api/v1/submissions", [this](const httplib::Request& req,
                                              httplib::Response& res) {
      guarded(res, [&] {
        if (!req.is_multipart_form_data()) {
          throw ServiceError(400, "expected multipart/form-data with fields archive and meta");
        }
        if (!req.has_file("archive")) throw ServiceError(400, "missing field 'archive'");
        if (!req.has_file("meta")) throw ServiceError(400, "missing field 'meta'");
        const auto result = service.submit(req.get_file_value("archive").content,
                                           req.get_file_value("meta").content);
        res.status = result.duplicate ? 200 : 202;
        res.set_content(status_document(result.submission), "application/json");
      });
    });
    server.Get(R"(/api/v1/submissions/([0-9A-Za-z]+)/report)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   res.set_content(service.report_document(req.matches[1]), "application/json");
                 });
               });
    server.Get("/api/v1/leaderboard", [this](const httplib::Request& req,
                                             httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("space")) throw ServiceError(400, "missing parameter 'space'");
        const std::string metric =
            req.has_param("metric") ? req.get_param_value("metric") : "success_auc";
        res.set_content(service.leaderboard_document(req.get_param_value("space"), metric),
                        "application/json");
      });
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(error_document(res.status == 404 ? "not found" : "request failed"),
                        "application/json");
      }
    });
  }
};

HttpFrontend::HttpFrontend(SubmissionService& service)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->install();
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw SessionError(fmt::format("cannot bind {}:{}", host, port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpFrontend::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw SessionError(fmt::format("cannot listen on {}:{}", host, port));
  }
}

void HttpFrontend::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace sotverse
