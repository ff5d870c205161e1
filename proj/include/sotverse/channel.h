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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace sotverse {

// Newline-delimited, bidirectional text channel to one tracker.
class LineChannel {
 public:
  virtual ~LineChannel() = default;

  // Sends `line` plus a newline. Throws SessionError when the peer is gone.
  virtual void write_line(std::string_view line) = 0;
  // Next line without its terminator; nullopt on timeout. Throws
  // SessionError when the peer closed the channel.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

// Line I/O over a pair of file descriptors (pipes or one socket).
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool is_socket);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;

 protected:
  void close_fds();

 private:
  int read_fd_;
  int write_fd_;
  bool is_socket_;
  std::string buffer_;
};

// Tracker launched as `/bin/sh -c command`, speaking on stdin/stdout.
class ProcessChannel : public FdChannel {
 public:
  static std::unique_ptr<ProcessChannel> spawn(const std::string& command);
  ~ProcessChannel() override;

 private:
  ProcessChannel(int read_fd, int write_fd, int pid);
  int pid_;
};

// Accepts a single tracker connection on host:port (port 0 picks a free one).
class TcpListener {
 public:
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  std::unique_ptr<FdChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  int port_ = 0;
};

std::unique_ptr<FdChannel> tcp_connect(const std::string& host, int port);

// Parses "host:port". Throws ConfigError.
std::pair<std::string, int> parse_host_port(std::string_view text);

// In-process tracker: every written line is handed to `responder`, whose
// return value (if any) becomes the next readable line.
class CallbackChannel : public LineChannel {
 public:
  using Responder = std::function<std::optional<std::string>(std::string_view)>;
  explicit CallbackChannel(Responder responder) : responder_(std::move(responder)) {}

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;

 private:
  Responder responder_;
  std::optional<std::string> pending_;
};

}  // namespace sotverse
