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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sotverse/geometry.h"

namespace sotverse {

inline constexpr int kProtocolVersion = 1;

enum class MessageType { kHello, kInit, kFrame, kState, kQuit, kError };

std::string_view to_string(MessageType t);

// One line of the tracker wire protocol. `bbox` is set exactly for init and
// state messages.
struct ProtocolMessage {
  MessageType type = MessageType::kHello;
  std::optional<int> version;        // hello
  std::string name;                  // hello (tracker side)
  std::string frame;                 // init, frame: image path
  std::optional<std::size_t> index;  // init, frame
  std::optional<BoundingBox> bbox;   // init, state
  std::string message;               // error

  static ProtocolMessage hello_engine(int version = kProtocolVersion);
  static ProtocolMessage hello_tracker(std::string name);
  static ProtocolMessage init(std::string frame, BoundingBox box,
                              std::optional<std::size_t> index = std::nullopt);
  static ProtocolMessage next_frame(std::string frame,
                                    std::optional<std::size_t> index = std::nullopt);
  static ProtocolMessage state(BoundingBox box);
  static ProtocolMessage quit();
  static ProtocolMessage error(std::string message);

  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Single line, no trailing newline.
std::string encode(const ProtocolMessage& msg);
// Throws ProtocolError carrying the byte offset of the problem.
ProtocolMessage decode(std::string_view line);

}  // namespace sotverse
