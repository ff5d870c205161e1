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

#include "sotverse/protocol.h"

#include <fmt/format.h>

#include <cmath>

#include "json.hpp"
#include "sotverse/format.h"

namespace sotverse {

using nlohmann::json;

std::string_view to_string(MessageType t) {
  switch (t) {
    case MessageType::kHello: return "hello";
    case MessageType::kInit: return "init";
    case MessageType::kFrame: return "frame";
    case MessageType::kState: return "state";
    case MessageType::kQuit: return "quit";
    case MessageType::kError: return "error";
  }
  return "error";
}

ProtocolMessage ProtocolMessage::hello_engine(int version) {
  ProtocolMessage m;
  m.type = MessageType::kHello;
  m.version = version;
  return m;
}

ProtocolMessage ProtocolMessage::hello_tracker(std::string name) {
  ProtocolMessage m;
  m.type = MessageType::kHello;
  m.name = std::move(name);
  return m;
}

ProtocolMessage ProtocolMessage::init(std::string frame, BoundingBox box,
                                      std::optional<std::size_t> index) {
  ProtocolMessage m;
  m.type = MessageType::kInit;
  m.frame = std::move(frame);
  m.bbox = box;
  m.index = index;
  return m;
}

ProtocolMessage ProtocolMessage::next_frame(std::string frame,
                                            std::optional<std::size_t> index) {
  ProtocolMessage m;
  m.type = MessageType::kFrame;
  m.frame = std::move(frame);
  m.index = index;
  return m;
}

ProtocolMessage ProtocolMessage::state(BoundingBox box) {
  ProtocolMessage m;
  m.type = MessageType::kState;
  m.bbox = box;
  return m;
}

ProtocolMessage ProtocolMessage::quit() {
  ProtocolMessage m;
  m.type = MessageType::kQuit;
  return m;
}

ProtocolMessage ProtocolMessage::error(std::string message) {
  ProtocolMessage m;
  m.type = MessageType::kError;
  m.message = std::move(message);
  return m;
}

namespace {

std::string quote(const std::string& s) { return json(s).dump(); }

std::string bbox_array(const BoundingBox& b) {
  for (double v : {b.x, b.y, b.w, b.h}) {
    if (!std::isfinite(v)) throw ProtocolError("bbox value is not finite", 0);
  }
  return fmt::format("[{},{},{},{}]", text::shortest(b.x), text::shortest(b.y),
                     text::shortest(b.w), text::shortest(b.h));
}

std::size_t key_offset(std::string_view line, std::string_view key) {
  const auto pos = line.find(fmt::format("\"{}\"", key));
  return pos == std::string_view::npos ? line.size() : pos;
}

}  // namespace

std::string encode(const ProtocolMessage& m) {
  std::string out = fmt::format("{{\"type\":\"{}\"", to_string(m.type));
  switch (m.type) {
    case MessageType::kHello:
      if (m.version) out += fmt::format(",\"version\":{}", *m.version);
      if (!m.name.empty()) out += ",\"name\":" + quote(m.name);
      break;
    case MessageType::kInit:
    case MessageType::kFrame:
      out += ",\"frame\":" + quote(m.frame);
      if (m.index) out += fmt::format(",\"index\":{}", *m.index);
      if (m.type == MessageType::kInit) {
        if (!m.bbox) throw ProtocolError("init message without bbox", 0);
        out += ",\"bbox\":" + bbox_array(*m.bbox);
      }
      break;
    case MessageType::kState:
      if (!m.bbox) throw ProtocolError("state message without bbox", 0);
      out += ",\"bbox\":" + bbox_array(*m.bbox);
      break;
    case MessageType::kQuit:
      break;
    case MessageType::kError:
      out += ",\"message\":" + quote(m.message);
      break;
  }
  out += '}';
  return out;
}

ProtocolMessage decode(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(fmt::format("malformed message: {}", e.what()),
                        e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object()) throw ProtocolError("message is not an object", 0);
  const auto type_it = doc.find("type");
  if (type_it == doc.end() || !type_it->is_string()) {
    throw ProtocolError("missing field 'type'", key_offset(line, "type"));
  }
  const std::string type = type_it->get<std::string>();

  auto require_string = [&](const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
      throw ProtocolError(fmt::format("{} message missing field '{}'", type, key), line.size());
    }
    if (!it->is_string()) {
      throw ProtocolError(fmt::format("field '{}' must be a string", key), key_offset(line, key));
    }
    return it->get<std::string>();
  };
  auto read_bbox = [&]() {
    const auto it = doc.find("bbox");
    if (it == doc.end()) {
      throw ProtocolError(fmt::format("{} message missing field 'bbox'", type), line.size());
    }
    if (!it->is_array() || it->size() != 4) {
      throw ProtocolError("bbox must be an array of 4 numbers", key_offset(line, "bbox"));
    }
    double v[4];
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(*it)[i].is_number()) {
        throw ProtocolError("bbox must be an array of 4 numbers", key_offset(line, "bbox"));
      }
      v[i] = (*it)[i].get<double>();
    }
    return BoundingBox{v[0], v[1], v[2], v[3]};
  };
  auto read_index = [&]() -> std::optional<std::size_t> {
    const auto it = doc.find("index");
    if (it == doc.end()) return std::nullopt;
    if (!it->is_number_unsigned()) {
      throw ProtocolError("index must be a non-negative integer", key_offset(line, "index"));
    }
    return it->get<std::size_t>();
  };

  ProtocolMessage m;
  if (type == "hello") {
    m.type = MessageType::kHello;
    if (const auto it = doc.find("version"); it != doc.end()) {
      if (!it->is_number_integer()) {
        throw ProtocolError("version must be an integer", key_offset(line, "version"));
      }
      m.version = it->get<int>();
    }
    if (const auto it = doc.find("name"); it != doc.end()) m.name = require_string("name");
  } else if (type == "init") {
    m.type = MessageType::kInit;
    m.frame = require_string("frame");
    m.index = read_index();
    m.bbox = read_bbox();
  } else if (type == "frame") {
    m.type = MessageType::kFrame;
    m.frame = require_string("frame");
    m.index = read_index();
  } else if (type == "state") {
    m.type = MessageType::kState;
    m.bbox = read_bbox();
  } else if (type == "quit") {
    m.type = MessageType::kQuit;
  } else if (type == "error") {
    m.type = MessageType::kError;
    if (doc.contains("message")) m.message = require_string("message");
  } else {
    throw ProtocolError(fmt::format("unknown message type '{}'", type), key_offset(line, "type"));
  }
  return m;
}

}  // namespace sotverse
