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

#include "sotverse/archive.h"

#include <fmt/format.h>

#include <openssl/evp.h>

#include <cstring>

#include "sotverse/errors.h"

namespace sotverse {

namespace {

constexpr std::size_t kBlock = 512;

std::string field(std::string_view block, std::size_t off, std::size_t len) {
  std::string_view f = block.substr(off, len);
  const auto nul = f.find('\0');
  return std::string(f.substr(0, nul));
}

std::size_t octal(std::string_view block, std::size_t off, std::size_t len,
                  std::size_t header_at) {
  std::size_t v = 0;
  bool any = false;
  for (char c : block.substr(off, len)) {
    if (c == '\0' || c == ' ') {
      if (any) break;
      continue;
    }
    if (c < '0' || c > '7') {
      throw LoadError("archive", fmt::format("bad octal field in header at byte {}", header_at));
    }
    v = v * 8 + static_cast<std::size_t>(c - '0');
    any = true;
  }
  return v;
}

std::size_t padded(std::size_t n) { return (n + kBlock - 1) / kBlock * kBlock; }

// "path" record of a pax extended header, if any.
std::string pax_path(std::string_view data) {
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto space = data.find(' ', pos);
    if (space == std::string_view::npos) break;
    std::size_t len = 0;
    for (char c : data.substr(pos, space - pos)) {
      if (c < '0' || c > '9') return {};
      len = len * 10 + static_cast<std::size_t>(c - '0');
    }
    if (len == 0 || pos + len > data.size()) break;
    const std::string_view record = data.substr(space + 1, pos + len - space - 2);
    if (record.substr(0, 5) == "path=") return std::string(record.substr(5));
    pos += len;
  }
  return {};
}

void put_octal(char* dst, std::size_t len, std::size_t value) {
  const std::string s = fmt::format("{:0{}o}", value, len - 1);
  std::memcpy(dst, s.data(), len - 1);
  dst[len - 1] = '\0';
}

}  // namespace

std::vector<ArchiveMember> read_tar(std::string_view bytes) {
  if (bytes.empty()) throw LoadError("archive", "empty archive");
  std::vector<ArchiveMember> out;
  std::string long_name;
  std::size_t pos = 0;
  while (pos + kBlock <= bytes.size()) {
    const std::string_view header = bytes.substr(pos, kBlock);
    if (header.find_first_not_of('\0') == std::string_view::npos) return out;
    unsigned sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
      sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(header[i]);
    }
    if (sum != octal(header, 148, 8, pos)) {
      throw LoadError("archive", fmt::format("header checksum mismatch at byte {}", pos));
    }
    const std::size_t size = octal(header, 124, 12, pos);
    const char type = header[156];
    const std::size_t data_at = pos + kBlock;
    if (data_at + size > bytes.size()) {
      throw LoadError("archive", fmt::format("truncated member at byte {}", pos));
    }
    const std::string_view data = bytes.substr(data_at, size);
    std::string name = field(header, 0, 100);
    const std::string prefix = field(header, 345, 155);
    if (header.substr(257, 5) == "ustar" && !prefix.empty()) name = prefix + "/" + name;
    if (!long_name.empty()) {
      name = long_name;
      long_name.clear();
    }
    switch (type) {
      case 'L': long_name = field(data, 0, data.size()); break;
      case 'x': long_name = pax_path(data); break;
      case '0':
      case '\0': out.push_back({std::move(name), std::string(data)}); break;
      default: break;  // directories, links, global headers
    }
    pos = data_at + padded(size);
  }
  if (pos != bytes.size()) throw LoadError("archive", "truncated archive");
  return out;
}

std::string write_tar(const std::vector<ArchiveMember>& members) {
  std::string out;
  for (const auto& m : members) {
    if (m.name.empty() || m.name.size() > 99) {
      throw DomainError(fmt::format("archive member name '{}' must be 1-99 bytes", m.name));
    }
    char h[kBlock] = {};
    std::memcpy(h, m.name.data(), m.name.size());
    put_octal(h + 100, 8, 0644);
    put_octal(h + 108, 8, 0);
    put_octal(h + 116, 8, 0);
    put_octal(h + 124, 12, m.data.size());
    put_octal(h + 136, 12, 0);
    std::memset(h + 148, ' ', 8);
    h[156] = '0';
    std::memcpy(h + 257, "ustar", 6);
    std::memcpy(h + 263, "00", 2);
    unsigned sum = 0;
    for (char c : h) sum += static_cast<unsigned char>(c);
    const std::string chk = fmt::format("{:06o}", sum);
    std::memcpy(h + 148, chk.data(), 6);
    h[154] = '\0';
    h[155] = ' ';
    out.append(h, kBlock);
    out += m.data;
    out.append(padded(m.data.size()) - m.data.size(), '\0');
  }
  out.append(2 * kBlock, '\0');
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

}  // namespace sotverse
