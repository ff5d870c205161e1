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

#include <string>
#include <string_view>
#include <vector>

namespace sotverse {

struct ArchiveMember {
  std::string name;
  std::string data;
  friend bool operator==(const ArchiveMember&, const ArchiveMember&) = default;
};

// POSIX ustar. Regular files only; directories are skipped, GNU long names
// and pax headers are understood. Throws LoadError on a malformed archive.
std::vector<ArchiveMember> read_tar(std::string_view bytes);

// Deterministic output: zero mtime/uid/gid, mode 0644, members in order.
std::string write_tar(const std::vector<ArchiveMember>& members);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace sotverse
