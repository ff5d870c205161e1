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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Text helpers shared by the file formats.
namespace sotverse::text {

// Shortest decimal that round-trips to the same double.
std::string shortest(double v);
// Nine significant digits, as stored in attribute tables.
std::string sig9(double v);
// Fixed-point with the given number of decimals; used by plots.
std::string fixed(double v, int decimals);

// Strict parse: whole token must be a finite decimal number.
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
// Splits on any run of commas, tabs, or spaces.
std::vector<std::string_view> split_fields(std::string_view s);

// Lines without terminators; a trailing empty line is dropped. CRLF accepted.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sotverse::text
