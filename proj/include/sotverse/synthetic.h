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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sotverse/geometry.h"
#include "sotverse/model.h"

namespace sotverse {

// In-memory sequence without image files (paths are placeholders).
Sequence make_box_sequence(std::string id, std::vector<Region> groundtruth, int width = 640,
                           int height = 480, std::string dataset = "synthetic");

struct FixtureCorpus {
  std::filesystem::path root;
  std::filesystem::path manifest;
  std::vector<std::string> sequences;
  // Replay directories, one per scripted tracker: replays/<tracker>/<seq>.csv
  std::vector<std::string> trackers;
};

// Writes the deterministic fixture corpus under `out`: three small canonical
// sequences with PPM frames (aspect change, fast motion, colour cast, shot
// cuts, absence, a flat target) and full-length replay files for the
// trackers "oracle", "offset" and "drifter". Identical bytes on every call.
FixtureCorpus write_fixture_corpus(const std::filesystem::path& out);

}  // namespace sotverse
