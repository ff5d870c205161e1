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

#include "sotverse/synthetic.h"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <random>

#include "json.hpp"
#include "sotverse/format.h"
#include "sotverse/image.h"
#include "sotverse/ingestion.h"

namespace sotverse {

namespace fs = std::filesystem;

Sequence make_box_sequence(std::string id, std::vector<Region> groundtruth, int width,
                           int height, std::string dataset) {
  Sequence seq;
  seq.id = std::move(id);
  seq.dataset_id = std::move(dataset);
  seq.root = "/nonexistent";
  seq.groundtruth = std::move(groundtruth);
  seq.frames.resize(seq.groundtruth.size());
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    seq.frames[t] = {seq.id, t, fmt::format("frames/{:06d}.jpg", t), width, height};
  }
  return seq;
}

namespace {

// Integer hash; the texture does not depend on any generator state.
std::uint32_t mix(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  std::uint32_t h = a * 0x9E3779B1u ^ (b + 0x7F4A7C15u) * 0x85EBCA77u ^ (c + 0x165667B1u) * 0xC2B2AE3Du;
  h ^= h >> 15;
  h *= 0x2C1B3C6Du;
  h ^= h >> 12;
  h *= 0x297A2D39u;
  h ^= h >> 15;
  return h;
}

struct Canvas {
  int width, height;
  std::vector<std::uint8_t> rgb;
  Canvas(int w, int h) : width(w), height(h), rgb(std::size_t(w) * h * 3) {}
  void set(int x, int y, int r, int g, int b) {
    const std::size_t i = (std::size_t(y) * width + x) * 3;
    rgb[i] = static_cast<std::uint8_t>(std::clamp(r, 0, 255));
    rgb[i + 1] = static_cast<std::uint8_t>(std::clamp(g, 0, 255));
    rgb[i + 2] = static_cast<std::uint8_t>(std::clamp(b, 0, 255));
  }
};

struct FrameSpec {
  Region box;
  int scene = 0;           // background texture id
  bool flat = false;       // untextured target
  double cast[3] = {1, 1, 1};
};

Canvas render(int width, int height, const FrameSpec& f) {
  Canvas c(width, height);
  const int base = 60 + 30 * (f.scene % 4);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int n = static_cast<int>(mix(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                                         static_cast<std::uint32_t>(f.scene)) % 97) - 48;
      const int v = base + n;
      c.set(x, y, static_cast<int>((v + 6) * f.cast[0]), static_cast<int>(v * f.cast[1]),
            static_cast<int>((v - 6) * f.cast[2]));
    }
  }
  if (f.box) {
    const int x0 = std::max(0, static_cast<int>(std::floor(f.box->x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(f.box->y)));
    const int x1 = std::min(width, static_cast<int>(std::ceil(f.box->right())));
    const int y1 = std::min(height, static_cast<int>(std::ceil(f.box->bottom())));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const bool dark = !f.flat && (((x - x0) / 2 + (y - y0) / 2) % 2 == 0);
        const int v = dark ? 20 : 230;
        c.set(x, y, static_cast<int>(v * f.cast[0]), static_cast<int>((f.flat ? 140 : v) * f.cast[1]),
              static_cast<int>((f.flat ? 90 : v) * f.cast[2]));
      }
    }
  }
  return c;
}

struct PlannedSequence {
  std::string id;
  std::string dataset;
  int width, height;
  std::vector<FrameSpec> frames;
  // Frames on which the "drifter" tracker loses the target.
  std::vector<bool> hard;
};

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

PlannedSequence plan_alpha() {
  PlannedSequence p{"alpha", "synth-a", 64, 48, {}, {}};
  const int n = 240;
  for (int t = 0; t < n; ++t) {
    FrameSpec f;
    f.scene = 0;
    f.cast[0] = 1.08;
    f.cast[2] = 0.94;
    double w = 12, h = 16;
    double cx = 32 + std::round(10 * std::sin(t / 25.0));
    double cy = 24;
    if (t >= 60 && t < 180) {
      w = 30;
      h = 7;
    }
    if (t >= 200 && t < 220) cx += (t % 2 == 0) ? 9 : -9;
    const double x = clampd(std::round(cx - w / 2), 0, p.width - w);
    const double y = clampd(std::round(cy - h / 2), 0, p.height - h);
    f.box = BoundingBox{x, y, w, h};
    p.frames.push_back(f);
    p.hard.push_back((t >= 100 && t < 130) || (t >= 200 && t < 220));
  }
  return p;
}

PlannedSequence plan_beta() {
  PlannedSequence p{"beta", "synth-a", 64, 48, {}, {}};
  const int n = 200;
  for (int t = 0; t < n; ++t) {
    FrameSpec f;
    f.scene = 1;
    f.cast[0] = 1.06;
    f.cast[2] = 0.95;
    if (t < 50) {
      f.cast[0] = 1.3;
      f.cast[1] = 0.85;
      f.cast[2] = 0.55;
    }
    const bool cuts = t >= 50 && t < 170;
    if (cuts) f.scene = 1 + (t % 3);
    const double w = 14, h = 12;
    const double x = std::round(20 + 14 * (t % 60) / 60.0);
    const double y = 18;
    if (!(t >= 120 && t < 130)) f.box = BoundingBox{x, y, w, h};
    p.frames.push_back(f);
    p.hard.push_back(cuts && t % 3 == 0);
  }
  return p;
}

PlannedSequence plan_gamma() {
  PlannedSequence p{"gamma", "synth-b", 48, 36, {}, {}};
  const int n = 180;
  for (int t = 0; t < n; ++t) {
    FrameSpec f;
    f.scene = 5;
    f.cast[0] = 1.05;
    f.cast[2] = 0.96;
    f.flat = t >= 20 && t < 160;
    const double x = 14 + std::round(6 * std::sin(t / 30.0));
    f.box = BoundingBox{x, 12, 12, 10};
    p.frames.push_back(f);
    p.hard.push_back(t >= 60 && t < 100);
  }
  return p;
}

std::string box_row(const BoundingBox& b) {
  return fmt::format("{},{},{},{}\n", text::shortest(b.x), text::shortest(b.y),
                     text::shortest(b.w), text::shortest(b.h));
}

}  // namespace

FixtureCorpus write_fixture_corpus(const fs::path& out) {
  FixtureCorpus corpus;
  corpus.root = out;
  corpus.manifest = out / "manifest.json";
  corpus.trackers = {"drifter", "offset", "oracle"};
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  // Jitter of the drifter tracker; mt19937_64 output is fixed by the standard.
  std::mt19937_64 rng(20260401);
  for (const PlannedSequence& p : {plan_alpha(), plan_beta(), plan_gamma()}) {
    const fs::path dir = out / p.id;
    fs::create_directories(dir / "frames");
    std::vector<Region> gt;
    for (std::size_t t = 0; t < p.frames.size(); ++t) {
      const Canvas c = render(p.width, p.height, p.frames[t]);
      write_ppm(dir / "frames" / fmt::format("{:06d}.ppm", t), p.width, p.height, c.rgb);
      gt.push_back(p.frames[t].box);
    }
    Sequence seq = make_box_sequence(p.id, gt, p.width, p.height, p.dataset);
    write_canonical(seq, dir);
    entries.push_back({{"id", p.id}, {"dir", p.id}, {"format", "canonical"}, {"dataset", p.dataset}});
    corpus.sequences.push_back(p.id);

    std::string oracle, offset, drifter;
    for (std::size_t t = 0; t < gt.size(); ++t) {
      const std::uint64_t r = rng();
      if (!gt[t]) {
        oracle += "absent\n";
        offset += "absent\n";
        drifter += "absent\n";
        continue;
      }
      const BoundingBox& b = *gt[t];
      oracle += box_row(b);
      offset += box_row({b.x + 3, b.y + 4, b.w, b.h});
      const double jx = static_cast<double>(r % 3) - 1;
      const double jy = static_cast<double>((r >> 8) % 3) - 1;
      if (p.hard[t]) {
        drifter += box_row({b.x + 2 * b.w, b.y + jy, b.w, b.h});
      } else {
        drifter += box_row({b.x + jx, b.y + jy, b.w, b.h});
      }
    }
    text::write_file(out / "replays" / "oracle" / (p.id + ".csv"), oracle);
    text::write_file(out / "replays" / "offset" / (p.id + ".csv"), offset);
    text::write_file(out / "replays" / "drifter" / (p.id + ".csv"), drifter);
  }
  nlohmann::ordered_json manifest = {
      {"schema", 1}, {"environment", "synthetic"}, {"kind", "normal"}, {"sequences", entries}};
  text::write_file(corpus.manifest, manifest.dump(2) + "\n");
  return corpus;
}

}  // namespace sotverse
