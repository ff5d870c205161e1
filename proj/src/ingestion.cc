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

#include "sotverse/ingestion.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/image.h"

namespace sotverse {

namespace fs = std::filesystem;
using nlohmann::json;

SourceFormat parse_source_format(std::string_view tag) {
  if (tag == "canonical") return SourceFormat::kCanonical;
  if (tag == "otb") return SourceFormat::kOtb;
  if (tag == "vot") return SourceFormat::kVot;
  if (tag == "got10k") return SourceFormat::kGot10k;
  if (tag == "lasot") return SourceFormat::kLasot;
  throw ConfigError(fmt::format("unknown sequence format '{}'", tag));
}

std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::kCanonical: return "canonical";
    case SourceFormat::kOtb: return "otb";
    case SourceFormat::kVot: return "vot";
    case SourceFormat::kGot10k: return "got10k";
    case SourceFormat::kLasot: return "lasot";
  }
  return "canonical";
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  static const std::set<std::string> kExt = {".jpg", ".jpeg", ".png", ".ppm",
                                             ".pgm", ".bmp", ".webp", ".tif",
                                             ".tiff"};
  return kExt.count(ext) > 0;
}

// Image files of `dir`, sorted by name, as paths relative to `root`.
std::vector<std::string> list_images(const fs::path& root, const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  const fs::path rel = fs::relative(dir, root);
  for (auto& n : names) {
    n = (rel == "." ? fs::path(n) : rel / n).generic_string();
  }
  return names;
}

bool is_nan_token(std::string_view t) {
  if (t.size() != 3) return false;
  return std::tolower(static_cast<unsigned char>(t[0])) == 'n' &&
         std::tolower(static_cast<unsigned char>(t[1])) == 'a' &&
         std::tolower(static_cast<unsigned char>(t[2])) == 'n';
}

// Parsed row: nullopt when the source marks the frame empty (NaN or zeros).
struct RowParse {
  Region box;
  bool empty_marker = false;
};

RowParse parse_box_row(std::string_view line, const std::string& where,
                       bool allow_polygon) {
  const auto fields = text::split_fields(line);
  if (fields.empty()) return {std::nullopt, true};
  if (std::any_of(fields.begin(), fields.end(), is_nan_token)) {
    return {std::nullopt, true};
  }
  std::vector<double> v;
  for (auto f : fields) {
    auto d = text::parse_double(f);
    if (!d) throw LoadError(where, fmt::format("unparsable value '{}'", f));
    v.push_back(*d);
  }
  BoundingBox b;
  if (v.size() == 4) {
    b = {v[0], v[1], v[2], v[3]};
  } else if (allow_polygon && v.size() == 8) {
    const double x0 = std::min({v[0], v[2], v[4], v[6]});
    const double x1 = std::max({v[0], v[2], v[4], v[6]});
    const double y0 = std::min({v[1], v[3], v[5], v[7]});
    const double y1 = std::max({v[1], v[3], v[5], v[7]});
    b = {x0, y0, x1 - x0, y1 - y0};
  } else {
    throw LoadError(where, fmt::format("expected 4{} values, got {}",
                                       allow_polygon ? " or 8" : "", v.size()));
  }
  if (b.w == 0 && b.h == 0 && b.x == 0 && b.y == 0) return {std::nullopt, true};
  return {b, false};
}

std::vector<bool> read_flag_lines(const fs::path& path) {
  std::vector<bool> flags;
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (auto tok : text::split_fields(lines[i])) {
      const auto v = text::parse_int(tok);
      if (!v || (*v != 0 && *v != 1)) {
        throw LoadError(fmt::format("{}:{}", path.string(), i + 1),
                        fmt::format("expected 0 or 1, got '{}'", tok));
      }
      flags.push_back(*v == 1);
    }
  }
  return flags;
}

struct RawSequence {
  std::vector<std::string> lines;  // groundtruth rows
  fs::path gt_path;
  std::vector<bool> absent;        // may be empty
  std::vector<std::string> images;
  std::optional<std::size_t> stub_frames;
  int width = 0;
  int height = 0;
  bool allow_polygon = false;
  // When true, an empty marker row (NaN / all zeros) means absent.
  bool empty_row_is_absent = false;
};

Sequence assemble(RawSequence raw, const fs::path& root, std::string id,
                  std::string dataset) {
  Sequence seq;
  seq.id = std::move(id);
  seq.dataset_id = std::move(dataset);
  seq.root = root;

  const std::size_t n = raw.lines.size();
  if (n == 0) throw LoadError(raw.gt_path.string(), "no groundtruth rows");
  const std::size_t frame_count =
      raw.images.empty() ? raw.stub_frames.value_or(0) : raw.images.size();
  if (raw.images.empty() && !raw.stub_frames) {
    throw LoadError(root.string(), "no frame images and no frame count in meta.json");
  }
  if (frame_count != n) {
    throw LoadError(root.string(),
                    fmt::format("{} groundtruth rows but {} frames", n, frame_count));
  }
  if (!raw.absent.empty() && raw.absent.size() != n) {
    throw LoadError(root.string(), fmt::format("{} absence flags for {} frames",
                                               raw.absent.size(), n));
  }

  if (raw.width <= 0 || raw.height <= 0) {
    if (raw.images.empty()) {
      throw LoadError(root.string(), "frame resolution unknown (add meta.json)");
    }
    std::tie(raw.width, raw.height) = probe_resolution(root / raw.images.front());
  }

  seq.frames.resize(n);
  seq.groundtruth.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    FrameRef& f = seq.frames[t];
    f.sequence_id = seq.id;
    f.index = t;
    f.image_path = raw.images.empty() ? fmt::format("frames/{:06d}.jpg", t)
                                      : raw.images[t];
    f.width = raw.width;
    f.height = raw.height;

    const std::string where = fmt::format("{}:{}", raw.gt_path.string(), t + 1);
    const bool flagged = !raw.absent.empty() && raw.absent[t];
    if (flagged) continue;  // row content is irrelevant for absent frames
    RowParse row = parse_box_row(raw.lines[t], where, raw.allow_polygon);
    if (row.empty_marker) {
      if (!raw.empty_row_is_absent) {
        throw LoadError(where, "empty box on a frame not marked absent");
      }
      continue;
    }
    if (!row.box->valid()) {
      throw LoadError(where, "degenerate ground truth (w or h <= 0)");
    }
    seq.groundtruth[t] = row.box;
  }
  if (!seq.groundtruth.front()) {
    throw LoadError(raw.gt_path.string() + ":1", "first frame target is absent");
  }
  return seq;
}

void read_meta(const fs::path& dir, RawSequence& raw) {
  const fs::path meta = dir / "meta.json";
  if (!fs::exists(meta)) return;
  try {
    const json doc = json::parse(text::read_file(meta));
    raw.width = doc.value("width", 0);
    raw.height = doc.value("height", 0);
    if (doc.contains("frames")) raw.stub_frames = doc.at("frames").get<std::size_t>();
  } catch (const json::exception& e) {
    throw LoadError(meta.string(), e.what());
  }
}

RawSequence read_canonical(const fs::path& dir) {
  RawSequence raw;
  raw.gt_path = dir / "groundtruth.csv";
  raw.lines = text::read_lines(raw.gt_path);
  if (fs::exists(dir / "absence.csv")) raw.absent = read_flag_lines(dir / "absence.csv");
  if (fs::is_directory(dir / "frames")) raw.images = list_images(dir, dir / "frames");
  read_meta(dir, raw);
  return raw;
}

}  // namespace

Sequence load_sequence(const fs::path& dir, SourceFormat format, std::string id,
                       std::string dataset) {
  if (!fs::is_directory(dir)) throw LoadError(dir.string(), "directory not found");
  if (id.empty()) id = dir.filename().string();
  RawSequence raw;
  switch (format) {
    case SourceFormat::kCanonical:
      raw = read_canonical(dir);
      break;
    case SourceFormat::kOtb:
      raw.gt_path = dir / "groundtruth_rect.txt";
      raw.lines = text::read_lines(raw.gt_path);
      if (fs::is_directory(dir / "img")) raw.images = list_images(dir, dir / "img");
      read_meta(dir, raw);
      break;
    case SourceFormat::kVot:
      raw.gt_path = dir / "groundtruth.txt";
      raw.lines = text::read_lines(raw.gt_path);
      raw.allow_polygon = true;
      raw.empty_row_is_absent = true;
      raw.images = list_images(dir, fs::is_directory(dir / "color") ? dir / "color" : dir);
      read_meta(dir, raw);
      break;
    case SourceFormat::kGot10k:
      raw.gt_path = dir / "groundtruth.txt";
      raw.lines = text::read_lines(raw.gt_path);
      raw.empty_row_is_absent = true;
      if (fs::exists(dir / "absence.label")) raw.absent = read_flag_lines(dir / "absence.label");
      raw.images = list_images(dir, dir);
      read_meta(dir, raw);
      break;
    case SourceFormat::kLasot: {
      raw.gt_path = dir / "groundtruth.txt";
      raw.lines = text::read_lines(raw.gt_path);
      raw.empty_row_is_absent = true;
      std::vector<bool> occ, oov;
      if (fs::exists(dir / "full_occlusion.txt")) occ = read_flag_lines(dir / "full_occlusion.txt");
      if (fs::exists(dir / "out_of_view.txt")) oov = read_flag_lines(dir / "out_of_view.txt");
      const std::size_t n = std::max(occ.size(), oov.size());
      if ((!occ.empty() && occ.size() != n) || (!oov.empty() && oov.size() != n)) {
        throw LoadError(dir.string(), "occlusion and out-of-view flag counts differ");
      }
      raw.absent.assign(n, false);
      for (std::size_t t = 0; t < n; ++t) {
        raw.absent[t] = (!occ.empty() && occ[t]) || (!oov.empty() && oov[t]);
      }
      if (fs::is_directory(dir / "img")) raw.images = list_images(dir, dir / "img");
      read_meta(dir, raw);
      break;
    }
  }
  return assemble(std::move(raw), dir, std::move(id), std::move(dataset));
}

std::string format_groundtruth_csv(const Sequence& seq) {
  std::string out;
  for (const Region& r : seq.groundtruth) {
    if (r) {
      out += fmt::format("{},{},{},{}\n", text::shortest(r->x), text::shortest(r->y),
                         text::shortest(r->w), text::shortest(r->h));
    } else {
      out += "0,0,0,0\n";
    }
  }
  return out;
}

void write_canonical(const Sequence& seq, const fs::path& dir, bool copy_frames) {
  fs::create_directories(dir);
  text::write_file(dir / "groundtruth.csv", format_groundtruth_csv(seq));
  if (seq.absent_count() > 0) {
    std::string flags;
    for (const Region& r : seq.groundtruth) flags += r ? "0\n" : "1\n";
    text::write_file(dir / "absence.csv", flags);
  } else if (fs::exists(dir / "absence.csv")) {
    fs::remove(dir / "absence.csv");
  }
  json meta = {{"width", seq.frames.front().width},
               {"height", seq.frames.front().height},
               {"frames", seq.size()}};
  text::write_file(dir / "meta.json", meta.dump(2) + "\n");
  if (copy_frames) {
    fs::create_directories(dir / "frames");
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const fs::path src = seq.image_file(t);
      if (!fs::exists(src)) continue;
      const fs::path dst =
          dir / "frames" / fmt::format("{:06d}{}", t, src.extension().string());
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
    }
  }
}

Manifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw LoadError("manifest", e.what());
  }
  Manifest m;
  try {
    if (!doc.is_object() || doc.value("schema", 0) != 1) {
      throw LoadError("manifest", "schema must be 1");
    }
    m.environment = doc.at("environment").get<std::string>();
    m.kind = parse_environment_kind(doc.value("kind", "normal"));
    std::set<std::string> ids;
    for (const auto& e : doc.at("sequences")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      if (entry.id.empty() || entry.id.find_first_of("/\\@") != std::string::npos) {
        throw LoadError("sequence '" + entry.id + "'", "invalid sequence id");
      }
      if (!ids.insert(entry.id).second) {
        throw LoadError("sequence '" + entry.id + "'", "duplicate sequence id");
      }
      fs::path dir = e.value("dir", entry.id);
      entry.dir = dir.is_absolute() ? dir : base_dir / dir;
      entry.format = parse_source_format(e.value("format", "canonical"));
      entry.dataset = e.value("dataset", m.environment);
      m.entries.push_back(std::move(entry));
    }
    if (m.entries.empty()) throw LoadError("manifest", "no sequences");
    if (doc.contains("provenance")) {
      m.provenance = doc.at("provenance").get<std::vector<std::string>>();
    } else {
      for (const auto& e : m.entries) {
        if (std::find(m.provenance.begin(), m.provenance.end(), e.dataset) ==
            m.provenance.end()) {
          m.provenance.push_back(e.dataset);
        }
      }
    }
    if (doc.contains("expected")) {
      const json& ex = doc.at("expected");
      ExpectedStats s;
      auto opt = [&](const char* key, std::optional<std::size_t>& dst) {
        if (ex.contains(key)) dst = ex.at(key).get<std::size_t>();
      };
      opt("videos", s.videos);
      opt("min_frames", s.min_frames);
      opt("mean_frames", s.mean_frames);
      opt("max_frames", s.max_frames);
      if (ex.contains("total_frames")) {
        const json& t = ex.at("total_frames");
        auto [v, tol] = t.is_string() ? parse_rounded_count(t.get<std::string>())
                                      : std::pair{t.get<double>(), 0.0};
        s.total_frames = v;
        s.total_tolerance = tol;
      }
      m.expected = s;
    }
  } catch (const json::exception& e) {
    throw LoadError("manifest", e.what());
  } catch (const ConfigError& e) {
    throw LoadError("manifest", e.what());
  }
  return m;
}

Environment load_manifest(const fs::path& path) {
  const Manifest m = parse_manifest(text::read_file(path), path.parent_path());
  for (const auto& e : m.entries) {
    if (!fs::is_directory(e.dir)) {
      throw LoadError("sequence '" + e.id + "'",
                      "directory not found: " + e.dir.string());
    }
  }
  Environment env;
  env.id = m.environment;
  env.kind = m.kind;
  env.provenance = m.provenance;
  env.sequences.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    try {
      env.sequences.push_back(load_sequence(e.dir, e.format, e.id, e.dataset));
    } catch (const LoadError& err) {
      throw LoadError("sequence '" + e.id + "'", err.what());
    }
  }
  if (m.expected) check_expected(dataset_summary(env), *m.expected, env.id);
  return env;
}

double DatasetSummary::mean() const {
  return count == 0 ? 0.0 : static_cast<double>(total_frames) / static_cast<double>(count);
}

std::size_t DatasetSummary::mean_rounded() const {
  if (count == 0) return 0;
  const std::size_t q = total_frames / count;
  const std::size_t r = total_frames % count;
  if (2 * r > count) return q + 1;
  if (2 * r == count) return q % 2 == 0 ? q : q + 1;
  return q;
}

DatasetSummary dataset_summary(const Environment& env) {
  if (env.sequences.empty()) {
    throw DomainError("dataset_summary: environment " + env.id + " is empty");
  }
  DatasetSummary s;
  s.count = env.sequences.size();
  s.min_frames = env.sequences.front().size();
  for (const Sequence& seq : env.sequences) {
    s.min_frames = std::min(s.min_frames, seq.size());
    s.max_frames = std::max(s.max_frames, seq.size());
    s.total_frames += seq.size();
    s.absent_frames += seq.absent_count();
  }
  return s;
}

void check_expected(const DatasetSummary& s, const ExpectedStats& ex,
                    const std::string& environment) {
  std::vector<std::string> bad;
  auto cmp = [&](const char* name, const std::optional<std::size_t>& want,
                 std::size_t got) {
    if (want && *want != got) bad.push_back(fmt::format("{} expected {} got {}", name, *want, got));
  };
  cmp("videos", ex.videos, s.count);
  cmp("min_frames", ex.min_frames, s.min_frames);
  cmp("mean_frames", ex.mean_frames, s.mean_rounded());
  cmp("max_frames", ex.max_frames, s.max_frames);
  if (ex.total_frames &&
      std::abs(static_cast<double>(s.total_frames) - *ex.total_frames) > ex.total_tolerance) {
    bad.push_back(fmt::format("total_frames expected {} (+-{}) got {}",
                              *ex.total_frames, ex.total_tolerance, s.total_frames));
  }
  if (!bad.empty()) {
    std::string msg = "statistics mismatch:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw LoadError("environment '" + environment + "'", msg);
  }
}

std::pair<double, double> parse_rounded_count(std::string_view text) {
  text = text::trim(text);
  double mult = 1;
  if (!text.empty() && (text.back() == 'K' || text.back() == 'k')) {
    mult = 1e3;
    text.remove_suffix(1);
  } else if (!text.empty() && (text.back() == 'M' || text.back() == 'm')) {
    mult = 1e6;
    text.remove_suffix(1);
  }
  const auto v = text::parse_double(text);
  if (!v) throw ConfigError(fmt::format("bad count '{}'", text));
  const auto dot = text.find('.');
  const int decimals = dot == std::string_view::npos ? 0 : int(text.size() - dot - 1);
  const double unit = mult * std::pow(10.0, -decimals);
  return {std::round(*v * mult), mult == 1 && decimals == 0 ? 0.0 : unit / 2};
}

}  // namespace sotverse
