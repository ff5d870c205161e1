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

#include "sotverse/attributes.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>

#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/log.h"

namespace sotverse {

namespace {
std::mutex g_sink_mu;
WarningSink g_sink = [](std::string_view msg) {
  std::cerr << "warning: " << msg << '\n';
};
}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mu);
  g_sink = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_sink_mu);
  if (g_sink) g_sink(message);
}

const std::array<std::string_view, kAttributeCount>& attribute_names() {
  static constexpr std::array<std::string_view, kAttributeCount> kNames = {
      "ratio",         "relative_scale",       "illumination",
      "blur",          "delta_ratio",          "delta_relative_scale",
      "delta_illumination", "delta_blur",      "fast_motion",
      "corrcoef"};
  return kNames;
}

std::string_view to_string(AttributeId id) { return attribute_names()[index_of(id)]; }

AttributeId parse_attribute(std::string_view name) {
  const auto& names = attribute_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<AttributeId>(i);
  }
  throw ConfigError(fmt::format("unknown attribute '{}'", name));
}

std::string_view to_string(AnnotationMode m) {
  return m == AnnotationMode::kFull ? "full" : "annotation-only";
}

AnnotationMode parse_annotation_mode(std::string_view text) {
  if (text == "full") return AnnotationMode::kFull;
  if (text == "annotation-only") return AnnotationMode::kAnnotationOnly;
  throw ConfigError(fmt::format("unknown annotation mode '{}'", text));
}

AttributeTable AttributeTable::slice(std::size_t start, std::size_t end) const {
  if (start >= end || end > records.size()) {
    throw DomainError(fmt::format("{}: invalid attribute slice [{}, {})",
                                  sequence_id, start, end));
  }
  AttributeTable out;
  out.sequence_id = unit_id(sequence_id, start, end);
  out.mode = mode;
  out.records.assign(records.begin() + static_cast<std::ptrdiff_t>(start),
                     records.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

std::array<double, 3> shades_of_gray_correction(const RgbImage& image, double p) {
  if (image.empty()) throw DomainError("shades_of_gray_correction: empty image");
  if (!(p >= 1)) throw DomainError("shades_of_gray_correction: norm order must be >= 1");
  const std::size_t pixels = std::size_t(image.width) * image.height;
  std::array<double, 3> illum{};
  for (int c = 0; c < 3; ++c) {
    double sum = 0;
    for (std::size_t i = 0; i < pixels; ++i) {
      sum += std::pow(static_cast<double>(image.data[i * 3 + c]), p);
    }
    illum[c] = std::pow(sum / static_cast<double>(pixels), 1.0 / p);
    if (illum[c] <= 0) {
      warn(fmt::format("shades_of_gray_correction: channel {} is zero", c));
      illum[c] = 1e-6;
    }
  }
  // Inverse illuminant scaled to length sqrt(3).
  std::array<double, 3> inv{1 / illum[0], 1 / illum[1], 1 / illum[2]};
  const double scale =
      std::sqrt(3.0) / std::sqrt(inv[0] * inv[0] + inv[1] * inv[1] + inv[2] * inv[2]);
  return {inv[0] * scale, inv[1] * scale, inv[2] * scale};
}

double illumination_deviation(const RgbImage& image, double p) {
  const auto c = shades_of_gray_correction(image, p);
  // Equal channels give an exactly neutral image.
  if (c[0] == c[1] && c[1] == c[2]) return 0.0;
  return std::sqrt((c[0] - 1) * (c[0] - 1) + (c[1] - 1) * (c[1] - 1) +
                   (c[2] - 1) * (c[2] - 1));
}

std::optional<double> laplacian_sharpness(const GrayImage& g) {
  if (g.width < 3 || g.height < 3) return std::nullopt;
  const int vw = g.width - 2, vh = g.height - 2;
  std::vector<double> resp;
  resp.reserve(std::size_t(vw) * vh);
  for (int y = 1; y <= vh; ++y) {
    for (int x = 1; x <= vw; ++x) {
      const double c = g.at(x, y);
      resp.push_back((c - g.at(x - 1, y)) + (c - g.at(x + 1, y)) +
                     (c - g.at(x, y - 1)) + (c - g.at(x, y + 1)));
    }
  }
  double mean = 0;
  for (double r : resp) mean += r;
  mean /= static_cast<double>(resp.size());
  double var = 0;
  for (double r : resp) var += (r - mean) * (r - mean);
  return var / static_cast<double>(resp.size());
}

double pearson_corrcoef(const GrayImage& a, const GrayImage& b_in) {
  if (a.size() < 2) throw DomainError("pearson_corrcoef: need at least 2 pixels");
  const GrayImage b = resample_nearest(b_in, a.width, a.height);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a.data[i];
    mb += b.data[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a.data[i] - ma, db = b.data[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0 || vb == 0) {
    const bool equal = a.data == b.data;
    warn("pearson_corrcoef: constant frame, correlation undefined");
    return equal ? 1.0 : 0.0;
  }
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

StaticAttributes static_attributes(const BoundingBox& box, const FrameRef& frame,
                                   const RgbImage* image,
                                   const AnnotateOptions& opts) {
  if (!box.valid()) throw DomainError("static_attributes: box has w or h <= 0");
  if (frame.width <= 0 || frame.height <= 0) {
    throw DomainError("static_attributes: frame has no resolution");
  }
  StaticAttributes out;
  out.ratio = box.h / box.w;
  out.relative_scale = box.scale() / std::sqrt(double(frame.width) * frame.height);
  if (image) {
    if (image->width != frame.width || image->height != frame.height) {
      throw DomainError(fmt::format(
          "static_attributes: image is {}x{} but frame {} is {}x{}", image->width,
          image->height, frame.index, frame.width, frame.height));
    }
    out.illumination = illumination_deviation(*image, opts.sog_norm);
    const PixelRect r = covering_rect(box, image->width, image->height);
    if (r.clamped) {
      warn(fmt::format("{} frame {}: box exceeds image, clamped", frame.sequence_id,
                       frame.index));
    }
    if (r.width() >= 3 && r.height() >= 3) {
      GrayImage patch(r.width(), r.height());
      for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
          const int sx = r.x0 + x, sy = r.y0 + y;
          patch.at(x, y) = 255.0 * (0.299 * image->at(sx, sy, 0) +
                                    0.587 * image->at(sx, sy, 1) +
                                    0.114 * image->at(sx, sy, 2));
        }
      }
      out.blur = laplacian_sharpness(patch);
    }
  }
  return out;
}

DynamicAttributes dynamic_attributes(const FrameObservation& prev,
                                     const FrameObservation& curr) {
  if (!prev.box || !curr.box || !prev.stat || !curr.stat) {
    throw DomainError("dynamic_attributes: both frames need a present target");
  }
  const StaticAttributes& a = *prev.stat;
  const StaticAttributes& b = *curr.stat;
  DynamicAttributes d;
  d.delta_ratio = std::abs(b.ratio - a.ratio);
  d.delta_relative_scale = std::abs(b.relative_scale - a.relative_scale);
  if (a.illumination && b.illumination) {
    d.delta_illumination = std::abs(*b.illumination - *a.illumination);
  }
  if (a.blur && b.blur) d.delta_blur = std::abs(*b.blur - *a.blur);
  const double dist = center_distance(*curr.box, *prev.box);
  d.fast_motion = dist / std::sqrt(std::max(curr.box->scale(), prev.box->scale()));
  if (prev.gray && curr.gray) d.corrcoef = pearson_corrcoef(*prev.gray, *curr.gray);
  return d;
}

AttributeTable annotate_sequence(const Sequence& seq, AnnotationMode mode,
                                 const AnnotateOptions& opts) {
  AttributeTable table;
  table.sequence_id = seq.id;
  table.mode = mode;
  table.records.resize(seq.size());

  const bool full = mode == AnnotationMode::kFull;
  std::optional<StaticAttributes> prev_stat;
  GrayImage prev_gray;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    RgbImage image;
    GrayImage gray;
    FrameRef frame = seq.frames[t];
    if (full) {
      try {
        image = load_image(seq.image_file(t));
      } catch (const LoadError& e) {
        throw LoadError(fmt::format("{} frame {}", seq.id, t), e.what());
      }
      frame.width = image.width;
      frame.height = image.height;
      gray = to_gray(image);
    }
    const Region& box = seq.groundtruth[t];
    AttributeRecord& rec = table.records[t];
    std::optional<StaticAttributes> stat;
    if (box) {
      stat = static_attributes(*box, frame, full ? &image : nullptr, opts);
      rec[AttributeId::kRatio] = stat->ratio;
      rec[AttributeId::kRelativeScale] = stat->relative_scale;
      rec[AttributeId::kIllumination] = stat->illumination;
      rec[AttributeId::kBlur] = stat->blur;
      if (t > 0 && prev_stat && seq.groundtruth[t - 1]) {
        FrameObservation p{&*seq.groundtruth[t - 1], &*prev_stat,
                           full ? &prev_gray : nullptr};
        FrameObservation c{&*box, &*stat, full ? &gray : nullptr};
        const DynamicAttributes d = dynamic_attributes(p, c);
        rec[AttributeId::kDeltaRatio] = d.delta_ratio;
        rec[AttributeId::kDeltaRelativeScale] = d.delta_relative_scale;
        rec[AttributeId::kDeltaIllumination] = d.delta_illumination;
        rec[AttributeId::kDeltaBlur] = d.delta_blur;
        rec[AttributeId::kFastMotion] = d.fast_motion;
        rec[AttributeId::kCorrcoef] = d.corrcoef;
      }
    }
    prev_stat = stat;
    prev_gray = std::move(gray);
  }
  return table;
}

std::string format_attribute_csv(const AttributeTable& table) {
  std::string out;
  const auto& names = attribute_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  out += '\n';
  for (const AttributeRecord& rec : table.records) {
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      if (i) out += ',';
      if (rec.values[i]) out += text::sig9(*rec.values[i]);
    }
    out += '\n';
  }
  return out;
}

AttributeTable parse_attribute_csv(std::string_view csv, std::string sequence_id) {
  AttributeTable table;
  table.sequence_id = std::move(sequence_id);
  auto lines = text::split(csv, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw LoadError(table.sequence_id, "attribute table has no header");
  const auto header = text::split(text::trim(lines[0]), ',');
  const auto& names = attribute_names();
  if (header.size() != kAttributeCount ||
      !std::equal(header.begin(), header.end(), names.begin())) {
    throw LoadError(table.sequence_id + ":1", "unexpected attribute header");
  }
  bool any_image_value = false;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    std::string_view line = lines[l];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto cells = text::split(line, ',');
    if (cells.size() != kAttributeCount) {
      throw LoadError(fmt::format("{}:{}", table.sequence_id, l + 1),
                      fmt::format("expected {} cells", kAttributeCount));
    }
    AttributeRecord rec;
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      if (cells[i].empty()) continue;
      const auto v = text::parse_double(cells[i]);
      if (!v) {
        throw LoadError(fmt::format("{}:{}", table.sequence_id, l + 1),
                        fmt::format("unparsable cell '{}'", cells[i]));
      }
      rec.values[i] = *v;
    }
    any_image_value = any_image_value || rec[AttributeId::kIllumination] ||
                      rec[AttributeId::kBlur] || rec[AttributeId::kCorrcoef];
    table.records.push_back(rec);
  }
  table.mode = any_image_value ? AnnotationMode::kFull : AnnotationMode::kAnnotationOnly;
  return table;
}

void write_attribute_table(const AttributeTable& table,
                           const std::filesystem::path& path) {
  text::write_file(path, format_attribute_csv(table));
}

AttributeTable read_attribute_table(const std::filesystem::path& path,
                                    std::string sequence_id) {
  return parse_attribute_csv(text::read_file(path), std::move(sequence_id));
}

}  // namespace sotverse
