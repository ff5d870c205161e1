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

#include <array>
#include <functional>
#include <map>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sotverse/geometry.h"
#include "sotverse/image.h"
#include "sotverse/model.h"

namespace sotverse {

// Column order of attributes.csv and flags.csv.
enum class AttributeId : std::size_t {
  kRatio,
  kRelativeScale,
  kIllumination,
  kBlur,
  kDeltaRatio,
  kDeltaRelativeScale,
  kDeltaIllumination,
  kDeltaBlur,
  kFastMotion,
  kCorrcoef,
};

inline constexpr std::size_t kAttributeCount = 10;

const std::array<std::string_view, kAttributeCount>& attribute_names();
std::string_view to_string(AttributeId id);
// Throws ConfigError for an unknown name.
AttributeId parse_attribute(std::string_view name);
inline std::size_t index_of(AttributeId id) { return static_cast<std::size_t>(id); }

// Ten per-frame values; nullopt means unavailable.
struct AttributeRecord {
  std::array<std::optional<double>, kAttributeCount> values{};

  std::optional<double>& operator[](AttributeId id) { return values[index_of(id)]; }
  const std::optional<double>& operator[](AttributeId id) const {
    return values[index_of(id)];
  }
  friend bool operator==(const AttributeRecord&, const AttributeRecord&) = default;
};

enum class AnnotationMode { kFull, kAnnotationOnly };

std::string_view to_string(AnnotationMode m);
AnnotationMode parse_annotation_mode(std::string_view text);

struct AttributeTable {
  std::string sequence_id;
  AnnotationMode mode = AnnotationMode::kFull;
  std::vector<AttributeRecord> records;

  std::size_t size() const { return records.size(); }
  AttributeTable slice(std::size_t start, std::size_t end) const;
};

// Attribute tables keyed by sequence id.
using AttributeTableMap = std::map<std::string, AttributeTable, std::less<>>;

struct AnnotateOptions {
  // Norm order of the Shades-of-Gray illuminant estimate.
  double sog_norm = 6.0;
};

struct StaticAttributes {
  double ratio = 0;
  double relative_scale = 0;
  std::optional<double> illumination;
  std::optional<double> blur;
};

// `image` may be null (annotation-only). Boxes leaving the frame are clamped
// for the blur crop with a warning. Throws DomainError when w or h <= 0 or
// the image size disagrees with the frame.
StaticAttributes static_attributes(const BoundingBox& box, const FrameRef& frame,
                                   const RgbImage* image,
                                   const AnnotateOptions& opts = {});

// Per-channel multiplier mapping the estimated illuminant to neutral; a
// neutral image maps to (1, 1, 1). Image channels must lie in [0, 1].
std::array<double, 3> shades_of_gray_correction(const RgbImage& image, double p);

// Distance between the correction vector and (1, 1, 1).
double illumination_deviation(const RgbImage& image, double p);

// Variance of the 4-neighbour Laplacian over the valid region; nullopt for
// grids smaller than 3x3.
std::optional<double> laplacian_sharpness(const GrayImage& gray);

// Pearson correlation of two grids; `b` is resampled to `a`'s size first.
// A constant operand yields 1 when the grids are equal and 0 otherwise.
double pearson_corrcoef(const GrayImage& a, const GrayImage& b);

struct DynamicAttributes {
  double delta_ratio = 0;
  double delta_relative_scale = 0;
  std::optional<double> delta_illumination;
  std::optional<double> delta_blur;
  double fast_motion = 0;
  std::optional<double> corrcoef;
};

struct FrameObservation {
  const BoundingBox* box = nullptr;
  const StaticAttributes* stat = nullptr;
  const GrayImage* gray = nullptr;  // full frame, may be null
};

DynamicAttributes dynamic_attributes(const FrameObservation& prev,
                                     const FrameObservation& curr);

// One record per frame; absent-target frames get all-unavailable records and
// deltas need a present predecessor. Full mode decodes every frame and throws
// LoadError naming the frame index when an image is unreadable.
AttributeTable annotate_sequence(const Sequence& seq, AnnotationMode mode,
                                 const AnnotateOptions& opts = {});

std::string format_attribute_csv(const AttributeTable& table);
AttributeTable parse_attribute_csv(std::string_view csv, std::string sequence_id);

void write_attribute_table(const AttributeTable& table,
                           const std::filesystem::path& path);
AttributeTable read_attribute_table(const std::filesystem::path& path,
                                    std::string sequence_id);

}  // namespace sotverse
