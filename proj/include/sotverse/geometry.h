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

#include <optional>

namespace sotverse {

// Axis-aligned target region in pixels: (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  // Geometric mean of the sides.
  double scale() const;
  bool valid() const { return w > 0 && h > 0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// A per-frame region that may be absent (target not visible). An absent
// region carries no coordinates.
using Region = std::optional<BoundingBox>;

double iou(const BoundingBox& a, const BoundingBox& b);
double center_distance(const BoundingBox& p, const BoundingBox& g);
// Center offset divided per axis by the ground-truth width and height.
double normalized_center_distance(const BoundingBox& p, const BoundingBox& g);

// Region overloads throw DomainError when either operand is absent.
double iou(const Region& a, const Region& b);
double center_distance(const Region& p, const Region& g);
double normalized_center_distance(const Region& p, const Region& g);

}  // namespace sotverse
