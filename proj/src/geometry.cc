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

#include "sotverse/geometry.h"

#include <algorithm>
#include <cmath>

#include "sotverse/errors.h"

namespace sotverse {

double BoundingBox::scale() const { return std::sqrt(w * h); }

double iou(const BoundingBox& a, const BoundingBox& b) {
  // Areas come from the same edge arithmetic as the intersection so that
  // iou(a, a) is exactly 1.
  const double a_w = a.right() - a.x, a_h = a.bottom() - a.y;
  const double b_w = b.right() - b.x, b_h = b.bottom() - b.y;
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a_w * a_h + b_w * b_h - inter;
  if (uni <= 0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const BoundingBox& p, const BoundingBox& g) {
  return std::hypot(p.cx() - g.cx(), p.cy() - g.cy());
}

double normalized_center_distance(const BoundingBox& p, const BoundingBox& g) {
  if (!g.valid()) {
    throw DomainError("normalized_center_distance: ground truth has zero size");
  }
  return std::hypot((p.cx() - g.cx()) / g.w, (p.cy() - g.cy()) / g.h);
}

namespace {
void require_present(const Region& a, const Region& b, const char* op) {
  if (!a || !b) {
    throw DomainError(std::string(op) + ": absent operand");
  }
}
}  // namespace

double iou(const Region& a, const Region& b) {
  require_present(a, b, "iou");
  return iou(*a, *b);
}

double center_distance(const Region& p, const Region& g) {
  require_present(p, g, "center_distance");
  return center_distance(*p, *g);
}

double normalized_center_distance(const Region& p, const Region& g) {
  require_present(p, g, "normalized_center_distance");
  return normalized_center_distance(*p, *g);
}

}  // namespace sotverse
