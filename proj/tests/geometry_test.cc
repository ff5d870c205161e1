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

#include <gtest/gtest.h>

#include <cmath>

#include "sotverse/errors.h"
#include "test_util.h"

namespace sotverse {
namespace {

using testing::random_box;
using testing::uniform;

// Counts unit pixels covered by both / either box; exact for integer boxes.
double raster_iou(const BoundingBox& a, const BoundingBox& b) {
  long inter = 0, uni = 0;
  for (int y = -5; y < 60; ++y) {
    for (int x = -5; x < 60; ++x) {
      const bool in_a = x >= a.x && x < a.right() && y >= a.y && y < a.bottom();
      const bool in_b = x >= b.x && x < b.right() && y >= b.y && y < b.bottom();
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

TEST(IouTest, IdenticalBoxesGiveOne) {
  EXPECT_EQ(iou(BoundingBox{3.7, -2.1, 10.3, 0.9}, BoundingBox{3.7, -2.1, 10.3, 0.9}), 1.0);
}

TEST(IouTest, DisjointBoxesGiveZero) {
  EXPECT_EQ(iou(BoundingBox{0, 0, 10, 10}, BoundingBox{20, 20, 10, 10}), 0.0);
}

TEST(IouTest, HalfShiftGivesOneThird) {
  EXPECT_DOUBLE_EQ(iou(BoundingBox{0, 0, 10, 10}, BoundingBox{5, 0, 10, 10}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(raster_iou({0, 0, 10, 10}, {5, 0, 10, 10}), 1.0 / 3.0);
}

TEST(IouTest, TouchingEdgesDoNotOverlap) {
  EXPECT_EQ(iou(BoundingBox{0, 0, 10, 10}, BoundingBox{10, 0, 10, 10}), 0.0);
}

TEST(IouTest, MatchesRasterOracleOnIntegerBoxes) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto r = [&] { return std::floor(uniform(rng, 0, 40)); };
    const auto s = [&] { return 1 + std::floor(uniform(rng, 0, 15)); };
    const BoundingBox a{r(), r(), s(), s()};
    const BoundingBox b{r(), r(), s(), s()};
    EXPECT_NEAR(iou(a, b), raster_iou(a, b), 1e-12);
  }
}

TEST(IouTest, SymmetricOverTenThousandPairs) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const BoundingBox a = random_box(rng);
    const BoundingBox b = random_box(rng);
    const double ab = iou(a, b);
    ASSERT_EQ(ab, iou(b, a));
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0);
  }
}

TEST(IouTest, SelfOverlapIsExactlyOne) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const BoundingBox a = random_box(rng);
    ASSERT_EQ(iou(a, a), 1.0);
    ASSERT_EQ(center_distance(a, a), 0.0);
  }
}

TEST(IouTest, AbsentOperandIsDomainError) {
  const Region a = BoundingBox{0, 0, 1, 1};
  EXPECT_THROW(iou(a, Region{}), DomainError);
  EXPECT_THROW(iou(Region{}, a), DomainError);
  EXPECT_THROW(center_distance(Region{}, a), DomainError);
  EXPECT_THROW(normalized_center_distance(a, Region{}), DomainError);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
}

TEST(CenterDistanceTest, Examples) {
  EXPECT_EQ(center_distance(BoundingBox{4, 4, 2, 2}, BoundingBox{4, 4, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(center_distance(BoundingBox{0, 0, 10, 10}, BoundingBox{3, 4, 10, 10}), 5.0);
  EXPECT_DOUBLE_EQ(center_distance(BoundingBox{0, 0, 2, 2}, BoundingBox{0, 0, 4, 4}),
                   std::sqrt(2.0));
}

TEST(NormalizedDistanceTest, Examples) {
  EXPECT_EQ(normalized_center_distance(BoundingBox{1, 2, 3, 4}, BoundingBox{1, 2, 3, 4}), 0.0);
  const BoundingBox g{7, 3, 16, 9};
  EXPECT_DOUBLE_EQ(normalized_center_distance(BoundingBox{g.x + g.w, g.y, g.w, g.h}, g), 1.0);
  // p centred at (15, 10), g = (0, 0, 10, 20) centred at (5, 10).
  EXPECT_DOUBLE_EQ(normalized_center_distance(BoundingBox{10, 5, 10, 10}, BoundingBox{0, 0, 10, 20}),
                   1.0);
}

TEST(InvarianceTest, TranslationLeavesOverlapAndDistance) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const BoundingBox a = random_box(rng);
    const BoundingBox b = random_box(rng);
    const double dx = uniform(rng, -300, 300), dy = uniform(rng, -300, 300);
    const BoundingBox at{a.x + dx, a.y + dy, a.w, a.h};
    const BoundingBox bt{b.x + dx, b.y + dy, b.w, b.h};
    const double d0 = center_distance(a, b), d1 = center_distance(at, bt);
    // Coordinates up to ~800 carry ~1e-13 absolute rounding after the shift.
    ASSERT_NEAR(d1, d0, 1e-12 * std::max(1.0, d0));
    ASSERT_NEAR(iou(at, bt), iou(a, b), 1e-12);
  }
}

TEST(InvarianceTest, ScalingMultipliesDistanceAndKeepsNormalized) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const BoundingBox a = random_box(rng);
    const BoundingBox b = random_box(rng);
    const double k = uniform(rng, 0.05, 20);
    const BoundingBox ak{a.x * k, a.y * k, a.w * k, a.h * k};
    const BoundingBox bk{b.x * k, b.y * k, b.w * k, b.h * k};
    const double d = center_distance(a, b);
    ASSERT_NEAR(center_distance(ak, bk), k * d, 1e-9 * std::max(1.0, k * d));
    const double n = normalized_center_distance(a, b);
    ASSERT_NEAR(normalized_center_distance(ak, bk), n, 1e-9 * std::max(1.0, n));
  }
}

}  // namespace
}  // namespace sotverse
