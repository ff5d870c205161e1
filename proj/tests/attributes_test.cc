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
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>

#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/ingestion.h"
#include "sotverse/log.h"
#include "sotverse/synthetic.h"
#include "test_util.h"

namespace sotverse {
namespace {

namespace fs = std::filesystem;
using A = AttributeId;

RgbImage constant_image(int w, int h, float r, float g, float b) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  }
  return img;
}

RgbImage random_image(std::mt19937_64& rng, int w, int h) {
  RgbImage img(w, h);
  for (auto& v : img.data) v = static_cast<float>(testing::below(rng, 256)) / 255.0f;
  return img;
}

FrameRef frame_of(int w, int h) { return FrameRef{"s", 0, "f.ppm", w, h}; }

TEST(AttributesTest, Names) {
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    EXPECT_EQ(index_of(parse_attribute(attribute_names()[i])), i);
  }
  EXPECT_THROW(parse_attribute("speed"), ConfigError);
  EXPECT_EQ(parse_annotation_mode("annotation-only"), AnnotationMode::kAnnotationOnly);
  EXPECT_THROW(parse_annotation_mode("partial"), ConfigError);
}

TEST(AttributesTest, StaticExamples) {
  const auto s = static_attributes({0, 0, 10, 20}, frame_of(100, 100), nullptr);
  EXPECT_DOUBLE_EQ(s.ratio, 2.0);
  EXPECT_FALSE(s.illumination);
  EXPECT_FALSE(s.blur);
  const auto full = static_attributes({0, 0, 64, 48}, frame_of(64, 48), nullptr);
  EXPECT_DOUBLE_EQ(full.relative_scale, 1.0);
  const RgbImage gray = constant_image(32, 24, 0.5f, 0.5f, 0.5f);
  const auto g = static_attributes({4, 4, 10, 10}, frame_of(32, 24), &gray);
  EXPECT_EQ(g.illumination, 0.0);
  EXPECT_EQ(g.blur, 0.0);
  EXPECT_THROW(static_attributes({0, 0, 0, 5}, frame_of(10, 10), nullptr), DomainError);
  EXPECT_THROW(static_attributes({0, 0, 5, 5}, frame_of(10, 10), &gray), DomainError);
}

TEST(AttributesTest, ClampedBoxWarnsAndTinyCropIsUnavailable) {
  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
  const RgbImage img = constant_image(20, 20, 0.2f, 0.4f, 0.6f);
  const auto s = static_attributes({15, 15, 10, 10}, frame_of(20, 20), &img);
  EXPECT_EQ(s.blur, 0.0);
  EXPECT_EQ(warnings.size(), 1u);
  const auto tiny = static_attributes({18.5, 3, 3, 3}, frame_of(20, 20), &img);
  EXPECT_FALSE(tiny.blur);  // 2 pixels wide after clamping
  set_warning_sink(nullptr);
}

TEST(AttributesTest, ShadesOfGrayExamples) {
  for (double p : {1.0, 2.0, 6.0, 12.0}) {
    const auto c = shades_of_gray_correction(constant_image(4, 4, 0.3f, 0.3f, 0.3f), p);
    for (double v : c) EXPECT_NEAR(v, 1.0, 1e-12);
  }
  const auto cast = shades_of_gray_correction(constant_image(4, 4, 1.0f, 0.5f, 0.5f), 6);
  EXPECT_NEAR(cast[0], 0.577, 1e-3);
  EXPECT_NEAR(cast[1], 1.155, 1e-3);
  EXPECT_NEAR(cast[2], 1.155, 1e-3);

  // Two pixels: channel 0 holds {0, 1}, the others are 1, so e_0 = (1/2)^(1/6).
  RgbImage two = constant_image(2, 1, 1, 1, 1);
  two.at(0, 0, 0) = 0;
  const auto c = shades_of_gray_correction(two, 6);
  const double e0 = std::pow(0.5, 1.0 / 6.0);
  EXPECT_NEAR(e0, 0.891, 1e-3);
  EXPECT_NEAR(c[1] / c[0], e0, 1e-12);
  EXPECT_NEAR(c[2], c[1], 1e-15);

  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
  const auto zero = shades_of_gray_correction(constant_image(2, 2, 0, 0.5f, 0.5f), 6);
  EXPECT_TRUE(std::isfinite(zero[0]));
  EXPECT_EQ(warnings.size(), 1u);
  set_warning_sink(nullptr);
  EXPECT_THROW(shades_of_gray_correction(RgbImage{}, 6), DomainError);
}

TEST(AttributesTest, IlluminationIsSymmetricInChannels) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    RgbImage img = random_image(rng, 1 + static_cast<int>(testing::below(rng, 12)),
                                1 + static_cast<int>(testing::below(rng, 12)));
    // Cast so the image is not neutral.
    for (std::size_t i = 0; i < img.data.size(); i += 3) img.data[i] *= 0.7f;
    RgbImage perm = img;
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
      perm.data[i] = img.data[i + 2];
      perm.data[i + 1] = img.data[i];
      perm.data[i + 2] = img.data[i + 1];
    }
    EXPECT_NEAR(illumination_deviation(img, 6), illumination_deviation(perm, 6), 1e-12);
  }
}

// Direct 3x3 convolution with the 4-neighbour kernel, then a two-pass variance.
double brute_laplacian_variance(const GrayImage& g) {
  const int k[3][3] = {{0, -1, 0}, {-1, 4, -1}, {0, -1, 0}};
  std::vector<long double> r;
  for (int y = 1; y + 1 < g.height; ++y) {
    for (int x = 1; x + 1 < g.width; ++x) {
      long double acc = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) acc += k[dy + 1][dx + 1] * (long double)g.at(x + dx, y + dy);
      }
      r.push_back(acc);
    }
  }
  long double mean = 0;
  for (auto v : r) mean += v;
  mean /= r.size();
  long double var = 0;
  for (auto v : r) var += (v - mean) * (v - mean);
  return static_cast<double>(var / r.size());
}

TEST(AttributesTest, LaplacianExamples) {
  EXPECT_EQ(laplacian_sharpness(GrayImage(8, 6, 17.0)), 0.0);
  GrayImage ramp(9, 7);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) ramp.at(x, y) = 3 * x - 2 * y + 5;
  }
  EXPECT_EQ(laplacian_sharpness(ramp), 0.0);
  GrayImage imp3(3, 3);
  imp3.at(1, 1) = 1;
  EXPECT_EQ(laplacian_sharpness(imp3), 0.0);
  GrayImage imp5(5, 5);
  imp5.at(2, 2) = 1;
  const auto v5 = laplacian_sharpness(imp5);
  ASSERT_TRUE(v5);
  EXPECT_GT(*v5, 0);
  // Responses {4, -1, -1, -1, -1, 0, 0, 0, 0}: mean 0, variance 20/9.
  EXPECT_NEAR(*v5, 20.0 / 9.0, 1e-15);
  EXPECT_NEAR(*v5, brute_laplacian_variance(imp5), 1e-15);
  EXPECT_FALSE(laplacian_sharpness(GrayImage(2, 9)));
}

TEST(AttributesTest, LaplacianMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    GrayImage g(3 + static_cast<int>(testing::below(rng, 20)),
                3 + static_cast<int>(testing::below(rng, 20)));
    for (auto& v : g.data) v = testing::uniform(rng, 0, 255);
    const double want = brute_laplacian_variance(g);
    EXPECT_NEAR(*laplacian_sharpness(g), want, 1e-9 * std::max(1.0, want));
  }
}

double two_pass_pearson(const GrayImage& a, const GrayImage& b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a.data[i];
    mb += b.data[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double cov = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a.data[i] - ma) * (b.data[i] - mb);
    sa += (a.data[i] - ma) * (a.data[i] - ma);
    sb += (b.data[i] - mb) * (b.data[i] - mb);
  }
  return static_cast<double>(cov / std::sqrt(sa * sb));
}

TEST(AttributesTest, PearsonExamples) {
  GrayImage a(6, 5);
  for (std::size_t i = 0; i < a.size(); ++i) a.data[i] = double(i * i % 17);
  EXPECT_DOUBLE_EQ(pearson_corrcoef(a, a), 1.0);
  GrayImage neg = a;
  for (auto& v : neg.data) v = 16 - v;
  EXPECT_DOUBLE_EQ(pearson_corrcoef(a, neg), -1.0);

  GrayImage board(20, 20), flipped(20, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) board.at(x, y) = (x + y) % 2;
  }
  flipped = board;
  std::mt19937_64 rng(1);
  std::vector<std::size_t> idx(board.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::size_t i = 0; i < 40; ++i) flipped.data[idx[i]] = 1 - flipped.data[idx[i]];
  const double rho = pearson_corrcoef(board, flipped);
  EXPECT_NEAR(rho, two_pass_pearson(board, flipped), 1e-12);
  EXPECT_GT(rho, 0.5);
  EXPECT_LT(rho, 1.0);

  set_warning_sink([](std::string_view) {});
  EXPECT_EQ(pearson_corrcoef(GrayImage(4, 4, 2), GrayImage(4, 4, 2)), 1.0);
  EXPECT_EQ(pearson_corrcoef(GrayImage(4, 4, 2), a), 0.0);
  set_warning_sink(nullptr);
  EXPECT_THROW(pearson_corrcoef(GrayImage(1, 1), GrayImage(1, 1)), DomainError);
}

TEST(AttributesTest, PearsonAffineInvariance) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 2 + static_cast<int>(testing::below(rng, 15));
    const int h = 1 + static_cast<int>(testing::below(rng, 15));
    GrayImage a(w, h), b(w, h);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.data[i] = testing::uniform(rng, 0, 1);
      b.data[i] = 0.5 * a.data[i] + testing::uniform(rng, 0, 1);
    }
    const double scale = testing::uniform(rng, 0.01, 100);
    const double shift = testing::uniform(rng, -100, 100);
    GrayImage c = b;
    for (auto& v : c.data) v = scale * v + shift;
    const double r = pearson_corrcoef(a, b);
    EXPECT_NEAR(pearson_corrcoef(a, c), r, 1e-9);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(AttributesTest, DynamicExamples) {
  const BoundingBox box{10, 10, 25, 25};
  const StaticAttributes s = static_attributes(box, frame_of(100, 100), nullptr);
  GrayImage g(10, 10);
  for (std::size_t i = 0; i < g.size(); ++i) g.data[i] = double(i % 7);
  const auto same = dynamic_attributes({&box, &s, &g}, {&box, &s, &g});
  EXPECT_EQ(same.delta_ratio, 0.0);
  EXPECT_EQ(same.delta_relative_scale, 0.0);
  EXPECT_EQ(same.fast_motion, 0.0);
  EXPECT_EQ(same.corrcoef, 1.0);

  const BoundingBox moved{20, 10, 25, 25};
  const StaticAttributes sm = static_attributes(moved, frame_of(100, 100), nullptr);
  EXPECT_DOUBLE_EQ(dynamic_attributes({&box, &s}, {&moved, &sm}).fast_motion, 2.0);

  const BoundingBox tall{0, 0, 10, 20}, taller{0, 0, 10, 23};
  const auto st = static_attributes(tall, frame_of(100, 100), nullptr);
  const auto stt = static_attributes(taller, frame_of(100, 100), nullptr);
  const auto d = dynamic_attributes({&tall, &st}, {&taller, &stt});
  EXPECT_NEAR(d.delta_ratio, 0.3, 1e-12);
  EXPECT_GE(d.delta_ratio, 0.2);
  EXPECT_FALSE(d.corrcoef);
  EXPECT_THROW(dynamic_attributes({nullptr, &st}, {&taller, &stt}), DomainError);
}

TEST(AttributesTest, ScaleInvariance) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const BoundingBox a = testing::random_box(rng), b = testing::random_box(rng);
    const int W = 100 + static_cast<int>(testing::below(rng, 900));
    const int H = 100 + static_cast<int>(testing::below(rng, 900));
    const int k = 1 + static_cast<int>(testing::below(rng, 8));
    const BoundingBox ka{a.x * k, a.y * k, a.w * k, a.h * k};
    const BoundingBox kb{b.x * k, b.y * k, b.w * k, b.h * k};
    const auto sa = static_attributes(a, frame_of(W, H), nullptr);
    const auto ska = static_attributes(ka, frame_of(W * k, H * k), nullptr);
    EXPECT_NEAR(ska.ratio, sa.ratio, 1e-9 * sa.ratio);
    EXPECT_NEAR(ska.relative_scale, sa.relative_scale, 1e-9);
    const auto sb = static_attributes(b, frame_of(W, H), nullptr);
    const auto skb = static_attributes(kb, frame_of(W * k, H * k), nullptr);
    const double e = dynamic_attributes({&a, &sa}, {&b, &sb}).fast_motion;
    const double ek = dynamic_attributes({&ka, &ska}, {&kb, &skb}).fast_motion;
    // Distance scales by k and the denominator by sqrt(k).
    EXPECT_NEAR(ek, e * std::sqrt(double(k)), 1e-9 * std::max(1.0, ek));
  }
}

TEST(AttributesTest, AnnotateConstantBox) {
  const Sequence seq = make_box_sequence("c", std::vector<Region>(3, BoundingBox{5, 5, 10, 20}));
  const AttributeTable t = annotate_sequence(seq, AnnotationMode::kAnnotationOnly);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.mode, AnnotationMode::kAnnotationOnly);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(t.records[i][A::kRatio], 2.0);
    EXPECT_EQ(t.records[i][A::kRelativeScale], t.records[0][A::kRelativeScale]);
    EXPECT_FALSE(t.records[i][A::kIllumination]);
    EXPECT_FALSE(t.records[i][A::kBlur]);
    EXPECT_FALSE(t.records[i][A::kCorrcoef]);
  }
  for (std::size_t a = index_of(A::kDeltaRatio); a < kAttributeCount; ++a) {
    EXPECT_FALSE(t.records[0].values[a]);
  }
  EXPECT_EQ(t.records[2][A::kDeltaRatio], 0.0);
  EXPECT_EQ(t.records[2][A::kFastMotion], 0.0);
}

TEST(AttributesTest, AnnotateAbsentSpan) {
  std::vector<Region> gt;
  for (int t = 0; t < 12; ++t) gt.push_back(BoundingBox{double(t), 5, 10, 12});
  for (int t = 5; t <= 7; ++t) gt[static_cast<std::size_t>(t)] = std::nullopt;
  const AttributeTable table =
      annotate_sequence(make_box_sequence("a", gt), AnnotationMode::kAnnotationOnly);
  for (std::size_t t = 5; t <= 7; ++t) {
    for (const auto& v : table.records[t].values) EXPECT_FALSE(v);
  }
  EXPECT_TRUE(table.records[8][A::kRatio]);
  EXPECT_FALSE(table.records[8][A::kDeltaRatio]);
  EXPECT_FALSE(table.records[8][A::kFastMotion]);
  EXPECT_TRUE(table.records[9][A::kFastMotion]);
  EXPECT_TRUE(table.records[4][A::kFastMotion]);
}

TEST(AttributesTest, FullModeNeedsImages) {
  const Sequence seq = make_box_sequence("m", std::vector<Region>(2, BoundingBox{1, 1, 5, 5}));
  try {
    annotate_sequence(seq, AnnotationMode::kFull);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.where(), "m frame 0");
  }
}

TEST(AttributesTest, CsvRoundTripAndSlice) {
  const Sequence seq = make_box_sequence(
      "r", {BoundingBox{1, 2, 3, 4}, BoundingBox{1.5, 2, 3.25, 4}, std::nullopt,
            BoundingBox{7, 7, 7, 7}});
  const AttributeTable t = annotate_sequence(seq, AnnotationMode::kAnnotationOnly);
  const std::string csv = format_attribute_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "ratio,relative_scale,illumination,blur,delta_ratio,delta_relative_scale,"
            "delta_illumination,delta_blur,fast_motion,corrcoef");
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 16), "1.33333333,0.006");
  const AttributeTable back = parse_attribute_csv(csv, "r");
  EXPECT_EQ(back.mode, AnnotationMode::kAnnotationOnly);
  EXPECT_EQ(format_attribute_csv(back), csv);
  EXPECT_THROW(parse_attribute_csv("a,b\n", "r"), LoadError);
  EXPECT_THROW(parse_attribute_csv(csv + "1,2\n", "r"), LoadError);
  const AttributeTable s = t.slice(1, 3);
  EXPECT_EQ(s.sequence_id, "r@1-3");
  EXPECT_EQ(s.records[0], t.records[1]);
  EXPECT_THROW(t.slice(2, 2), DomainError);
}

// ---------------------------------------------------------------------------
// Slow-path reference: reads PPM bytes directly and evaluates every attribute
// in long double from its definition.

struct RefImage {
  int w = 0, h = 0;
  std::vector<float> rgb;  // same [0,1] quantization as the loader
  float at(int x, int y, int c) const { return rgb[(std::size_t(y) * w + x) * 3 + c]; }
};

RefImage read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int maxval = 0;
  RefImage img;
  in >> magic >> img.w >> img.h >> maxval;
  in.get();
  std::vector<unsigned char> bytes(std::size_t(img.w) * img.h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (magic != "P6" || maxval != 255 || !in) throw std::runtime_error("bad ppm " + path.string());
  for (unsigned char b : bytes) img.rgb.push_back(static_cast<float>(b) / 255.0f);
  return img;
}

using LD = long double;

LD ref_luma(const RefImage& im, int x, int y) {
  return 0.299L * im.at(x, y, 0) + 0.587L * im.at(x, y, 1) + 0.114L * im.at(x, y, 2);
}

std::optional<LD> ref_illumination(const RefImage& im) {
  LD e[3];
  const LD n = LD(im.w) * im.h;
  for (int c = 0; c < 3; ++c) {
    LD s = 0;
    for (int y = 0; y < im.h; ++y) {
      for (int x = 0; x < im.w; ++x) s += std::pow(LD(im.at(x, y, c)), 6.0L);
    }
    e[c] = std::pow(s / n, 1.0L / 6.0L);
  }
  if (e[0] == e[1] && e[1] == e[2]) return 0.0L;
  const LD len = std::sqrt(1 / (e[0] * e[0]) + 1 / (e[1] * e[1]) + 1 / (e[2] * e[2]));
  LD d = 0;
  for (LD v : e) d += (std::sqrt(3.0L) / (v * len) - 1) * (std::sqrt(3.0L) / (v * len) - 1);
  return std::sqrt(d);
}

std::optional<LD> ref_blur(const RefImage& im, const BoundingBox& b) {
  const int x0 = std::max(0, int(std::floor(b.x))), y0 = std::max(0, int(std::floor(b.y)));
  const int x1 = std::min(im.w, int(std::ceil(b.x + b.w)));
  const int y1 = std::min(im.h, int(std::ceil(b.y + b.h)));
  if (x1 - x0 < 3 || y1 - y0 < 3) return std::nullopt;
  std::vector<LD> r;
  for (int y = y0 + 1; y < y1 - 1; ++y) {
    for (int x = x0 + 1; x < x1 - 1; ++x) {
      const auto g = [&](int xx, int yy) { return 255.0L * ref_luma(im, xx, yy); };
      r.push_back(4 * g(x, y) - g(x - 1, y) - g(x + 1, y) - g(x, y - 1) - g(x, y + 1));
    }
  }
  LD mean = 0;
  for (LD v : r) mean += v;
  mean /= r.size();
  LD var = 0;
  for (LD v : r) var += (v - mean) * (v - mean);
  return var / r.size();
}

LD ref_corrcoef(const RefImage& a, const RefImage& b) {
  // Frames within a fixture sequence share one resolution.
  if (a.w != b.w || a.h != b.h) throw std::runtime_error("resolution change");
  const LD n = LD(a.w) * a.h;
  LD ma = 0, mb = 0;
  for (int y = 0; y < a.h; ++y) {
    for (int x = 0; x < a.w; ++x) {
      ma += ref_luma(a, x, y);
      mb += ref_luma(b, x, y);
    }
  }
  ma /= n;
  mb /= n;
  LD cov = 0, va = 0, vb = 0;
  for (int y = 0; y < a.h; ++y) {
    for (int x = 0; x < a.w; ++x) {
      const LD da = ref_luma(a, x, y) - ma, db = ref_luma(b, x, y) - mb;
      cov += da * db;
      va += da * da;
      vb += db * db;
    }
  }
  if (va == 0 || vb == 0) return a.rgb == b.rgb ? 1 : 0;
  return cov / std::sqrt(va * vb);
}

std::string reference_csv(const Sequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    out += (i ? "," : "") + std::string(attribute_names()[i]);
  }
  out += '\n';
  std::optional<RefImage> prev_img;
  std::array<std::optional<LD>, kAttributeCount> prev{};
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const RefImage img = read_ppm(seq.image_file(t));
    std::array<std::optional<LD>, kAttributeCount> cur{};
    const Region& g = seq.groundtruth[t];
    if (g) {
      cur[0] = LD(g->h) / LD(g->w);
      cur[1] = std::sqrt(LD(g->w) * LD(g->h)) / std::sqrt(LD(img.w) * LD(img.h));
      cur[2] = ref_illumination(img);
      cur[3] = ref_blur(img, *g);
      const Region& pg = t > 0 ? seq.groundtruth[t - 1] : Region{};
      if (pg) {
        for (std::size_t k = 0; k < 4; ++k) {
          if (cur[k] && prev[k]) cur[4 + k] = std::abs(*cur[k] - *prev[k]);
        }
        const LD dx = (LD(g->x) + LD(g->w) / 2) - (LD(pg->x) + LD(pg->w) / 2);
        const LD dy = (LD(g->y) + LD(g->h) / 2) - (LD(pg->y) + LD(pg->h) / 2);
        const LD s = std::max(std::sqrt(LD(g->w) * g->h), std::sqrt(LD(pg->w) * pg->h));
        cur[8] = std::sqrt(dx * dx + dy * dy) / std::sqrt(s);
        cur[9] = ref_corrcoef(*prev_img, img);
      }
    }
    for (std::size_t k = 0; k < kAttributeCount; ++k) {
      if (k) out += ',';
      if (cur[k]) {
        const double v = static_cast<double>(*cur[k]);
        out += v == 0 ? "0" : fmt::format("{:.9g}", v);
      }
    }
    out += '\n';
    prev = cur;
    prev_img = img;
  }
  return out;
}

class FixtureAttributes : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("attr");
    env_ = new Environment(load_manifest(write_fixture_corpus(dir_->path()).manifest));
  }
  static void TearDownTestSuite() {
    delete env_;
    delete dir_;
  }
  static testing::TempDir* dir_;
  static Environment* env_;
};
testing::TempDir* FixtureAttributes::dir_ = nullptr;
Environment* FixtureAttributes::env_ = nullptr;

// Parses a CSV into cells for tolerance comparison.
std::vector<std::vector<std::string>> cells_of(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  for (auto line : text::split(csv, '\n')) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    for (auto c : text::split(line, ',')) row.emplace_back(c);
    rows.push_back(row);
  }
  return rows;
}

TEST_F(FixtureAttributes, MatchesSlowPathReference) {
  for (const Sequence& seq : env_->sequences) {
    const std::string got = format_attribute_csv(annotate_sequence(seq, AnnotationMode::kFull));
    const std::string want = reference_csv(seq);
    const auto g = cells_of(got), w = cells_of(want);
    ASSERT_EQ(g.size(), w.size());
    for (std::size_t r = 0; r < g.size(); ++r) {
      ASSERT_EQ(g[r].size(), w[r].size());
      for (std::size_t c = 0; c < g[r].size(); ++c) {
        if (r == 0 || g[r][c].empty() || w[r][c].empty()) {
          ASSERT_EQ(g[r][c], w[r][c]) << seq.id << " row " << r << " col " << c;
          continue;
        }
        const double a = *text::parse_double(g[r][c]), b = *text::parse_double(w[r][c]);
        ASSERT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(b)))
            << seq.id << " row " << r << " col " << attribute_names()[c];
      }
    }
  }
}

TEST_F(FixtureAttributes, GoldenTablesAreByteIdentical) {
  const fs::path golden = fs::path(SOTVERSE_TEST_DIR) / "golden" / "attributes";
  const bool update = std::getenv("SOTVERSE_UPDATE_GOLDENS") != nullptr;
  for (const Sequence& seq : env_->sequences) {
    const fs::path file = golden / (seq.id + ".csv");
    if (update) {
      fs::create_directories(golden);
      text::write_file(file, reference_csv(seq));
    }
    ASSERT_TRUE(fs::exists(file)) << file << " missing; run with SOTVERSE_UPDATE_GOLDENS=1";
    const std::string got = format_attribute_csv(annotate_sequence(seq, AnnotationMode::kFull));
    EXPECT_EQ(got, text::read_file(file)) << seq.id;
  }
}

TEST_F(FixtureAttributes, RecomputationIsBitIdentical) {
  const Sequence& seq = env_->sequence("beta");
  const std::string a = format_attribute_csv(annotate_sequence(seq, AnnotationMode::kFull));
  const std::string b = format_attribute_csv(annotate_sequence(seq, AnnotationMode::kFull));
  EXPECT_EQ(a, b);
  // Annotation-only mode leaves image attributes empty on every row.
  const AttributeTable ann = annotate_sequence(seq, AnnotationMode::kAnnotationOnly);
  for (const auto& rec : ann.records) {
    EXPECT_FALSE(rec[A::kIllumination]);
    EXPECT_FALSE(rec[A::kBlur]);
    EXPECT_FALSE(rec[A::kDeltaIllumination]);
    EXPECT_FALSE(rec[A::kDeltaBlur]);
    EXPECT_FALSE(rec[A::kCorrcoef]);
  }
}

}  // namespace
}  // namespace sotverse
