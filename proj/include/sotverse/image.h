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
#include <utility>
#include <vector>

#include "sotverse/geometry.h"

namespace sotverse {

// Interleaved RGB, channel values in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3) {}

  float& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const {
    return data[(std::size_t(y) * width + x) * 3 + c];
  }
  bool empty() const { return data.empty(); }
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0)
      : width(w), height(h), data(std::size_t(w) * h, fill) {}

  double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  std::size_t size() const { return data.size(); }
};

// Decodes any format OpenCV reads; grayscale sources yield three equal
// channels. Throws LoadError.
RgbImage load_image(const std::filesystem::path& path);
// Width and height of an image file. Throws LoadError.
std::pair<int, int> probe_resolution(const std::filesystem::path& path);

// Luma 0.299 R + 0.587 G + 0.114 B, multiplied by `scale`.
GrayImage to_gray(const RgbImage& img, double scale = 1.0);

// Integer pixel span covering a box, clamped to the image: [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool clamped = false;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

PixelRect covering_rect(const BoundingBox& box, int width, int height);
GrayImage crop(const GrayImage& img, const PixelRect& r);
GrayImage resample_nearest(const GrayImage& img, int width, int height);

// Binary PPM (P6), 8 bits per channel. `rgb` holds width*height*3 bytes.
void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);

}  // namespace sotverse
