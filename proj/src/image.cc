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

#include "sotverse/image.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "sotverse/errors.h"
#include "sotverse/format.h"

namespace sotverse {

RgbImage load_image(const std::filesystem::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw LoadError(path.string(), e.what());
  }
  if (bgr.empty()) throw LoadError(path.string(), "cannot decode image");
  RgbImage img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y, 0) = static_cast<float>(row[x][2]) / 255.0f;
      img.at(x, y, 1) = static_cast<float>(row[x][1]) / 255.0f;
      img.at(x, y, 2) = static_cast<float>(row[x][0]) / 255.0f;
    }
  }
  return img;
}

std::pair<int, int> probe_resolution(const std::filesystem::path& path) {
  const RgbImage img = load_image(path);
  return {img.width, img.height};
}

GrayImage to_gray(const RgbImage& img, double scale) {
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = scale * (0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                              0.114 * img.at(x, y, 2));
    }
  }
  return out;
}

PixelRect covering_rect(const BoundingBox& box, int width, int height) {
  const double fx0 = std::floor(box.x), fy0 = std::floor(box.y);
  const double fx1 = std::ceil(box.right()), fy1 = std::ceil(box.bottom());
  PixelRect r;
  r.x0 = static_cast<int>(std::clamp(fx0, 0.0, double(width)));
  r.y0 = static_cast<int>(std::clamp(fy0, 0.0, double(height)));
  r.x1 = static_cast<int>(std::clamp(fx1, 0.0, double(width)));
  r.y1 = static_cast<int>(std::clamp(fy1, 0.0, double(height)));
  r.clamped = fx0 < 0 || fy0 < 0 || fx1 > width || fy1 > height;
  return r;
}

GrayImage crop(const GrayImage& img, const PixelRect& r) {
  GrayImage out(std::max(0, r.width()), std::max(0, r.height()));
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = img.at(r.x0 + x, r.y0 + y);
    }
  }
  return out;
}

GrayImage resample_nearest(const GrayImage& img, int width, int height) {
  if (img.width == width && img.height == height) return img;
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(img.height - 1, static_cast<int>(
        (static_cast<long long>(y) * img.height) / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(img.width - 1, static_cast<int>(
          (static_cast<long long>(x) * img.width) / width));
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != std::size_t(width) * height * 3) {
    throw DomainError("write_ppm: buffer size does not match dimensions");
  }
  std::string content = fmt::format("P6\n{} {}\n255\n", width, height);
  content.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  text::write_file(path, content);
}

}  // namespace sotverse
