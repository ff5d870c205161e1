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
#include <string>
#include <vector>

// Minimal deterministic SVG charts for the report bundle.
namespace sotverse::svg {

struct Axis {
  std::string label;
  double min = 0;
  double max = 1;
};

struct Series {
  std::string label;
  std::vector<double> x;
  // Undefined points break the polyline.
  std::vector<std::optional<double>> y;
};

struct Point {
  std::string label;
  double x = 0;
  double y = 0;
};

std::string line_chart(const std::string& title, const Axis& x, const Axis& y,
                       const std::vector<Series>& series);

// One group of bars per category, one bar per series.
std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series);

std::string scatter_chart(const std::string& title, const Axis& x, const Axis& y,
                          const std::vector<Point>& points);

std::string escape(const std::string& text);

}  // namespace sotverse::svg
