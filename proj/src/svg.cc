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

#include "sotverse/svg.h"

#include <fmt/format.h>

#include <algorithm>

#include "sotverse/format.h"

namespace sotverse::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 180;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string num(double v) { return text::fixed(v, 2); }

struct Frame {
  Axis x, y;
  double px(double v) const {
    const double span = x.max - x.min;
    return kLeft + (span > 0 ? (v - x.min) / span : 0) * (kWidth - kLeft - kRight);
  }
  double py(double v) const {
    const double span = y.max - y.min;
    return kHeight - kBottom - (span > 0 ? (v - y.min) / span : 0) * (kHeight - kTop - kBottom);
  }
};

std::string header(const std::string& title) {
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      kWidth, kHeight);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     num((kWidth - kRight + kLeft) / 2), escape(title));
  return out;
}

std::string axes(const Frame& f) {
  std::string out;
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                     "stroke=\"black\"/>\n",
                     num(x0), num(y1), num(x1 - x0), num(y0 - y1));
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x.min + (f.x.max - f.x.min) * i / 5.0;
    const double yv = f.y.min + (f.y.max - f.y.min) * i / 5.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>\n",
                       num(f.px(xv)), num(y0), num(y1));
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n",
                       num(x0), num(f.py(yv)), num(x1));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       num(f.px(xv)), num(y0 + 16), text::fixed(xv, 2));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(x0 - 6),
                       num(f.py(yv) + 4), text::fixed(yv, 2));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     num((x0 + x1) / 2), num(kHeight - 20), escape(f.x.label));
  out += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      num((y0 + y1) / 2), escape(f.y.label));
  return out;
}

std::string legend_entry(std::size_t i, const std::string& label) {
  const double x = kWidth - kRight + 12;
  const double y = kTop + 14 + 16 * static_cast<double>(i);
  return fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n"
      "<text x=\"{}\" y=\"{}\">{}</text>\n",
      num(x), num(y - 9), color(i), num(x + 14), num(y), escape(label));
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string line_chart(const std::string& title, const Axis& x, const Axis& y,
                       const std::vector<Series>& series) {
  const Frame f{x, y};
  std::string out = header(title) + axes(f);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    std::vector<std::string> runs;
    std::string current;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!s.y[k]) {
        if (!current.empty()) runs.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (!current.empty()) current += ' ';
      current += num(f.px(s.x[k])) + "," + num(f.py(*s.y[k]));
    }
    if (!current.empty()) runs.push_back(std::move(current));
    for (const auto& r : runs) {
      out += fmt::format(
          "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
          color(i), r);
    }
    out += legend_entry(i, s.label);
  }
  out += "</svg>\n";
  return out;
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series) {
  Frame f{{"", 0, static_cast<double>(std::max<std::size_t>(categories.size(), 1))},
          {"ratio of fail frames", 0, 1}};
  std::string out = header(title);
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                     "stroke=\"black\"/>\n",
                     num(x0), num(y1), num(x1 - x0), num(y0 - y1));
  for (int i = 0; i <= 5; ++i) {
    const double yv = i / 5.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n",
                       num(x0), num(f.py(yv)), num(x1));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(x0 - 6),
                       num(f.py(yv) + 4), text::fixed(yv, 2));
  }
  const double group = (x1 - x0) / f.x.max;
  const double bar = series.empty() ? 0 : group * 0.8 / static_cast<double>(series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = x0 + group * static_cast<double>(c);
    const double cx = gx + group / 2;
    out += fmt::format(
        "<text x=\"{0}\" y=\"{1}\" text-anchor=\"end\" transform=\"rotate(-35 {0} {1})\">{2}</text>\n",
        num(cx), num(y0 + 12), escape(categories[c]));
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (c >= series[s].y.size() || !series[s].y[c]) continue;
      const double v = *series[s].y[c];
      const double bx = gx + group * 0.1 + bar * static_cast<double>(s);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                         num(bx), num(f.py(v)), num(bar), num(y0 - f.py(v)), color(s));
    }
  }
  for (std::size_t s = 0; s < series.size(); ++s) out += legend_entry(s, series[s].label);
  out += "</svg>\n";
  return out;
}

std::string scatter_chart(const std::string& title, const Axis& x, const Axis& y,
                          const std::vector<Point>& points) {
  const Frame f{x, y};
  std::string out = header(title) + axes(f);
  if (points.empty()) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no R-OPE runs</text>\n",
                       num((kLeft + kWidth - kRight) / 2), num(kHeight / 2));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\"/>\n",
                       num(f.px(points[i].x)), num(f.py(points[i].y)), color(i));
    out += legend_entry(i, points[i].label);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sotverse::svg
