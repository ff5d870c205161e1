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

#include "sotverse/report.h"

#include <fmt/format.h>

#include <algorithm>
#include <tuple>

#include "json.hpp"
#include "sotverse/errors.h"
#include "sotverse/format.h"
#include "sotverse/svg.h"

namespace sotverse {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ReportEntry make_entry(const RunRecord& record, std::vector<SequenceScores> units) {
  ReportEntry e;
  e.tracker = record.tracker;
  e.space = record.space_id;
  e.environment = record.environment_id;
  e.mechanism = record.mechanism;
  e.aggregate = aggregate_environment(units);
  e.units = std::move(units);
  return e;
}

std::vector<ReportEntry> score_runs(const fs::path& runs_dir) {
  std::vector<fs::path> dirs;
  if (fs::exists(runs_dir / "run.json")) {
    dirs.push_back(runs_dir);
  } else if (fs::is_directory(runs_dir)) {
    for (const auto& d : fs::directory_iterator(runs_dir)) {
      if (d.is_directory() && fs::exists(d.path() / "run.json")) dirs.push_back(d.path());
    }
    std::sort(dirs.begin(), dirs.end());
  } else {
    throw LoadError(runs_dir.string(), "runs directory not found");
  }
  std::vector<ReportEntry> out;
  for (const auto& dir : dirs) {
    const RunData run = read_run(dir);
    const EvalContext ctx = load_context(run.record.sources);
    out.push_back(make_entry(run.record, score_run(ctx, run)));
  }
  return out;
}

namespace {

ordered_json opt(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json curve_json(const Curve& c) {
  ordered_json values = ordered_json::array();
  for (const auto& v : c.values) values.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
  return ordered_json{{"thresholds", c.thresholds},
                      {"values", values},
                      {"headline_threshold", c.headline_threshold()}};
}

ordered_json headlines_json(const Headlines& h) {
  ordered_json out = ordered_json::object();
  for (const auto key : headline_keys()) {
    const auto v = headline_value(h, key);
    out[std::string(key)] = v ? ordered_json(*v) : ordered_json(nullptr);
  }
  return out;
}

std::optional<std::string> main_failure(const AttributeBreakdown& b) {
  if (b.fail_frames == 0) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t a = 1; a < kAttributeCount; ++a) {
    if (b.flagged[a] > b.flagged[best]) best = a;
  }
  return std::string(attribute_names()[best]);
}

ordered_json attributes_json(const AttributeBreakdown& b) {
  ordered_json ratios = ordered_json::object();
  const auto r = b.ratios();
  for (std::size_t a = 0; a < kAttributeCount; ++a) {
    ratios[std::string(attribute_names()[a])] = r[a] ? ordered_json(*r[a]) : ordered_json(nullptr);
  }
  const auto main = main_failure(b);
  return ordered_json{{"fail_frames", b.fail_frames},
                      {"ratios", ratios},
                      {"main_failure", main ? ordered_json(*main) : ordered_json(nullptr)}};
}

ordered_json entry_json(const ReportEntry& e, const ReportOptions& options) {
  const AggregateScores& a = e.aggregate;
  ordered_json curves = {{"precision", curve_json(a.precision)},
                         {"normalized_precision", curve_json(a.normalized_precision)},
                         {"success", curve_json(a.success)},
                         {"challenging", a.challenging ? curve_json(*a.challenging)
                                                       : ordered_json(nullptr)}};
  ordered_json weighted = {
      {"precision", curve_json(a.weighted_precision)},
      {"normalized_precision", curve_json(a.weighted_normalized_precision)},
      {"success", curve_json(a.weighted_success)},
      {"challenging",
       a.weighted_challenging ? curve_json(*a.weighted_challenging) : ordered_json(nullptr)}};
  if (options.challenging_micro) {
    curves["challenging_micro"] =
        a.challenging_micro ? curve_json(*a.challenging_micro) : ordered_json(nullptr);
  }
  ordered_json per_unit = ordered_json::array();
  for (const auto& u : e.units) {
    ordered_json row = {
        {"unit", u.unit},
        {"length", u.length},
        {"evaluated", u.evaluated},
        {"precision", opt(u.precision.headline())},
        {"normalized_precision", opt(u.normalized_precision.headline())},
        {"success_auc", opt(u.success.auc)},
        {"mean_overlap", opt(u.success.mean_overlap)},
        {"challenging", u.challenging ? opt(u.challenging->headline()) : ordered_json(nullptr)}};
    if (u.restarts) {
      row["restarts"] = u.restarts->restart_count();
      row["longest_segment"] = u.restarts->longest_segment();
    }
    per_unit.push_back(std::move(row));
  }
  ordered_json robust = nullptr;
  if (a.robust) {
    robust = {{"restarts", a.robust->restarts}, {"longest_segment", a.robust->longest_segment}};
  }
  return ordered_json{
      {"tracker", e.tracker},
      {"space", e.space},
      {"environment", e.environment},
      {"mechanism", std::string(to_string(e.mechanism))},
      {"units", a.units},
      {"headlines", headlines_json(a.headlines)},
      {"weighted_headlines", headlines_json(a.weighted_headlines)},
      {"curves", curves},
      {"weighted_curves", weighted},
      {"attribute_ratios", a.attributes ? attributes_json(*a.attributes) : ordered_json(nullptr)},
      {"robust", robust},
      {"per_unit", per_unit}};
}

void sort_entries(std::vector<ReportEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return std::tie(x.space, x.mechanism, x.tracker) < std::tie(y.space, y.mechanism, y.tracker);
  });
}

std::string label(const ReportEntry& e) {
  return fmt::format("{} [{}, {}]", e.tracker, e.space, to_string(e.mechanism));
}

svg::Series series_of(const ReportEntry& e, const Curve& c, std::optional<double> score) {
  svg::Series s;
  s.label = score ? fmt::format("{} {}", label(e), text::fixed(*score, 3)) : label(e);
  s.x = c.thresholds;
  s.y = c.values;
  return s;
}

std::string csv_cell(const std::optional<double>& v) { return v ? text::shortest(*v) : ""; }

std::string headlines_csv(const std::vector<ReportEntry>& entries) {
  std::string out = "tracker,space,mechanism,units";
  for (const auto key : headline_keys()) out += fmt::format(",{}", key);
  out += ",restarts,longest_segment\n";
  for (const auto& e : entries) {
    out += fmt::format("{},{},{},{}", e.tracker, e.space, to_string(e.mechanism),
                       e.aggregate.units);
    for (const auto key : headline_keys()) {
      out += "," + csv_cell(headline_value(e.aggregate.headlines, key));
    }
    if (e.aggregate.robust) {
      out += fmt::format(",{},{}\n", text::shortest(e.aggregate.robust->restarts),
                         text::shortest(e.aggregate.robust->longest_segment));
    } else {
      out += ",,\n";
    }
  }
  return out;
}

std::string per_unit_csv(const std::vector<ReportEntry>& entries) {
  std::string out =
      "tracker,space,mechanism,unit,length,evaluated,precision,normalized_precision,"
      "success_auc,mean_overlap,challenging,restarts,longest_segment\n";
  for (const auto& e : entries) {
    for (const auto& u : e.units) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}", e.tracker, e.space,
                         to_string(e.mechanism), u.unit, u.length, u.evaluated,
                         csv_cell(u.precision.headline()),
                         csv_cell(u.normalized_precision.headline()), csv_cell(u.success.auc),
                         csv_cell(u.success.mean_overlap),
                         csv_cell(u.challenging ? u.challenging->headline() : std::nullopt));
      if (u.restarts) {
        out += fmt::format(",{},{}\n", u.restarts->restart_count(),
                           u.restarts->longest_segment());
      } else {
        out += ",,\n";
      }
    }
  }
  return out;
}

std::string attributes_csv(const std::vector<ReportEntry>& entries) {
  std::string out = "tracker,space,mechanism,fail_frames";
  for (const auto name : attribute_names()) out += fmt::format(",{}", name);
  out += "\n";
  for (const auto& e : entries) {
    if (!e.aggregate.attributes) continue;
    const auto& b = *e.aggregate.attributes;
    out += fmt::format("{},{},{},{}", e.tracker, e.space, to_string(e.mechanism), b.fail_frames);
    for (const auto& r : b.ratios()) out += "," + csv_cell(r);
    out += "\n";
  }
  return out;
}

}  // namespace

std::string format_report_json(std::vector<ReportEntry> entries, const ReportOptions& options) {
  sort_entries(entries);
  ordered_json list = ordered_json::array();
  for (const auto& e : entries) list.push_back(entry_json(e, options));
  ordered_json doc = {{"schema", 1}, {"entries", list}};
  return doc.dump(2) + "\n";
}

void emit_report(std::vector<ReportEntry> entries, const fs::path& out_dir,
                 const ReportOptions& options) {
  if (entries.empty()) throw DomainError("nothing to report");
  sort_entries(entries);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("report.json", format_report_json(entries, options));

  std::vector<svg::Series> prec, norm, succ, chal, attr;
  std::vector<svg::Point> robust;
  double max_longest = 1;
  for (const auto& e : entries) {
    const AggregateScores& a = e.aggregate;
    prec.push_back(series_of(e, a.precision, a.headlines.precision));
    norm.push_back(series_of(e, a.normalized_precision, a.headlines.normalized_precision));
    succ.push_back(series_of(e, a.success, a.headlines.success_auc));
    if (a.challenging) chal.push_back(series_of(e, *a.challenging, a.headlines.challenging));
    if (a.attributes) {
      svg::Series s;
      s.label = label(e);
      for (const auto& r : a.attributes->ratios()) s.y.push_back(r);
      attr.push_back(std::move(s));
    }
    if (a.robust) {
      robust.push_back({label(e), a.robust->restarts, a.robust->longest_segment});
      max_longest = std::max(max_longest, a.robust->longest_segment);
    }
  }
  double max_restarts = 1;
  for (const auto& p : robust) max_restarts = std::max(max_restarts, p.x);
  files.emplace_back("precision.svg",
                     svg::line_chart("Precision plot", {"location error threshold (px)", 0, 50},
                                     {"precision", 0, 1}, prec));
  files.emplace_back("normalized_precision.svg",
                     svg::line_chart("Normalized precision plot",
                                     {"normalized distance threshold", 0, 0.5},
                                     {"normalized precision", 0, 1}, norm));
  files.emplace_back("success.svg", svg::line_chart("Success plot", {"overlap threshold", 0, 1},
                                                    {"success rate", 0, 1}, succ));
  files.emplace_back("challenging.svg",
                     svg::line_chart("Challenging plot", {"corrcoef threshold", 0, 1},
                                     {"success rate of challenging frames", 0, 1}, chal));
  std::vector<std::string> categories;
  for (const auto name : attribute_names()) categories.emplace_back(name);
  files.emplace_back("attribute.svg", svg::bar_chart("Attribute plot", categories, attr));
  files.emplace_back("robust.svg",
                     svg::scatter_chart("Robust plot", {"mean restarts", 0, max_restarts * 1.1},
                                        {"mean longest segment (frames)", 0, max_longest * 1.1},
                                        robust));
  files.emplace_back("headlines.csv", headlines_csv(entries));
  files.emplace_back("per_unit.csv", per_unit_csv(entries));
  files.emplace_back("attribute_ratios.csv", attributes_csv(entries));
  for (const auto& [name, content] : files) {
    const fs::path p = out_dir / name;
    try {
      text::write_file(p, content);
    } catch (const std::exception& e) {
      throw LoadError(p.string(), std::string("cannot write: ") + e.what());
    }
  }
}

}  // namespace sotverse
