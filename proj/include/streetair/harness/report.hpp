/* Copyright 2026 The streetair Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef STREETAIR_HARNESS_REPORT_HPP
#define STREETAIR_HARNESS_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "streetair/csv.hpp"
#include "streetair/harness/experiment.hpp"

namespace streetair::harness {

struct RankEntry {
  std::string algorithm;
  double mse = 0.0;
  std::size_t row = 0;  // best row of this algorithm
};

// Algorithms of one pollutant ordered by their lowest MSE; ties keep the
// order of first appearance.
inline std::vector<RankEntry> rank_by_mse(const std::vector<ResultRow>& rows,
                                          const std::string& pollutant) {
  std::vector<RankEntry> ranks;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.pollutant != pollutant || std::isnan(r.mean.mse)) continue;
    auto it = std::find_if(ranks.begin(), ranks.end(),
                           [&](const RankEntry& e) { return e.algorithm == r.algorithm; });
    if (it == ranks.end())
      ranks.push_back({r.algorithm, r.mean.mse, i});
    else if (r.mean.mse < it->mse) {
      it->mse = r.mean.mse;
      it->row = i;
    }
  }
  std::stable_sort(ranks.begin(), ranks.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.mse < b.mse; });
  return ranks;
}

namespace detail {

inline std::vector<std::string> pollutants_in(const std::vector<ResultRow>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.pollutant) == out.end()) out.push_back(r.pollutant);
  return out;
}

// Index of best and second-best values; lower is better unless `higher`.
inline std::pair<long, long> top_two(const std::vector<double>& v, bool higher) {
  long best = -1, second = -1;
  auto better = [higher](double a, double b) { return higher ? a > b : a < b; };
  for (long i = 0; i < static_cast<long>(v.size()); ++i) {
    if (std::isnan(v[static_cast<std::size_t>(i)])) continue;
    if (best < 0 || better(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(best)])) {
      second = best;
      best = i;
    } else if (second < 0 ||
               better(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(second)])) {
      second = i;
    }
  }
  return {best, second};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace detail

// Markdown table of one pollutant; per metric column the best value is bold
// and the runner-up underlined.
inline std::string markdown_table(const std::vector<ResultRow>& rows, const std::string& pollutant) {
  std::vector<const ResultRow*> sel;
  for (const auto& r : rows)
    if (r.pollutant == pollutant) sel.push_back(&r);
  struct Column {
    const char* title;
    double (*get)(const ResultRow&);
    bool higher;
  };
  const Column cols[] = {
      {"MSE", [](const ResultRow& r) { return r.mean.mse; }, false},
      {"MAE", [](const ResultRow& r) { return r.mean.mae; }, false},
      {"RMSE", [](const ResultRow& r) { return r.mean.rmse; }, false},
      {"MAPE (%)", [](const ResultRow& r) { return r.mean.mape; }, false},
      {"R2", [](const ResultRow& r) { return r.mean.r2; }, true},
  };
  std::vector<std::vector<std::string>> cells(sel.size());
  for (const auto& c : cols) {
    std::vector<double> v;
    for (const auto* r : sel) v.push_back(c.get(*r));
    const auto [best, second] = detail::top_two(v, c.higher);
    for (std::size_t i = 0; i < sel.size(); ++i) {
      std::string s = std::isnan(v[i]) ? "n/a" : format_fixed(v[i], 3);
      if (static_cast<long>(i) == best)
        s = "**" + s + "**";
      else if (static_cast<long>(i) == second)
        s = "<u>" + s + "</u>";
      cells[i].push_back(s);
    }
  }
  std::string md = "## " + pollutant + "\n\n";
  md += "| Model | Angle | Radius (m) | Quality | n | MSE | MAE | RMSE | MAPE (%) | R2 | Improvement (%) |\n";
  md += "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < sel.size(); ++i) {
    const auto& r = *sel[i];
    md += "| " + r.algorithm + " | " + r.angle_strategy + " | " + format_double(r.radius) + " | " +
          r.quality + " | " + std::to_string(r.n_locations);
    for (const auto& c : cells[i]) md += " | " + c;
    md += " | " + (std::isnan(r.improvement_pct) ? std::string("n/a")
                                                  : format_fixed(r.improvement_pct, 2));
    md += " |\n";
  }
  return md;
}

inline std::string ranking_summary(const std::vector<ResultRow>& rows) {
  std::string out = "# Ranking by cross-validated MSE\n\n";
  for (const auto& p : detail::pollutants_in(rows)) {
    const auto ranks = rank_by_mse(rows, p);
    out += "- " + p + ": ";
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      if (i) out += " > ";
      out += ranks[i].algorithm + " (" + format_fixed(ranks[i].mse, 3) + ")";
    }
    out += "\n";
  }
  return out;
}

// Long-format sweep over one factor; the others are listed alongside.
inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows,
                            const std::string& factor) {
  csv::Writer w(path);
  w.row({"pollutant", "algorithm", "angle_strategy", "radius_m", "quality", "factor", "level",
         "metric", "value"});
  for (const auto& r : rows) {
    const std::string level = factor == "angle"    ? r.angle_strategy
                              : factor == "radius" ? format_double(r.radius)
                                                   : r.quality;
    const std::pair<const char*, double> ms[] = {{"mse", r.mean.mse},   {"mae", r.mean.mae},
                                                 {"rmse", r.mean.rmse}, {"mape", r.mean.mape},
                                                 {"r2", r.mean.r2}};
    for (const auto& [m, v] : ms)
      w.row({r.pollutant, r.algorithm, r.angle_strategy, format_double(r.radius), r.quality, factor,
             level, m, format_double(v)});
  }
}

struct ReportFiles {
  std::vector<std::filesystem::path> files;
};

inline ReportFiles render_report(const std::vector<ResultRow>& rows,
                                 const std::filesystem::path& out_dir) {
  if (rows.empty()) throw Error("nothing to report");
  std::filesystem::create_directories(out_dir);
  ReportFiles rf;
  auto add = [&rf, &out_dir](const std::string& name) {
    rf.files.push_back(out_dir / name);
    return out_dir / name;
  };
  write_results_csv(add("results.csv"), rows);
  std::string tables = "# Prediction performance\n\n";
  for (const auto& p : detail::pollutants_in(rows)) {
    const std::string md = markdown_table(rows, p);
    detail::write_text(add("table_" + p + ".md"), md);
    tables += md + "\n";
  }
  detail::write_text(add("tables.md"), tables);
  detail::write_text(add("ranking.md"), ranking_summary(rows));
  write_sweep_csv(add("sweep_angle.csv"), rows, "angle");
  write_sweep_csv(add("sweep_radius.csv"), rows, "radius");
  write_sweep_csv(add("sweep_quality.csv"), rows, "quality");
  return rf;
}

}  // namespace streetair::harness

#endif  // STREETAIR_HARNESS_REPORT_HPP
