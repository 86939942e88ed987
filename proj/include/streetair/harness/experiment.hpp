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
#ifndef STREETAIR_HARNESS_EXPERIMENT_HPP
#define STREETAIR_HARNESS_EXPERIMENT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "streetair/aggregation.hpp"
#include "streetair/csv.hpp"
#include "streetair/harness/config.hpp"
#include "streetair/imaging.hpp"
#include "streetair/metrics.hpp"
#include "streetair/modeling/grid_search.hpp"
#include "streetair/parallel.hpp"

namespace streetair::harness {

// Inputs of the matrix: targets per location and the two feature tables.
struct PreparedData {
  std::vector<geo::AggregationLocation> locations;
  std::vector<imaging::FeatureRow> features;     // every image
  std::vector<imaging::FeatureRow> features_hq;  // low-quality images removed
};

struct BinAssignment {
  std::vector<std::vector<std::size_t>> bins;  // indices into the input
  std::vector<std::size_t> unbinned;
};

inline BinAssignment bin_by_quality(std::span<const double> proportions,
                                    const std::vector<QualityBin>& bins) {
  validate_bins(bins);
  BinAssignment out;
  out.bins.resize(bins.size());
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    bool placed = false;
    for (std::size_t b = 0; b < bins.size() && !placed; ++b)
      if (bins[b].contains(proportions[i])) {
        out.bins[b].push_back(i);
        placed = true;
      }
    if (!placed) out.unbinned.push_back(i);
  }
  return out;
}

struct ResultRow {
  std::string pollutant;
  std::string algorithm;
  std::string angle_strategy;
  double radius = 0.0;
  std::string quality;
  std::size_t n_locations = 0;
  metrics::MetricsReport mean;
  std::string best_params;
  double improvement_pct = quiet_nan();  // vs stepwise in the same data cell
};

struct SkippedCell {
  std::string pollutant;
  std::string algorithm;
  std::string angle_strategy;
  double radius = 0.0;
  std::string quality;
  std::size_t n_locations = 0;
  std::string reason;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SkippedCell> skipped;
  std::vector<modeling::GridSearchResult> searches;  // aligned with rows
  std::vector<std::string> failures;                 // cells that threw
};

// One (pollutant, angle, radius, quality variant) slice.
struct DataCell {
  Pollutant pollutant;
  imaging::AngleStrategy angle;
  double radius;
  std::string quality;
  modeling::Dataset data;
};

inline modeling::Dataset make_dataset(const std::vector<const imaging::FeatureRow*>& rows,
                                      const std::map<std::string, PollutantValues>& targets,
                                      Pollutant p, bool with_groups) {
  modeling::Dataset d;
  d.feature_names = imaging::feature_names(with_groups);
  const std::size_t width = d.feature_names.size();
  std::vector<double> x;
  for (const auto* r : rows) {
    auto it = targets.find(r->location_id);
    if (it == targets.end()) continue;
    const double y = it->second[index_of(p)];
    if (!std::isfinite(y)) continue;
    const auto feats = r->features.row();
    x.insert(x.end(), feats.begin(), feats.begin() + static_cast<std::ptrdiff_t>(width));
    d.y.push_back(y);
    d.ids.push_back(r->location_id);
  }
  d.x = modeling::Matrix(d.y.size(), width, std::move(x));
  return d;
}

// Data cells in (pollutant, angle, radius, quality) order. by_bin expands into
// one cell per bin; locations above the last bin are left out.
inline std::vector<DataCell> build_data_cells(const ExperimentConfig& cfg, const PreparedData& in) {
  const auto& ex = cfg.experiment;
  std::map<std::string, PollutantValues> targets;
  for (const auto& loc : in.locations) targets[loc.id()] = loc.median;

  using Key = std::pair<double, std::string>;
  std::map<Key, std::vector<const imaging::FeatureRow*>> all, hq;
  for (const auto& r : in.features) all[{r.radius, r.angle_strategy}].push_back(&r);
  for (const auto& r : in.features_hq) hq[{r.radius, r.angle_strategy}].push_back(&r);

  std::vector<DataCell> cells;
  for (Pollutant p : ex.pollutants)
    for (const auto& a : ex.angle_strategies)
      for (double radius : ex.radii) {
        const Key key{radius, a.name()};
        const auto& rows = all[key];
        for (const auto& q : ex.quality_handling) {
          auto push = [&](std::string label, const std::vector<const imaging::FeatureRow*>& rs) {
            cells.push_back({p, a, radius, std::move(label),
                             make_dataset(rs, targets, p, ex.use_group_features)});
          };
          switch (q.kind) {
            case QualityHandling::Kind::keep_all: push(q.name(), rows); break;
            case QualityHandling::Kind::drop_low_quality: push(q.name(), hq[key]); break;
            case QualityHandling::Kind::drop_locations_above: {
              std::vector<const imaging::FeatureRow*> kept;
              for (const auto* r : rows)
                if (r->low_quality_proportion * 100.0 <= q.threshold_pct) kept.push_back(r);
              push(q.name(), kept);
              break;
            }
            case QualityHandling::Kind::by_bin: {
              std::vector<double> props;
              for (const auto* r : rows) props.push_back(r->low_quality_proportion);
              const auto assign = bin_by_quality(props, ex.quality_bins);
              for (std::size_t b = 0; b < assign.bins.size(); ++b) {
                std::vector<const imaging::FeatureRow*> members;
                for (std::size_t i : assign.bins[b]) members.push_back(rows[i]);
                push("bin:" + ex.quality_bins[b].label(), members);
              }
              break;
            }
          }
        }
      }
  return cells;
}

using ProgressFn = std::function<void(const std::string&)>;

// Every (data cell, algorithm) pair is one task. Seeds depend on the data
// cell index only, so all algorithms of a cell share folds.
inline ExperimentResult run_experiment_matrix(const ExperimentConfig& cfg, const PreparedData& in,
                                              const ProgressFn& log = {}) {
  cfg.validate();
  const auto& ex = cfg.experiment;
  const auto cells = build_data_cells(cfg, in);

  struct Task {
    std::size_t cell;
    modeling::Algorithm algorithm;
  };
  std::vector<Task> tasks;
  ExperimentResult out;
  // Emission order: pollutant, algorithm, angle, radius, quality.
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t per_pollutant = cells.size() / ex.pollutants.size();
  for (std::size_t pi = 0; pi < ex.pollutants.size(); ++pi)
    for (auto alg : ex.algorithms)
      for (std::size_t c = pi * per_pollutant; c < (pi + 1) * per_pollutant; ++c) {
        const auto& cell = cells[c];
        if (cell.data.size() < 2 * ex.folds) {
          SkippedCell s{std::string(to_string(cell.pollutant)),
                        std::string(modeling::to_string(alg)),
                        cell.angle.name(),
                        cell.radius,
                        cell.quality,
                        cell.data.size(),
                        "only " + std::to_string(cell.data.size()) + " locations, need " +
                            std::to_string(2 * ex.folds)};
          if (log)
            log("skip " + s.pollutant + " " + s.algorithm + " angle=" + s.angle_strategy +
                " radius=" + format_double(s.radius) + " quality=" + s.quality + ": " + s.reason);
          out.skipped.push_back(std::move(s));
          continue;
        }
        tasks.push_back({c, alg});
      }

  std::vector<std::optional<modeling::GridSearchResult>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  modeling::CvOptions cv;
  cv.k = ex.folds;
  cv.r2_uses_training_mean = ex.r2_uses_training_mean;
  parallel_for(tasks.size(), ex.workers, [&](std::size_t t) {
    const auto& cell = cells[tasks[t].cell];
    try {
      const std::uint64_t seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(tasks[t].cell)});
      results[t] = modeling::grid_search(cell.data, ex.grids.points(tasks[t].algorithm), seed, cv, 1);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& cell = cells[tasks[t].cell];
    const std::string alg(modeling::to_string(tasks[t].algorithm));
    if (!results[t]) {
      out.failures.push_back(std::string(to_string(cell.pollutant)) + " " + alg +
                             " angle=" + cell.angle.name() + " radius=" +
                             format_double(cell.radius) + " quality=" + cell.quality + ": " +
                             errors[t]);
      continue;
    }
    ResultRow r;
    r.pollutant = std::string(to_string(cell.pollutant));
    r.algorithm = alg;
    r.angle_strategy = cell.angle.name();
    r.radius = cell.radius;
    r.quality = cell.quality;
    r.n_locations = cell.data.size();
    r.mean = results[t]->best_cv().mean;
    r.best_params = modeling::params_string(results[t]->best_params());
    out.rows.push_back(std::move(r));
    out.searches.push_back(std::move(*results[t]));
  }

  std::map<std::tuple<std::string, std::string, double, std::string>, double> baseline;
  for (const auto& r : out.rows)
    if (r.algorithm == "stepwise")
      baseline[{r.pollutant, r.angle_strategy, r.radius, r.quality}] = r.mean.mse;
  for (auto& r : out.rows) {
    auto it = baseline.find({r.pollutant, r.angle_strategy, r.radius, r.quality});
    if (it != baseline.end() && r.mean.mse > 0.0)
      r.improvement_pct = metrics::improvement_pct(it->second, r.mean.mse);
  }
  return out;
}

inline std::vector<std::string> results_header() {
  return {"pollutant", "algorithm", "angle_strategy", "radius_m", "quality",        "n_locations",
          "mse",       "mae",       "rmse",           "mape",     "r2", "improvement_pct", "best_params"};
}

inline void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  csv::Writer w(path);
  w.row(results_header());
  for (const auto& r : rows)
    w.row({r.pollutant, r.algorithm, r.angle_strategy, format_double(r.radius), r.quality,
           std::to_string(r.n_locations), format_double(r.mean.mse), format_double(r.mean.mae),
           format_double(r.mean.rmse), format_double(r.mean.mape), format_double(r.mean.r2),
           format_double(r.improvement_pct), r.best_params});
}

inline std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  const auto t = csv::read_table(path);
  if (t.header != results_header()) throw Error("unexpected results header in " + path.string());
  std::vector<ResultRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    auto fail = [&] { throw Error("bad results row at line " + std::to_string(t.line_numbers[i])); };
    if (f.size() != t.header.size()) fail();
    auto num = [&](const std::string& s) {
      if (s.empty()) return quiet_nan();
      auto v = parse_double(s);
      if (!v) fail();
      return *v;
    };
    ResultRow r;
    r.pollutant = f[0];
    r.algorithm = f[1];
    r.angle_strategy = f[2];
    r.radius = num(f[3]);
    r.quality = f[4];
    auto n = parse_int(f[5]);
    if (!n) fail();
    r.n_locations = static_cast<std::size_t>(*n);
    r.mean = {num(f[6]), num(f[7]), num(f[8]), num(f[9]), num(f[10])};
    r.improvement_pct = num(f[11]);
    r.best_params = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_skipped_csv(const std::filesystem::path& path,
                              const std::vector<SkippedCell>& skipped) {
  csv::Writer w(path);
  w.row({"pollutant", "algorithm", "angle_strategy", "radius_m", "quality", "n_locations", "reason"});
  for (const auto& s : skipped)
    w.row({s.pollutant, s.algorithm, s.angle_strategy, format_double(s.radius), s.quality,
           std::to_string(s.n_locations), s.reason});
}

}  // namespace streetair::harness

#endif  // STREETAIR_HARNESS_EXPERIMENT_HPP
