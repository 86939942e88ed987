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
#ifndef STREETAIR_HARNESS_STAGES_HPP
#define STREETAIR_HARNESS_STAGES_HPP

#include <filesystem>
#include <iostream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "streetair/aggregation.hpp"
#include "streetair/calibration.hpp"
#include "streetair/csv.hpp"
#include "streetair/harness/config.hpp"
#include "streetair/harness/experiment.hpp"
#include "streetair/harness/pipeline.hpp"
#include "streetair/harness/report.hpp"
#include "streetair/harness/synth.hpp"
#include "streetair/image.hpp"
#include "streetair/imaging.hpp"
#include "streetair/ingest.hpp"
#include "streetair/modeling/grid_search.hpp"
#include "streetair/sampling.hpp"
#include "streetair/svi_client.hpp"

// File-level pipeline stages. Each reads inputs from the data or output
// directory under fixed names and writes its products to the output
// directory.
namespace streetair::harness {

namespace files {
inline constexpr const char* kMonitoring = "monitoring.csv";
inline constexpr const char* kReference = "reference.csv";
inline constexpr const char* kRoads = "roads.geojson";
inline constexpr const char* kImages = "images";
inline constexpr const char* kLabels = "labels";
inline constexpr const char* kClean = "clean_monitoring.csv";
inline constexpr const char* kRejected = "rejected.csv";
inline constexpr const char* kParseErrors = "parse_errors.csv";
inline constexpr const char* kFactors = "factors.csv";
inline constexpr const char* kCalibrated = "calibrated.csv";
inline constexpr const char* kLocations = "locations.csv";
inline constexpr const char* kPlan = "plan.csv";
inline constexpr const char* kFetchLog = "fetch_log.csv";
inline constexpr const char* kQuality = "quality.csv";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kFeaturesHq = "features_hq.csv";
inline constexpr const char* kResults = "results.csv";
inline constexpr const char* kSkipped = "skipped.csv";
inline constexpr const char* kCvTable = "cv_table.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kReportDir = "report";
inline constexpr const char* kConfig = "experiment_config.json";
inline constexpr const char* kTruth = "truth";
}  // namespace files

struct StageContext {
  ExperimentConfig config;
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  std::ostream* log = &std::cerr;

  std::filesystem::path in(const char* name) const { return data_dir / name; }
  std::filesystem::path out(const char* name) const { return out_dir / name; }
  // Outputs of earlier stages live in the output directory.
  std::filesystem::path prior(const char* name) const {
    return std::filesystem::exists(out_dir / name) ? out_dir / name : data_dir / name;
  }
  void say(const std::string& s) const {
    if (log) *log << s << '\n';
  }
};

// Exit status of one stage: 0 when nothing failed fatally.
struct StageStatus {
  int code = 0;
  std::string message;
};

inline StageStatus stage_ingest(const StageContext& ctx) {
  auto parsed = ingest::parse_monitoring_csv(ctx.in(files::kMonitoring));
  {
    csv::Writer w(ctx.out(files::kParseErrors));
    w.row({"line", "message"});
    for (const auto& e : parsed.errors) w.row({std::to_string(e.line), e.message});
  }
  if (parsed.all_failed()) return {1, "every monitoring row failed to parse"};
  const auto cleaned = ingest::clean_records(parsed.value, ctx.config.cleaning);
  ingest::write_monitoring_csv(ctx.out(files::kClean), cleaned.kept);
  csv::Writer w(ctx.out(files::kRejected));
  w.row({"taxi_id", "timestamp", "reasons"});
  for (const auto& r : cleaned.rejected) {
    std::string why;
    for (const auto& s : r.reasons) why += (why.empty() ? "" : ";") + s;
    w.row({r.record.taxi_id, format_iso8601_utc(r.record.timestamp), why});
  }
  ctx.say("ingest: " + std::to_string(cleaned.kept.size()) + " kept, " +
          std::to_string(cleaned.rejected.size()) + " rejected, " +
          std::to_string(parsed.errors.size()) + " unparseable");
  return {};
}

inline StageStatus stage_calibrate(const StageContext& ctx) {
  auto records = ingest::parse_monitoring_csv(ctx.prior(files::kClean));
  auto reference = ingest::parse_reference_csv(ctx.in(files::kReference));
  if (!reference.errors.empty())
    ctx.say("calibrate: " + std::to_string(reference.errors.size()) + " bad reference rows");
  const auto factors = calibration::compute_adjustment_factors(reference.value, ctx.config.calibration);
  for (const auto& w : factors.warnings) ctx.say("calibrate: " + w);
  calibration::write_factors_csv(ctx.out(files::kFactors), factors.table);
  const auto applied = calibration::apply_calibration(std::move(records.value), factors.table);
  ingest::write_monitoring_csv(ctx.out(files::kCalibrated), applied.records);
  ctx.say("calibrate: " + std::to_string(applied.records.size()) + " records, " +
          std::to_string(applied.missing_factor_count) + " readings without a factor");
  return {};
}

inline StageStatus stage_aggregate(const StageContext& ctx) {
  auto records = ingest::parse_monitoring_csv(ctx.prior(files::kCalibrated));
  const auto locs = geo::aggregate_to_grid(records.value, ctx.config.projection(), ctx.config.grid);
  geo::write_locations_csv(ctx.out(files::kLocations), locs);
  ctx.say("aggregate: " + std::to_string(locs.size()) + " locations");
  return {};
}

inline std::vector<geo::Polyline2> load_roads_m(const StageContext& ctx) {
  auto loaded = ingest::load_road_network(ctx.in(files::kRoads));
  for (const auto& w : loaded.warnings) ctx.say("roads: " + w);
  return ingest::to_meters(loaded.network, ctx.config.projection());
}

inline StageStatus stage_plan(const StageContext& ctx) {
  const auto locs = geo::read_locations_csv(ctx.prior(files::kLocations));
  const geo::NetworkLattice lattice(load_roads_m(ctx), ctx.config.sampling);
  const auto plan = geo::build_sampling_plan(locs, lattice, ctx.config.experiment.radii);
  geo::write_plan_csv(ctx.out(files::kPlan), plan);
  for (const auto& id : plan.flagged) ctx.say("plan: location " + id + " has no road inside the largest buffer");
  ctx.say("plan: " + std::to_string(lattice.points().size()) + " lattice points");
  return {};
}

// Unique sample points of a plan, by id.
inline std::map<std::uint64_t, geo::SamplePoint> plan_points(const geo::SamplingPlan& plan) {
  std::map<std::uint64_t, geo::SamplePoint> out;
  for (const auto& [key, pts] : plan.entries)
    for (const auto& p : pts) out.emplace(p.point_id, p);
  return out;
}

inline svi::SviConfig svi_config_for(const StageContext& ctx) {
  svi::SviConfig s = ctx.config.svi;
  if (s.offline_dir.empty()) s.offline_dir = ctx.in(files::kImages).string();
  return s;
}

inline StageStatus stage_fetch(const StageContext& ctx, svi::FetchMode mode) {
  const auto plan = geo::read_plan_csv(ctx.prior(files::kPlan));
  const auto points = plan_points(plan);
  std::vector<svi::ImageRequest> reqs;
  const auto proj = ctx.config.projection();
  for (const auto& [pid, p] : points)
    for (auto& r : svi::build_point_requests(p, proj)) reqs.push_back(std::move(r));
  svi::SviClient client(svi_config_for(ctx), mode);
  const auto results = client.fetch_batch(reqs);
  csv::Writer w(ctx.out(files::kFetchLog));
  w.row({"image_id", "status", "attempts", "http_status", "message"});
  std::size_t ok = 0;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    ok += results[i].ok();
    w.row({image_id(*reqs[i].point_id, *reqs[i].view_offset), std::string(svi::to_string(results[i].status)),
           std::to_string(results[i].attempts), std::to_string(results[i].http_status), results[i].message});
  }
  ctx.say("fetch: " + std::to_string(ok) + " of " + std::to_string(reqs.size()) + " images available");
  return {};
}

inline StageStatus stage_quality(const StageContext& ctx) {
  const auto plan = geo::read_plan_csv(ctx.prior(files::kPlan));
  const auto points = plan_points(plan);
  svi::SviClient client(svi_config_for(ctx), svi::FetchMode::offline);
  std::vector<svi::ImageRequest> reqs;
  const auto proj = ctx.config.projection();
  for (const auto& [pid, p] : points)
    for (auto& r : svi::build_point_requests(p, proj)) reqs.push_back(std::move(r));
  const auto results = client.fetch_batch(reqs);
  std::vector<imaging::QualityRow> rows;
  std::size_t low = 0;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    if (!results[i].ok()) continue;
    imaging::QualityRow q;
    q.image_id = image_id(*reqs[i].point_id, *reqs[i].view_offset);
    q.report = imaging::assess_quality(*results[i].image, ctx.config.quality);
    low += q.report.low_quality();
    rows.push_back(std::move(q));
  }
  imaging::write_quality_csv(ctx.out(files::kQuality), rows);
  ctx.say("quality: " + std::to_string(rows.size()) + " images assessed, " + std::to_string(low) +
          " low quality");
  return {};
}

inline StageStatus stage_features(const StageContext& ctx) {
  const auto plan = geo::read_plan_csv(ctx.prior(files::kPlan));
  const auto points = plan_points(plan);
  std::map<std::string, imaging::QualityReport> quality;
  if (std::filesystem::exists(ctx.prior(files::kQuality)))
    quality = imaging::read_quality_csv(ctx.prior(files::kQuality));
  ViewStore views;
  std::size_t missing = 0;
  for (const auto& [pid, p] : points)
    for (double off : geo::kHeadingOffsets) {
      const int o = static_cast<int>(off);
      const auto path = ctx.in(files::kLabels) / std::to_string(pid) / (std::to_string(o) + ".png");
      auto labels = png::load_labels(path);
      if (!labels) {
        ++missing;
        continue;
      }
      auto it = quality.find(image_id(pid, o));
      add_view(views, pid, o, *labels, it != quality.end() && it->second.low_quality());
    }
  imaging::BufferOptions keep, drop;
  drop.drop_low_quality = true;
  imaging::write_feature_table(ctx.out(files::kFeatures),
                               build_feature_rows(plan, views, ctx.config.experiment.angle_strategies, keep));
  imaging::write_feature_table(ctx.out(files::kFeaturesHq),
                               build_feature_rows(plan, views, ctx.config.experiment.angle_strategies, drop));
  if (missing) ctx.say("features: " + std::to_string(missing) + " views without a label map");
  return {};
}

inline PreparedData load_prepared(const StageContext& ctx) {
  PreparedData d;
  d.locations = geo::read_locations_csv(ctx.prior(files::kLocations));
  d.features = imaging::read_feature_table(ctx.prior(files::kFeatures));
  d.features_hq = imaging::read_feature_table(ctx.prior(files::kFeaturesHq));
  return d;
}

inline StageStatus stage_experiment(const StageContext& ctx) {
  const auto data = load_prepared(ctx);
  const auto res = run_experiment_matrix(ctx.config, data, [&](const std::string& s) { ctx.say(s); });
  write_results_csv(ctx.out(files::kResults), res.rows);
  write_skipped_csv(ctx.out(files::kSkipped), res.skipped);
  modeling::write_cv_table(ctx.out(files::kCvTable), res.searches);
  for (const auto& f : res.failures) ctx.say("experiment: failed " + f);
  ctx.say("experiment: " + std::to_string(res.rows.size()) + " rows, " +
          std::to_string(res.skipped.size()) + " skipped, " + std::to_string(res.failures.size()) +
          " failed");
  if (!res.failures.empty()) return {1, std::to_string(res.failures.size()) + " cells failed"};
  return {};
}

struct TrainRequest {
  Pollutant pollutant = Pollutant::no;
  modeling::Algorithm algorithm = modeling::Algorithm::rf;
  double radius = 100.0;
  std::string angle = "average";
  std::string quality = "keep_all";
};

// Grid search on one data cell, then a final fit on all of it.
inline StageStatus stage_train(const StageContext& ctx, const TrainRequest& req) {
  ExperimentConfig cfg = ctx.config;
  auto angle = imaging::parse_angle_strategy(req.angle);
  if (!angle) return {2, "unknown angle strategy " + req.angle};
  cfg.experiment.pollutants = {req.pollutant};
  cfg.experiment.angle_strategies = {*angle};
  cfg.experiment.radii = {req.radius};
  cfg.experiment.quality_handling = {QualityHandling::parse(req.quality)};
  if (cfg.experiment.quality_handling[0].kind == QualityHandling::Kind::by_bin)
    return {2, "train needs a single data cell; by_bin is not supported"};
  const auto cells = build_data_cells(cfg, load_prepared(ctx));
  const auto& cell = cells.at(0);
  if (cell.data.size() < 2 * cfg.experiment.folds)
    return {1, "only " + std::to_string(cell.data.size()) + " locations in the selected cell"};
  modeling::CvOptions cv;
  cv.k = cfg.experiment.folds;
  cv.r2_uses_training_mean = cfg.experiment.r2_uses_training_mean;
  const auto search = modeling::grid_search(cell.data, cfg.experiment.grids.points(req.algorithm),
                                            cfg.seed, cv, cfg.experiment.workers);
  modeling::write_cv_table(ctx.out(files::kCvTable), {search});
  const auto model = modeling::fit_model(cell.data, search.best_params(), derive_seed(cfg.seed, {0xF17ULL}));
  modeling::save_model(ctx.out(files::kModel).string(), model);
  ctx.say("train: best " + modeling::params_string(search.best_params()) +
          " cv_mse=" + format_double(search.best_cv().mean.mse) +
          " cv_r2=" + format_double(search.best_cv().mean.r2));
  return {};
}

inline StageStatus stage_report(const StageContext& ctx) {
  const auto rows = read_results_csv(ctx.prior(files::kResults));
  const auto rf = render_report(rows, ctx.out_dir / files::kReportDir);
  ctx.say("report: " + std::to_string(rf.files.size()) + " files");
  return {};
}

inline void write_truth(const std::filesystem::path& dir, const SynthCity& city) {
  std::filesystem::create_directories(dir);
  {
    csv::Writer w(dir / "truth.csv");
    w.row({"location_id", "no", "no2", "pm25", "pm10"});
    for (const auto& [id, v] : city.truth)
      w.row({id, format_double(v[0]), format_double(v[1]), format_double(v[2]), format_double(v[3])});
  }
  csv::Writer w(dir / "corrupted.csv");
  w.row({"image_id", "corrupted"});
  for (const auto& [pid, bad] : city.corrupted)
    for (std::size_t s = 0; s < 4; ++s)
      w.row({image_id(pid, static_cast<int>(geo::kHeadingOffsets[s])), bad[s] ? "1" : "0"});
}

inline StageStatus stage_synth(const StageContext& ctx, const SynthOptions& opt) {
  const SynthCity city = generate_city(opt);
  const auto& dir = ctx.out_dir;
  std::filesystem::create_directories(dir);
  ingest::write_monitoring_csv(dir / files::kMonitoring, city.records);
  ingest::write_reference_csv(dir / files::kReference, city.reference);
  ingest::write_road_network(dir / files::kRoads, city.road_network());
  for (const auto& [pid, maps] : city.labels) {
    const auto& imgs = city.images.at(pid);
    std::filesystem::create_directories(dir / files::kLabels / std::to_string(pid));
    std::filesystem::create_directories(dir / files::kImages / std::to_string(pid));
    for (std::size_t s = 0; s < 4; ++s) {
      const std::string name = std::to_string(static_cast<int>(geo::kHeadingOffsets[s])) + ".png";
      png::save_labels(dir / files::kLabels / std::to_string(pid) / name, maps[s]);
      png::save_rgb(dir / files::kImages / std::to_string(pid) / name, imgs[s]);
    }
  }
  write_truth(dir / files::kTruth, city);
  save_config(dir / files::kConfig, city.config);
  ctx.say("synth: " + std::to_string(city.records.size()) + " records, " +
          std::to_string(city.labels.size()) + " sample points, " +
          std::to_string(city.truth.size()) + " truth cells");
  return {};
}

}  // namespace streetair::harness

#endif  // STREETAIR_HARNESS_STAGES_HPP
