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
#ifndef STREETAIR_HARNESS_CONFIG_HPP
#define STREETAIR_HARNESS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "streetair/calibration.hpp"
#include "streetair/common.hpp"
#include "streetair/geospatial.hpp"
#include "streetair/imaging.hpp"
#include "streetair/ingest.hpp"
#include "streetair/modeling/grid_search.hpp"
#include "streetair/sampling.hpp"
#include "streetair/svi_client.hpp"

namespace streetair::harness {

// How image quality enters a matrix cell.
struct QualityHandling {
  enum class Kind { keep_all, drop_low_quality, drop_locations_above, by_bin };
  Kind kind = Kind::keep_all;
  double threshold_pct = 0.0;  // drop_locations_above

  std::string name() const {
    switch (kind) {
      case Kind::keep_all: return "keep_all";
      case Kind::drop_low_quality: return "drop_low_quality";
      case Kind::drop_locations_above: return "drop_locations_above:" + format_double(threshold_pct);
      case Kind::by_bin: return "by_bin";
    }
    return "?";
  }

  static QualityHandling parse(const std::string& s) {
    QualityHandling q;
    if (s == "keep_all") return q;
    if (s == "drop_low_quality") {
      q.kind = Kind::drop_low_quality;
      return q;
    }
    if (s == "by_bin") {
      q.kind = Kind::by_bin;
      return q;
    }
    const std::string prefix = "drop_locations_above:";
    if (s.rfind(prefix, 0) == 0) {
      auto v = parse_double(s.substr(prefix.size()));
      if (!v || *v < 0.0 || *v > 100.0) throw Error("bad quality threshold in '" + s + "'");
      q.kind = Kind::drop_locations_above;
      q.threshold_pct = *v;
      return q;
    }
    throw Error("unknown quality handling '" + s + "'");
  }
};

// Bin (lo, hi] in percent; lo == hi is the singleton bin {lo}.
struct QualityBin {
  double lo_pct = 0.0;
  double hi_pct = 0.0;

  std::string label() const {
    if (lo_pct == hi_pct) return format_double(lo_pct) + "%";
    return format_double(lo_pct) + "-" + format_double(hi_pct) + "%";
  }
  bool contains(double proportion) const {
    const double pct = proportion * 100.0;
    if (lo_pct == hi_pct) return pct == lo_pct;
    return pct > lo_pct && pct <= hi_pct;
  }
};

inline std::vector<QualityBin> default_quality_bins() {
  return {{0, 0}, {0, 5}, {5, 10}, {10, 15}, {15, 20}, {20, 30}};
}

inline void validate_bins(const std::vector<QualityBin>& bins) {
  if (bins.empty()) throw Error("quality bins are empty");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].hi_pct < bins[i].lo_pct) throw Error("quality bin has hi < lo");
    if (i > 0 && bins[i].lo_pct < bins[i - 1].hi_pct)
      throw Error("quality bins must be ordered and non-overlapping");
    if (i > 0 && bins[i].lo_pct == bins[i].hi_pct && bins[i].lo_pct == bins[i - 1].hi_pct)
      throw Error("quality bins must be ordered and non-overlapping");
  }
}

struct ExperimentSettings {
  std::vector<imaging::AngleStrategy> angle_strategies = {
      imaging::AngleStrategy::single(0), imaging::AngleStrategy::single(90),
      imaging::AngleStrategy::single(180), imaging::AngleStrategy::single(270),
      imaging::AngleStrategy::average()};
  std::vector<double> radii = geo::default_radii();
  std::vector<QualityHandling> quality_handling = {QualityHandling{}};
  std::vector<QualityBin> quality_bins = default_quality_bins();
  std::vector<modeling::Algorithm> algorithms = {
      modeling::Algorithm::stepwise, modeling::Algorithm::rf, modeling::Algorithm::gbt,
      modeling::Algorithm::nn};
  std::vector<Pollutant> pollutants = {kAllPollutants.begin(), kAllPollutants.end()};
  std::size_t folds = 10;
  std::size_t workers = 1;
  bool use_group_features = true;
  bool r2_uses_training_mean = false;
  modeling::HyperGrid grids;

  void validate() const {
    if (angle_strategies.empty()) throw Error("config selects no angle strategy");
    if (radii.empty()) throw Error("config selects no radius");
    if (quality_handling.empty()) throw Error("config selects no quality handling");
    if (algorithms.empty()) throw Error("config selects no algorithm");
    if (pollutants.empty()) throw Error("config selects no pollutant");
    if (folds < 2) throw Error("folds must be >= 2");
    for (double r : radii)
      if (!(r > 0.0)) throw Error("radius must be > 0");
    validate_bins(quality_bins);
  }
};

// Everything a run needs besides input files.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  double lon0 = 113.26;
  double lat0 = 23.13;
  geo::GridSpec grid;
  ingest::CleaningPolicy cleaning;
  calibration::CalibrationOptions calibration;
  geo::SamplingOptions sampling;
  imaging::QualityThresholds quality;
  svi::SviConfig svi;
  ExperimentSettings experiment;

  geo::Projection projection() const { return geo::Projection(lon0, lat0); }

  void validate() const {
    grid.validate();
    cleaning.validate();
    if (!(calibration.clip_min > 0.0 && calibration.clip_min <= calibration.clip_max))
      throw Error("calibration clip range is invalid");
    if (!(sampling.spacing > 0.0)) throw Error("sampling spacing must be > 0");
    experiment.validate();
  }
};

namespace detail {
template <typename T>
void get_to(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}
}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::get_to;
  ExperimentConfig c;
  get_to(j, "seed", c.seed);
  if (j.contains("projection")) {
    get_to(j.at("projection"), "lon0", c.lon0);
    get_to(j.at("projection"), "lat0", c.lat0);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    get_to(g, "cell_size_m", c.grid.cell_size);
    if (g.contains("origin")) {
      const auto o = g.at("origin").get<std::vector<double>>();
      if (o.size() != 2) throw Error("grid.origin needs [x, y]");
      c.grid.origin = {o[0], o[1]};
    }
  }
  if (j.contains("cleaning")) {
    const auto& cl = j.at("cleaning");
    get_to(cl, "max_speed_mps", c.cleaning.max_speed_mps);
    get_to(cl, "drop_missing", c.cleaning.drop_missing);
    if (cl.contains("bbox")) {
      const auto b = cl.at("bbox").get<std::vector<double>>();
      if (b.size() != 4) throw Error("cleaning.bbox needs [min_lon, min_lat, max_lon, max_lat]");
      c.cleaning.bbox = {b[0], b[1], b[2], b[3]};
    }
    if (cl.contains("ranges")) {
      for (const auto& [name, range] : cl.at("ranges").items()) {
        auto p = parse_pollutant(name);
        if (!p) throw Error("unknown pollutant in cleaning.ranges: " + name);
        const auto mm = range.get<std::vector<double>>();
        if (mm.size() != 2) throw Error("cleaning range needs [min, max]");
        c.cleaning.ranges[index_of(*p)] = {mm[0], mm[1]};
      }
    }
  }
  if (j.contains("calibration")) {
    const auto& cal = j.at("calibration");
    get_to(cal, "clip_min", c.calibration.clip_min);
    get_to(cal, "clip_max", c.calibration.clip_max);
    get_to(cal, "utc_offset_seconds", c.calibration.utc_offset_seconds);
  }
  if (j.contains("sampling")) {
    get_to(j.at("sampling"), "spacing_m", c.sampling.spacing);
    get_to(j.at("sampling"), "dedup_m", c.sampling.dedup_radius);
  }
  if (j.contains("quality")) {
    const auto& q = j.at("quality");
    get_to(q, "blur_variance", c.quality.blur_variance);
    get_to(q, "over_value", c.quality.over_value);
    get_to(q, "under_value", c.quality.under_value);
    get_to(q, "exposure_fraction", c.quality.exposure_fraction);
    get_to(q, "distortion", c.quality.distortion);
  }
  if (j.contains("svi")) {
    const auto& s = j.at("svi");
    get_to(s, "endpoint_template", c.svi.endpoint_template);
    get_to(s, "rps_limit", c.svi.rps_limit);
    get_to(s, "cache_dir", c.svi.cache_dir);
    get_to(s, "offline_dir", c.svi.offline_dir);
    get_to(s, "max_retries", c.svi.max_retries);
    get_to(s, "concurrency", c.svi.concurrency);
    if (s.contains("backoff_base_ms"))
      c.svi.backoff_base = std::chrono::milliseconds(s.at("backoff_base_ms").get<std::int64_t>());
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    auto& x = c.experiment;
    if (e.contains("angle_strategies")) {
      x.angle_strategies.clear();
      for (const auto& s : e.at("angle_strategies")) {
        const std::string name = s.is_string() ? s.get<std::string>() : std::to_string(s.get<int>());
        auto a = imaging::parse_angle_strategy(name);
        if (!a) throw Error("unknown angle strategy '" + name + "'");
        x.angle_strategies.push_back(*a);
      }
    }
    get_to(e, "radii", x.radii);
    if (e.contains("quality_handling")) {
      x.quality_handling.clear();
      for (const auto& s : e.at("quality_handling"))
        x.quality_handling.push_back(QualityHandling::parse(s.get<std::string>()));
    }
    if (e.contains("quality_bins")) {
      x.quality_bins.clear();
      for (const auto& b : e.at("quality_bins")) {
        const auto v = b.get<std::vector<double>>();
        if (v.size() != 2) throw Error("quality bin needs [lo, hi]");
        x.quality_bins.push_back({v[0], v[1]});
      }
    }
    if (e.contains("algorithms")) {
      x.algorithms.clear();
      for (const auto& s : e.at("algorithms"))
        x.algorithms.push_back(modeling::parse_algorithm(s.get<std::string>()));
    }
    if (e.contains("pollutants")) {
      x.pollutants.clear();
      for (const auto& s : e.at("pollutants")) {
        auto p = parse_pollutant(s.get<std::string>());
        if (!p) throw Error("unknown pollutant '" + s.get<std::string>() + "'");
        x.pollutants.push_back(*p);
      }
    }
    get_to(e, "folds", x.folds);
    get_to(e, "workers", x.workers);
    get_to(e, "use_group_features", x.use_group_features);
    get_to(e, "r2_uses_training_mean", x.r2_uses_training_mean);
    if (e.contains("grids")) x.grids = modeling::HyperGrid::from_json(e.at("grids"));
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json ranges;
  for (Pollutant p : kAllPollutants)
    ranges[std::string(to_string(p))] = {c.cleaning.ranges[index_of(p)].min,
                                         c.cleaning.ranges[index_of(p)].max};
  nlohmann::json angles = nlohmann::json::array();
  for (const auto& a : c.experiment.angle_strategies) angles.push_back(a.name());
  nlohmann::json qh = nlohmann::json::array();
  for (const auto& q : c.experiment.quality_handling) qh.push_back(q.name());
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : c.experiment.quality_bins) bins.push_back({b.lo_pct, b.hi_pct});
  nlohmann::json algs = nlohmann::json::array();
  for (auto a : c.experiment.algorithms) algs.push_back(to_string(a));
  nlohmann::json pols = nlohmann::json::array();
  for (auto p : c.experiment.pollutants) pols.push_back(to_string(p));
  return {
      {"seed", c.seed},
      {"projection", {{"lon0", c.lon0}, {"lat0", c.lat0}}},
      {"grid", {{"cell_size_m", c.grid.cell_size}, {"origin", {c.grid.origin.x, c.grid.origin.y}}}},
      {"cleaning",
       {{"max_speed_mps", c.cleaning.max_speed_mps},
        {"drop_missing", c.cleaning.drop_missing},
        {"bbox",
         {c.cleaning.bbox.min_lon, c.cleaning.bbox.min_lat, c.cleaning.bbox.max_lon,
          c.cleaning.bbox.max_lat}},
        {"ranges", ranges}}},
      {"calibration",
       {{"clip_min", c.calibration.clip_min},
        {"clip_max", c.calibration.clip_max},
        {"utc_offset_seconds", c.calibration.utc_offset_seconds}}},
      {"sampling", {{"spacing_m", c.sampling.spacing}, {"dedup_m", c.sampling.dedup_radius}}},
      {"quality",
       {{"blur_variance", c.quality.blur_variance},
        {"over_value", c.quality.over_value},
        {"under_value", c.quality.under_value},
        {"exposure_fraction", c.quality.exposure_fraction},
        {"distortion", c.quality.distortion}}},
      {"svi",
       {{"endpoint_template", c.svi.endpoint_template},
        {"rps_limit", c.svi.rps_limit},
        {"cache_dir", c.svi.cache_dir},
        {"offline_dir", c.svi.offline_dir},
        {"max_retries", c.svi.max_retries},
        {"concurrency", c.svi.concurrency},
        {"backoff_base_ms", c.svi.backoff_base.count()}}},
      {"experiment",
       {{"angle_strategies", angles},
        {"radii", c.experiment.radii},
        {"quality_handling", qh},
        {"quality_bins", bins},
        {"algorithms", algs},
        {"pollutants", pols},
        {"folds", c.experiment.folds},
        {"workers", c.experiment.workers},
        {"use_group_features", c.experiment.use_group_features},
        {"r2_uses_training_mean", c.experiment.r2_uses_training_mean},
        {"grids", c.experiment.grids.to_json()}}}};
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid config " + path.string() + ": " + e.what());
  }
}

inline void save_config(const std::filesystem::path& path, const ExperimentConfig& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << config_to_json(c).dump(2) << '\n';
}

}  // namespace streetair::harness

#endif  // STREETAIR_HARNESS_CONFIG_HPP
