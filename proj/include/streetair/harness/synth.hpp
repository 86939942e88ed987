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
#ifndef STREETAIR_HARNESS_SYNTH_HPP
#define STREETAIR_HARNESS_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "streetair/aggregation.hpp"
#include "streetair/harness/config.hpp"
#include "streetair/harness/experiment.hpp"
#include "streetair/harness/pipeline.hpp"
#include "streetair/image.hpp"
#include "streetair/imaging.hpp"
#include "streetair/ingest.hpp"
#include "streetair/random.hpp"
#include "streetair/sampling.hpp"
#include "streetair/timeutil.hpp"

namespace streetair::harness {

// Seeded synthetic city: a road grid, smooth land-use fields that drive the
// label maps, a pollution field defined on the clean street-level features,
// a taxi fleet sampling it under a diurnal cycle, and paired RGB images.
struct SynthOptions {
  std::uint64_t seed = 7;
  double extent_m = 3000.0;
  double road_spacing_m = 150.0;
  double road_offset_m = 75.0;
  double land_use_scale_m = 250.0;
  int label_width = 32;
  int label_height = 16;
  int image_width = 32;
  int image_height = 16;
  int taxis = 12;
  int hours = 24;
  int record_interval_s = 15;
  double taxi_speed_mps = 8.0;
  UnixSeconds start = 1714521600;  // 2024-05-01T00:00:00Z
  // Share of label maps whose human-activity pixels are relabeled as road.
  double corrupt_fraction = 0.0;
  // Share of views with a defective photo but correct labels.
  double natural_defect_fraction = 0.02;
  double measurement_noise = 0.15;
  double truth_noise = 0.03;
  double glitch_fraction = 0.002;
  // Radius of the features that define the pollution field.
  double truth_radius_m = 100.0;
};

using ViewArray4Labels = std::array<LabelMap, 4>;
using ViewArray4Images = std::array<RgbImage, 4>;

struct SynthCity {
  SynthOptions options;
  ExperimentConfig config;
  std::vector<geo::Polyline2> roads;
  geo::NetworkLattice lattice;
  std::map<std::uint64_t, ViewArray4Labels> labels;
  std::map<std::uint64_t, ViewArray4Images> images;
  std::map<std::uint64_t, std::array<bool, 4>> corrupted;
  std::map<std::string, PollutantValues> truth;  // per grid cell id
  std::vector<ingest::MonitoringRecord> records;
  ingest::ReferenceSeries reference;

  ingest::RoadNetwork road_network() const {
    ingest::RoadNetwork net;
    for (const auto& r : roads) net.polylines.push_back({r, ingest::Crs::meters});
    return net;
  }
};

namespace synth_detail {

// Smooth field in (0, 1): logistic of a sum of Gaussian bumps.
class LatentField {
 public:
  LatentField(Rng& rng, double extent, double scale) : scale_(scale) {
    const int n = std::max(4, static_cast<int>(std::lround(1.5 * (extent / scale) * (extent / scale))));
    for (int k = 0; k < n; ++k)
      bumps_.push_back({rng.uniform(-scale, extent + scale), rng.uniform(-scale, extent + scale),
                        rng.normal(0.0, 2.0)});
  }
  double operator()(geo::Point2 p) const {
    double s = 0.0;
    for (const auto& b : bumps_) {
      const double dx = p.x - b.x, dy = p.y - b.y;
      s += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * scale_ * scale_));
    }
    return 1.0 / (1.0 + std::exp(-s));
  }

 private:
  struct Bump {
    double x, y, a;
  };
  double scale_;
  std::vector<Bump> bumps_;
};

using imaging::SegClass;

inline std::array<double, imaging::kClassCount> class_weights(double veg, double build,
                                                              double traffic, bool along) {
  std::array<double, imaging::kClassCount> w{};
  auto set = [&w](SegClass c, double v) { w[static_cast<std::size_t>(c)] = v; };
  set(SegClass::sky, 0.12 + 0.10 * (1.0 - build));
  set(SegClass::road, along ? 0.22 + 0.10 * traffic : 0.08);
  set(SegClass::sidewalk, 0.05);
  set(SegClass::building, (along ? 0.15 : 0.32) * build + 0.02);
  set(SegClass::wall, 0.03 * build);
  set(SegClass::fence, 0.01 + 0.02 * veg);
  set(SegClass::vegetation, (along ? 0.15 : 0.32) * veg + 0.02);
  set(SegClass::terrain, 0.04 * veg);
  set(SegClass::car, (along ? 0.14 : 0.05) * traffic);
  set(SegClass::bus, 0.025 * traffic);
  set(SegClass::truck, 0.03 * traffic * (1.0 - build));
  set(SegClass::motorcycle, 0.01 * traffic);
  set(SegClass::person, 0.04 * build * traffic);
  set(SegClass::rider, 0.006);
  set(SegClass::bicycle, 0.006);
  set(SegClass::pole, 0.012);
  set(SegClass::traffic_light, 0.005);
  set(SegClass::traffic_sign, 0.006);
  set(SegClass::train, 0.002);
  return w;
}

inline LabelMap draw_labels(std::array<double, imaging::kClassCount> w, int width, int height,
                            Rng& rng) {
  double total = 0.0;
  for (double& v : w) {
    v *= std::exp(0.2 * rng.normal());
    total += v;
  }
  std::array<double, imaging::kClassCount> cdf{};
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) cdf[k] = (acc += w[k] / total);
  LabelMap map(width, height, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
      map.set(x, y, static_cast<std::uint8_t>(k));
    }
  return map;
}

inline void inflate_road(LabelMap& map) {
  const auto& human = imaging::group_members()[static_cast<std::size_t>(imaging::Group::human)];
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (std::find(human.begin(), human.end(), map.at(x, y)) != human.end())
        map.set(x, y, static_cast<std::uint8_t>(SegClass::road));
}

inline std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Textured near-gray photo.
inline RgbImage normal_image(int w, int h, Rng& rng) {
  RgbImage img(w, h);
  const double base = rng.uniform(100.0, 140.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = base + rng.normal(0.0, 22.0);
      img.set(x, y,
              {clamp_byte(t + rng.normal(0.0, 3.0)), clamp_byte(t + rng.normal(0.0, 3.0)),
               clamp_byte(t + rng.normal(0.0, 3.0))});
    }
  return img;
}

// Defect kinds cycle through blur, overexposure, underexposure, color cast.
inline RgbImage defective_image(int w, int h, int kind, Rng& rng) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      switch (kind % 4) {
        case 0: {
          const auto v = clamp_byte(120.0 + rng.normal(0.0, 0.5));
          img.set(x, y, {v, v, v});
          break;
        }
        case 1: {
          const auto v = clamp_byte(251.0 + rng.normal(0.0, 2.0));
          img.set(x, y, {v, v, v});
          break;
        }
        case 2: {
          const auto v = clamp_byte(8.0 + rng.normal(0.0, 2.0));
          img.set(x, y, {v, v, v});
          break;
        }
        default: img.set(x, y, {clamp_byte(150.0 + rng.normal(0.0, 40.0)), 0, 0}); break;
      }
    }
  return img;
}

inline double diurnal(Pollutant p, double hour) {
  static constexpr std::array<double, kPollutantCount> amp = {0.35, 0.30, 0.20, 0.25};
  static constexpr std::array<double, kPollutantCount> phase = {8.0, 9.0, 11.0, 10.0};
  const auto k = index_of(p);
  return 1.0 + amp[k] * std::sin(2.0 * std::numbers::pi * (hour - phase[k]) / 24.0);
}

}  // namespace synth_detail

// Pollution as a nonlinear function of standardized street-level features:
// a saturating traffic term, a threshold on built-up share, interactions and a
// nature offset. Coefficients differ per pollutant.
inline PollutantValues pollution_field(const std::array<double, 5>& z) {
  const double a = z[0];  // vehicles
  const double b = z[1];  // nature
  const double c = z[2];  // building
  const double d = z[3];  // road
  const double e = z[4];  // person
  static constexpr std::array<double, kPollutantCount> mean = {40.0, 35.0, 30.0, 50.0};
  static constexpr std::array<double, kPollutantCount> scale = {9.0, 7.0, 5.0, 8.0};
  static constexpr std::array<std::array<double, 6>, kPollutantCount> w = {{
      {1.4, 0.7, 1.2, 0.8, 0.6, 0.5},
      {1.2, 0.6, 1.0, 0.9, 0.5, 0.4},
      {0.9, 0.9, 0.8, 0.6, 0.8, 0.6},
      {1.0, 0.8, 1.1, 0.7, 0.7, 0.5},
  }};
  PollutantValues out{};
  for (std::size_t k = 0; k < kPollutantCount; ++k) {
    const double s = w[k][0] * std::tanh(2.0 * a) - w[k][1] * b +
                     w[k][2] * (c > 0.3 ? 1.0 + std::max(a, 0.0) : 0.0) + w[k][3] * a * c -
                     w[k][4] * std::max(d, 0.0) * std::max(d, 0.0) + w[k][5] * std::abs(e);
    out[k] = std::max(1.0, mean[k] + scale[k] * s);
  }
  return out;
}

inline SynthCity generate_city(const SynthOptions& opt) {
  using namespace synth_detail;
  if (!(opt.extent_m > 0.0) || !(opt.road_spacing_m > 0.0)) throw Error("synth extent and road spacing must be > 0");
  if (opt.taxis < 1 || opt.hours < 1 || opt.record_interval_s < 1) throw Error("synth needs taxis, hours and interval >= 1");
  if (!(opt.corrupt_fraction >= 0.0 && opt.corrupt_fraction <= 1.0)) throw Error("corrupt_fraction must be in [0, 1]");

  SynthCity city;
  city.options = opt;
  auto& cfg = city.config;
  cfg.seed = opt.seed;
  const geo::Projection proj = cfg.projection();
  {
    const auto lo = proj.unproject({-500.0, -500.0});
    const auto hi = proj.unproject({opt.extent_m + 500.0, opt.extent_m + 500.0});
    cfg.cleaning.bbox = {lo.lon, lo.lat, hi.lon, hi.lat};
  }

  // Roads: closed grid of straight lines.
  std::vector<double> lines;
  for (double v = opt.road_offset_m; v <= opt.extent_m + 1e-9; v += opt.road_spacing_m) lines.push_back(v);
  if (lines.size() < 2) throw Error("synth extent too small for two roads");
  const double lo = lines.front(), hi = lines.back();
  for (double v : lines) city.roads.push_back({{v, lo}, {v, hi}});
  for (double v : lines) city.roads.push_back({{lo, v}, {hi, v}});
  city.lattice = geo::NetworkLattice(city.roads, cfg.sampling);

  Rng field_rng(derive_seed(opt.seed, {1}));
  const LatentField veg(field_rng, opt.extent_m, opt.land_use_scale_m);
  const LatentField build(field_rng, opt.extent_m, opt.land_use_scale_m);
  const LatentField traffic(field_rng, opt.extent_m, opt.land_use_scale_m);
  const LatentField defect_bias(field_rng, opt.extent_m, 2.0 * opt.land_use_scale_m);

  // Corruption probability follows a smooth field so low-quality shares vary
  // across locations.
  double bias_mean = 0.0;
  for (const auto& p : city.lattice.points()) bias_mean += defect_bias(p.position);
  bias_mean /= static_cast<double>(std::max<std::size_t>(city.lattice.points().size(), 1));

  ViewStore clean;
  for (const auto& p : city.lattice.points()) {
    Rng rng(derive_seed(opt.seed, {2, p.point_id}));
    Rng corrupt_rng(derive_seed(opt.seed, {3, p.point_id}));
    const double v = veg(p.position), b = build(p.position), t = traffic(p.position);
    const double p_corrupt =
        std::min(1.0, opt.corrupt_fraction * defect_bias(p.position) / std::max(bias_mean, 1e-12));
    ViewArray4Labels maps;
    ViewArray4Images imgs;
    std::array<bool, 4> bad{};
    for (std::size_t s = 0; s < 4; ++s) {
      const bool along = s % 2 == 0;
      maps[s] = draw_labels(class_weights(v, b, t, along), opt.label_width, opt.label_height, rng);
      add_view(clean, p.point_id, static_cast<int>(geo::kHeadingOffsets[s]), maps[s], false);
      const double u_corrupt = corrupt_rng.uniform();
      const double u_defect = corrupt_rng.uniform();
      const int kind = static_cast<int>(corrupt_rng.index(4));
      bad[s] = u_corrupt < p_corrupt;
      if (bad[s]) inflate_road(maps[s]);
      imgs[s] = (bad[s] || u_defect < opt.natural_defect_fraction)
                    ? defective_image(opt.image_width, opt.image_height, kind, rng)
                    : normal_image(opt.image_width, opt.image_height, rng);
    }
    city.labels.emplace(p.point_id, std::move(maps));
    city.images.emplace(p.point_id, std::move(imgs));
    city.corrupted.emplace(p.point_id, bad);
  }

  // Truth per cell from clean average-strategy features within truth_radius.
  const auto n_cells = static_cast<long long>(std::ceil(opt.extent_m / cfg.grid.cell_size));
  std::vector<geo::AggregationLocation> cells;
  for (long long i = 0; i < n_cells; ++i)
    for (long long j = 0; j < n_cells; ++j) {
      geo::AggregationLocation loc;
      loc.cell = {i, j};
      loc.centroid = geo::cell_center(loc.cell, cfg.grid);
      cells.push_back(loc);
    }
  const auto plan = geo::build_sampling_plan(cells, city.lattice, {opt.truth_radius_m});
  const auto rows = build_feature_rows(plan, clean, {imaging::AngleStrategy::average()}, {});
  auto grp = [](const imaging::FeatureVector& f, imaging::Group g) {
    return f.group[static_cast<std::size_t>(g)];
  };
  auto cls = [](const imaging::FeatureVector& f, SegClass c) {
    return f.ratio[static_cast<std::size_t>(c)];
  };
  std::vector<std::array<double, 5>> raw;
  for (const auto& r : rows)
    raw.push_back({grp(r.features, imaging::Group::vehicles), grp(r.features, imaging::Group::nature),
                   cls(r.features, SegClass::building), cls(r.features, SegClass::road),
                   cls(r.features, SegClass::person)});
  std::array<double, 5> mu{}, sd{};
  for (const auto& v : raw)
    for (std::size_t k = 0; k < 5; ++k) mu[k] += v[k];
  for (double& m : mu) m /= static_cast<double>(std::max<std::size_t>(raw.size(), 1));
  for (const auto& v : raw)
    for (std::size_t k = 0; k < 5; ++k) sd[k] += (v[k] - mu[k]) * (v[k] - mu[k]);
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(std::max<std::size_t>(raw.size(), 1)));
  Rng truth_rng(derive_seed(opt.seed, {4}));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::array<double, 5> z{};
    for (std::size_t k = 0; k < 5; ++k) z[k] = sd[k] > 0.0 ? (raw[r][k] - mu[k]) / sd[k] : 0.0;
    PollutantValues v = pollution_field(z);
    for (double& x : v) x *= std::exp(truth_rng.normal(0.0, opt.truth_noise));
    city.truth[rows[r].location_id] = v;
  }

  // Reference station: background times the diurnal cycle, hourly.
  static constexpr std::array<double, kPollutantCount> background = {30.0, 28.0, 25.0, 40.0};
  for (int h = 0; h < opt.hours; ++h) {
    const UnixSeconds t = opt.start + static_cast<UnixSeconds>(h) * 3600;
    const double hour_of_day = static_cast<double>(day_hour(t, 0).hour);
    for (Pollutant p : kAllPollutants)
      city.reference.of(p).push_back({t, background[index_of(p)] * diurnal(p, hour_of_day)});
  }

  // Taxis random-walk the grid and sample the field under the same cycle.
  const double step = opt.taxi_speed_mps * opt.record_interval_s;
  const auto n_lines = static_cast<long long>(lines.size());
  const long long steps = static_cast<long long>(opt.hours) * 3600 / opt.record_interval_s;
  Rng noise_rng(derive_seed(opt.seed, {5}));
  for (int taxi = 0; taxi < opt.taxis; ++taxi) {
    Rng rng(derive_seed(opt.seed, {6, static_cast<std::uint64_t>(taxi)}));
    long long ix = static_cast<long long>(rng.index(lines.size()));
    long long iy = static_cast<long long>(rng.index(lines.size()));
    double along = 0.0;  // distance travelled from (ix, iy) toward the heading
    int dir = static_cast<int>(rng.index(4));
    static constexpr int dx[4] = {1, 0, -1, 0};
    static constexpr int dy[4] = {0, 1, 0, -1};
    auto valid = [&](long long x, long long y, int d) {
      const long long nx = x + dx[d], ny = y + dy[d];
      return nx >= 0 && ny >= 0 && nx < n_lines && ny < n_lines;
    };
    if (!valid(ix, iy, dir)) dir = (dir + 2) % 4;
    for (long long k = 0; k < steps; ++k) {
      const UnixSeconds t = opt.start + k * opt.record_interval_s;
      const geo::Point2 pos{lines[static_cast<std::size_t>(ix)] + dx[dir] * along,
                            lines[static_cast<std::size_t>(iy)] + dy[dir] * along};
      ingest::MonitoringRecord rec;
      rec.taxi_id = "taxi" + std::to_string(taxi);
      rec.timestamp = t;
      const auto ll = proj.unproject(pos);
      rec.lon = ll.lon;
      rec.lat = ll.lat;
      const auto cell = geo::location_id(geo::assign_grid_cell(pos.x, pos.y, cfg.grid));
      auto it = city.truth.find(cell);
      const double hour_of_day = static_cast<double>(day_hour(t, 0).hour);
      for (Pollutant p : kAllPollutants) {
        const double base = it != city.truth.end() ? it->second[index_of(p)] : background[index_of(p)];
        rec.value(p) = base * diurnal(p, hour_of_day) *
                       std::exp(noise_rng.normal(0.0, opt.measurement_noise));
      }
      const double g = noise_rng.uniform();
      if (g < opt.glitch_fraction / 3.0) {
        rec.value(kAllPollutants[noise_rng.index(kPollutantCount)]) = quiet_nan();
      } else if (g < 2.0 * opt.glitch_fraction / 3.0) {
        rec.value(kAllPollutants[noise_rng.index(kPollutantCount)]) = -5.0;
      } else if (g < opt.glitch_fraction) {
        const auto jump = proj.unproject({pos.x + 2500.0, pos.y});
        rec.lon = jump.lon;
        rec.lat = jump.lat;
      }
      city.records.push_back(std::move(rec));

      // Advance; turn at intersections.
      double remaining = step;
      while (remaining > 0.0) {
        const double to_next = opt.road_spacing_m - along;
        if (remaining < to_next) {
          along += remaining;
          remaining = 0.0;
        } else {
          remaining -= to_next;
          ix += dx[dir];
          iy += dy[dir];
          along = 0.0;
          int choices[4];
          int n = 0;
          for (int d = 0; d < 4; ++d)
            if (d != (dir + 2) % 4 && valid(ix, iy, d)) choices[n++] = d;
          dir = n > 0 ? choices[rng.index(static_cast<std::size_t>(n))] : (dir + 2) % 4;
        }
      }
    }
  }

  // Small grids keep a full synthetic run within desk-scale time.
  auto& ex = cfg.experiment;
  ex.grids.gbt.eta = {0.1};
  ex.grids.gbt.min_child_weight = {1};
  ex.grids.gbt.max_depth = {3};
  ex.grids.gbt.gamma = {0};
  ex.grids.gbt.subsample = {1};
  ex.grids.gbt.n_rounds = 100;
  ex.grids.rf.n_trees = {50};
  ex.grids.rf.max_depth = {8};
  ex.grids.nn.learning_rate = {0.001};
  ex.grids.nn.batch_size = {32};
  ex.grids.nn.epochs = 30;
  return city;
}

// Full analysis path from a city's raw artifacts to matrix inputs.
inline PreparedData prepare_from_city(const SynthCity& city, const ExperimentConfig& cfg) {
  PreparedData out;
  const auto stages = run_monitoring_stages(city.records, city.reference, cfg);
  out.locations = stages.locations;
  const geo::NetworkLattice lattice(city.roads, cfg.sampling);
  const auto plan = geo::build_sampling_plan(out.locations, lattice, cfg.experiment.radii);
  ViewStore views;
  for (const auto& [pid, maps] : city.labels) {
    const auto& imgs = city.images.at(pid);
    for (std::size_t s = 0; s < 4; ++s) {
      const bool low = imaging::assess_quality(imgs[s], cfg.quality).low_quality();
      add_view(views, pid, static_cast<int>(geo::kHeadingOffsets[s]), maps[s], low);
    }
  }
  imaging::BufferOptions keep, drop;
  drop.drop_low_quality = true;
  out.features = build_feature_rows(plan, views, cfg.experiment.angle_strategies, keep);
  out.features_hq = build_feature_rows(plan, views, cfg.experiment.angle_strategies, drop);
  return out;
}

}  // namespace streetair::harness

#endif  // STREETAIR_HARNESS_SYNTH_HPP
