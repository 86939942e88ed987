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
#ifndef STREETAIR_HARNESS_PIPELINE_HPP
#define STREETAIR_HARNESS_PIPELINE_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streetair/aggregation.hpp"
#include "streetair/calibration.hpp"
#include "streetair/harness/config.hpp"
#include "streetair/imaging.hpp"
#include "streetair/ingest.hpp"
#include "streetair/sampling.hpp"

namespace streetair::harness {

inline std::string image_id(std::uint64_t point_id, int offset) {
  return std::to_string(point_id) + "/" + std::to_string(offset);
}

inline std::size_t offset_slot(int offset) {
  switch (offset) {
    case 0: return 0;
    case 90: return 1;
    case 180: return 2;
    case 270: return 3;
  }
  throw Error("view offset must be 0, 90, 180 or 270");
}

// Per sample point, the four views (by offset slot) that have a label map.
using ViewStore = std::map<std::uint64_t, std::array<std::optional<imaging::ImageObservation>, 4>>;

inline void add_view(ViewStore& store, std::uint64_t point_id, int offset,
                     const LabelMap& labels, bool low_quality) {
  imaging::ImageObservation obs;
  obs.offset = offset;
  obs.features = imaging::label_ratios(labels);
  obs.low_quality = low_quality;
  store[point_id][offset_slot(offset)] = std::move(obs);
}

// Rows for every (location, radius, angle strategy) with at least one
// contributing image. Ordered by location id, radius, then strategy order.
inline std::vector<imaging::FeatureRow> build_feature_rows(
    const geo::SamplingPlan& plan, const ViewStore& views,
    const std::vector<imaging::AngleStrategy>& strategies, const imaging::BufferOptions& opts) {
  std::vector<imaging::FeatureRow> rows;
  for (const auto& [key, pts] : plan.entries) {
    std::vector<imaging::PointObservations> obs;
    for (const auto& p : pts) {
      auto it = views.find(p.point_id);
      if (it == views.end()) continue;
      imaging::PointObservations po;
      po.point_id = p.point_id;
      for (const auto& v : it->second)
        if (v) po.images.push_back(*v);
      if (!po.images.empty()) obs.push_back(std::move(po));
    }
    for (const auto& s : strategies) {
      auto bf = imaging::aggregate_buffer(obs, s, opts);
      if (!bf) continue;
      imaging::FeatureRow r;
      r.location_id = key.location_id;
      r.radius = key.radius;
      r.angle_strategy = s.name();
      r.n_points = bf->n_points;
      r.n_images = bf->n_images;
      r.low_quality_proportion = bf->low_quality_proportion;
      r.features = bf->features;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

// Raw records to calibrated grid locations.
struct MonitoringStages {
  ingest::CleaningResult cleaned;
  calibration::FactorResult factors;
  calibration::ApplyResult calibrated;
  std::vector<geo::AggregationLocation> locations;
};

inline MonitoringStages run_monitoring_stages(const std::vector<ingest::MonitoringRecord>& raw,
                                              const ingest::ReferenceSeries& reference,
                                              const ExperimentConfig& cfg) {
  MonitoringStages s;
  s.cleaned = ingest::clean_records(raw, cfg.cleaning);
  s.factors = calibration::compute_adjustment_factors(reference, cfg.calibration);
  s.calibrated = calibration::apply_calibration(s.cleaned.kept, s.factors.table);
  s.locations = geo::aggregate_to_grid(s.calibrated.records, cfg.projection(), cfg.grid);
  return s;
}

}  // namespace streetair::harness

#endif  // STREETAIR_HARNESS_PIPELINE_HPP
