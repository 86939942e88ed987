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
#ifndef STREETAIR_CALIBRATION_HPP
#define STREETAIR_CALIBRATION_HPP

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streetair/common.hpp"
#include "streetair/csv.hpp"
#include "streetair/geospatial.hpp"
#include "streetair/ingest.hpp"
#include "streetair/timeutil.hpp"

// Multiplicative background correction: every mobile reading is scaled by
// (fixed-site daily mean) / (fixed-site hourly value) for its date and hour.
namespace streetair::calibration {

struct CalibrationOptions {
  double clip_min = 0.1;
  double clip_max = 10.0;
  // Offset of the local clock used to define "date" and "hour of day".
  std::int64_t utc_offset_seconds = 0;
};

struct HourlyKey {
  geo::CellIndex cell;
  DayHour time;
  auto operator<=>(const HourlyKey&) const = default;
};

struct HourlyMean {
  PollutantValues mean{};
  std::array<std::size_t, kPollutantCount> count{};
};

// Per (cell, date, hour): arithmetic mean of each pollutant's finite
// readings. Records in different hours or cells never pool.
inline std::map<HourlyKey, HourlyMean> hourly_location_aggregate(
    const std::vector<ingest::MonitoringRecord>& records, const geo::Projection& proj,
    const geo::GridSpec& grid, std::int64_t utc_offset_seconds = 0) {
  std::map<HourlyKey, HourlyMean> sums;
  for (const auto& r : records) {
    const geo::Point2 xy = proj.project(r.lon, r.lat);
    const HourlyKey key{geo::assign_grid_cell(xy.x, xy.y, grid),
                        day_hour(r.timestamp, utc_offset_seconds)};
    auto& acc = sums[key];
    for (std::size_t k = 0; k < kPollutantCount; ++k) {
      if (!std::isfinite(r.values[k])) continue;
      acc.mean[k] += r.values[k];
      ++acc.count[k];
    }
  }
  for (auto& [key, acc] : sums)
    for (std::size_t k = 0; k < kPollutantCount; ++k)
      acc.mean[k] = acc.count[k] ? acc.mean[k] / static_cast<double>(acc.count[k])
                                 : quiet_nan();
  return sums;
}

class AdjustmentFactorTable {
 public:
  void set(Pollutant p, DayHour t, double factor) { factors_[index_of(p)][t] = factor; }

  std::optional<double> factor(Pollutant p, DayHour t) const {
    const auto& m = factors_[index_of(p)];
    auto it = m.find(t);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  const std::map<DayHour, double>& of(Pollutant p) const { return factors_[index_of(p)]; }

  std::int64_t utc_offset_seconds = 0;

 private:
  std::array<std::map<DayHour, double>, kPollutantCount> factors_;
};

struct FactorResult {
  AdjustmentFactorTable table;
  std::vector<std::string> warnings;
};

// factor(d, h) = mean of the day's available hourly values / value(d, h),
// clipped to [clip_min, clip_max]. Days use only the hours present.
inline FactorResult compute_adjustment_factors(const ingest::ReferenceSeries& reference,
                                               const CalibrationOptions& opts = {}) {
  if (!(opts.clip_min > 0.0) || !(opts.clip_min <= opts.clip_max))
    throw Error("calibration clip bounds must satisfy 0 < min <= max");
  FactorResult out;
  out.table.utc_offset_seconds = opts.utc_offset_seconds;
  for (Pollutant p : kAllPollutants) {
    std::map<std::int64_t, std::vector<std::pair<int, double>>> by_day;
    for (const auto& s : reference.of(p)) {
      const DayHour t = day_hour(s.timestamp, opts.utc_offset_seconds);
      by_day[t.day].emplace_back(t.hour, s.value);
    }
    for (const auto& [day, hours] : by_day) {
      double sum = 0.0;
      for (const auto& [h, v] : hours) sum += v;
      const double daily_mean = sum / static_cast<double>(hours.size());
      for (const auto& [h, v] : hours) {
        double f = 1.0;
        if (!(v > 0.0)) {
          out.warnings.push_back(std::string(to_string(p)) + " " + format_date(day) +
                                 " hour " + std::to_string(h) +
                                 ": non-positive reference value, factor set to 1");
        } else {
          f = std::clamp(daily_mean / v, opts.clip_min, opts.clip_max);
        }
        out.table.set(p, {day, h}, f);
      }
    }
  }
  return out;
}

struct ApplyResult {
  std::vector<ingest::MonitoringRecord> records;
  // Readings left unchanged because no factor covered their hour.
  std::size_t missing_factor_count = 0;
};

inline ApplyResult apply_calibration(std::vector<ingest::MonitoringRecord> records,
                                     const AdjustmentFactorTable& table) {
  ApplyResult out;
  for (auto& r : records) {
    const DayHour t = day_hour(r.timestamp, table.utc_offset_seconds);
    for (Pollutant p : kAllPollutants) {
      double& v = r.value(p);
      if (std::isnan(v)) continue;
      if (auto f = table.factor(p, t)) {
        v *= *f;
      } else {
        ++out.missing_factor_count;
      }
    }
  }
  out.records = std::move(records);
  return out;
}

inline void write_factors_csv(const std::filesystem::path& path,
                              const AdjustmentFactorTable& table) {
  csv::Writer w(path);
  w.row({"pollutant", "date", "hour", "factor"});
  for (Pollutant p : kAllPollutants)
    for (const auto& [t, f] : table.of(p))
      w.row({std::string(to_string(p)), format_date(t.day), std::to_string(t.hour),
             format_double(f)});
}

}  // namespace streetair::calibration

#endif  // STREETAIR_CALIBRATION_HPP
