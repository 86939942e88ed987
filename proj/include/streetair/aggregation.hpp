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
#ifndef STREETAIR_AGGREGATION_HPP
#define STREETAIR_AGGREGATION_HPP

#include <algorithm>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "streetair/common.hpp"
#include "streetair/csv.hpp"
#include "streetair/geospatial.hpp"
#include "streetair/ingest.hpp"

namespace streetair::geo {

/// One grid cell holding the median of its calibrated observations.
struct AggregationLocation {
  CellIndex cell;
  Point2 centroid;
  PollutantValues median{};
  std::size_t count = 0;
  // Filled in once image quality is known; NaN until then.
  double low_quality_proportion = quiet_nan();

  std::string id() const { return location_id(cell); }
};

// Median of the values; the span is reordered. Even counts average the two
// middle elements.
inline double median_inplace(std::span<double> v) {
  if (v.empty()) throw Error("median of empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

struct AggregationOptions {
  std::size_t min_count = 1;
};

// Cells are emitted in (i, j) order. A cell is omitted when it has fewer than
// min_count records or some pollutant has no finite reading.
inline std::vector<AggregationLocation> aggregate_to_grid(
    const std::vector<ingest::MonitoringRecord>& records, const Projection& proj,
    const GridSpec& grid, const AggregationOptions& opts = {}) {
  grid.validate();
  std::map<CellIndex, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Point2 xy = proj.project(records[i].lon, records[i].lat);
    members[assign_grid_cell(xy.x, xy.y, grid)].push_back(i);
  }
  std::vector<AggregationLocation> out;
  std::vector<double> buf;
  for (const auto& [cell, idx] : members) {
    if (idx.size() < std::max<std::size_t>(opts.min_count, 1)) continue;
    AggregationLocation loc;
    loc.cell = cell;
    loc.centroid = cell_center(cell, grid);
    loc.count = idx.size();
    bool complete = true;
    for (std::size_t k = 0; k < kPollutantCount && complete; ++k) {
      buf.clear();
      for (std::size_t i : idx)
        if (std::isfinite(records[i].values[k])) buf.push_back(records[i].values[k]);
      if (buf.empty()) {
        complete = false;
        break;
      }
      loc.median[k] = median_inplace(buf);
    }
    if (complete) out.push_back(loc);
  }
  return out;
}

inline const std::vector<std::string>& locations_header() {
  static const std::vector<std::string> h = {"location_id", "i",   "j",    "x",
                                             "y",           "count", "no", "no2",
                                             "pm25",        "pm10", "low_quality_prop"};
  return h;
}

inline void write_locations_csv(const std::filesystem::path& path,
                                const std::vector<AggregationLocation>& locs) {
  csv::Writer w(path);
  w.row(locations_header());
  for (const auto& l : locs)
    w.row({l.id(), std::to_string(l.cell.i), std::to_string(l.cell.j),
           format_double(l.centroid.x), format_double(l.centroid.y),
           std::to_string(l.count), format_double(l.median[0]),
           format_double(l.median[1]), format_double(l.median[2]),
           format_double(l.median[3]), format_double(l.low_quality_proportion)});
}

inline std::vector<AggregationLocation> read_locations_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_table(path);
  if (t.header != locations_header())
    throw Error("unexpected locations header in " + path.string());
  std::vector<AggregationLocation> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != locations_header().size())
      throw Error("bad locations row at line " + std::to_string(t.line_numbers[r]));
    AggregationLocation l;
    auto i = parse_int(row[1]);
    auto j = parse_int(row[2]);
    auto x = parse_double(row[3]);
    auto y = parse_double(row[4]);
    auto n = parse_int(row[5]);
    if (!i || !j || !x || !y || !n)
      throw Error("bad locations row at line " + std::to_string(t.line_numbers[r]));
    l.cell = {*i, *j};
    l.centroid = {*x, *y};
    l.count = static_cast<std::size_t>(*n);
    for (std::size_t k = 0; k < kPollutantCount; ++k)
      l.median[k] = parse_double(row[6 + k]).value_or(quiet_nan());
    l.low_quality_proportion = parse_double(row[10]).value_or(quiet_nan());
    out.push_back(l);
  }
  return out;
}

}  // namespace streetair::geo

#endif  // STREETAIR_AGGREGATION_HPP
