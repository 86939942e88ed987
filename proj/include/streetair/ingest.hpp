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
#ifndef STREETAIR_INGEST_HPP
#define STREETAIR_INGEST_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "streetair/common.hpp"
#include "streetair/csv.hpp"
#include "streetair/geospatial.hpp"
#include "streetair/timeutil.hpp"

namespace streetair::ingest {

/// One 15 s observation from a monitoring taxi. Concentrations are in ppb
/// (NO, NO2) and ug/m3 (PM2.5, PM10), indexed by `Pollutant`; a missing
/// reading is NaN.
struct MonitoringRecord {
  std::string taxi_id;
  UnixSeconds timestamp = 0;
  double lon = 0.0;
  double lat = 0.0;
  PollutantValues values{};

  double& value(Pollutant p) { return values[index_of(p)]; }
  double value(Pollutant p) const { return values[index_of(p)]; }
  geo::LonLat position() const { return {lon, lat}; }
};

struct ParseError {
  std::size_t line = 0;
  std::string message;
};

template <typename T>
struct ParseResult {
  T value;
  std::vector<ParseError> errors;
  std::size_t data_rows = 0;

  bool all_failed() const { return data_rows > 0 && errors.size() == data_rows; }
};

inline const std::vector<std::string>& monitoring_header() {
  static const std::vector<std::string> h = {
      "taxi_id", "timestamp", "lon", "lat",
      "no_ppb",  "no2_ppb",   "pm25_ugm3", "pm10_ugm3"};
  return h;
}

inline bool valid_coordinate(double lon, double lat) {
  return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 &&
         lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
}

// Row-level problems are collected; a missing file or a header that does not
// match the schema throws.
inline ParseResult<std::vector<MonitoringRecord>> parse_monitoring_csv(
    const std::filesystem::path& path) {
  const csv::Table table = csv::read_table(path);
  if (table.header != monitoring_header())
    throw Error("unknown monitoring header in " + path.string() +
                " (expected " + csv::join(monitoring_header()) + ")");

  ParseResult<std::vector<MonitoringRecord>> out;
  out.data_rows = table.rows.size();
  out.value.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 8) {
      out.errors.push_back({line, "expected 8 fields, got " + std::to_string(row.size())});
      continue;
    }
    MonitoringRecord rec;
    rec.taxi_id = std::string(trim(row[0]));
    if (rec.taxi_id.empty()) {
      out.errors.push_back({line, "empty taxi_id"});
      continue;
    }
    auto ts = parse_iso8601_utc(row[1]);
    if (!ts) {
      out.errors.push_back({line, "bad timestamp '" + row[1] + "'"});
      continue;
    }
    rec.timestamp = *ts;
    auto lon = parse_double(row[2]);
    auto lat = parse_double(row[3]);
    if (!lon || !lat) {
      out.errors.push_back({line, "non-numeric coordinate"});
      continue;
    }
    if (!valid_coordinate(*lon, *lat)) {
      out.errors.push_back({line, "coordinate out of range"});
      continue;
    }
    rec.lon = *lon;
    rec.lat = *lat;
    bool ok = true;
    for (std::size_t k = 0; k < kPollutantCount; ++k) {
      const std::string_view field = trim(row[4 + k]);
      if (field.empty()) {
        rec.values[k] = quiet_nan();
        continue;
      }
      auto v = parse_double(field);
      if (!v) {
        out.errors.push_back({line, "non-numeric " + monitoring_header()[4 + k]});
        ok = false;
        break;
      }
      rec.values[k] = *v;
    }
    if (ok) out.value.push_back(std::move(rec));
  }
  return out;
}

inline void write_monitoring_csv(const std::filesystem::path& path,
                                 const std::vector<MonitoringRecord>& records) {
  csv::Writer w(path);
  w.row(monitoring_header());
  for (const auto& r : records) {
    w.row({r.taxi_id, format_iso8601_utc(r.timestamp), format_double(r.lon),
           format_double(r.lat), format_double(r.values[0]),
           format_double(r.values[1]), format_double(r.values[2]),
           format_double(r.values[3])});
  }
}

struct BoundingBox {
  double min_lon = -180.0;
  double min_lat = -90.0;
  double max_lon = 180.0;
  double max_lat = 90.0;

  bool contains(double lon, double lat) const {
    return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
  }
};

struct ValueRange {
  double min = 0.0;
  double max = 2000.0;
};

struct CleaningPolicy {
  std::array<ValueRange, kPollutantCount> ranges{
      ValueRange{0.0, 2000.0}, ValueRange{0.0, 2000.0},
      ValueRange{0.0, 2000.0}, ValueRange{0.0, 2000.0}};
  BoundingBox bbox{};
  double max_speed_mps = 40.0;
  bool drop_missing = true;

  void validate() const {
    for (std::size_t k = 0; k < kPollutantCount; ++k)
      if (!(ranges[k].min < ranges[k].max))
        throw Error("cleaning range for " +
                    std::string(to_string(kAllPollutants[k])) + " needs min < max");
    if (!(bbox.min_lon < bbox.max_lon) || !(bbox.min_lat < bbox.max_lat))
      throw Error("cleaning bounding box is empty");
    if (!(max_speed_mps > 0.0)) throw Error("max speed must be > 0");
  }
};

struct RejectedRecord {
  MonitoringRecord record;
  std::vector<std::string> reasons;
};

struct CleaningResult {
  std::vector<MonitoringRecord> kept;
  std::vector<RejectedRecord> rejected;
};

// Reasons: "coord", "bbox", "missing:<pollutant>", "range:<pollutant>",
// "speed". The speed check runs per taxi in timestamp order against the last
// record of that taxi that passed every check, which makes cleaning
// idempotent.
inline CleaningResult clean_records(const std::vector<MonitoringRecord>& records,
                                    const CleaningPolicy& policy) {
  policy.validate();
  std::vector<std::vector<std::string>> reasons(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto& why = reasons[i];
    if (!valid_coordinate(r.lon, r.lat)) {
      why.push_back("coord");
    } else if (!policy.bbox.contains(r.lon, r.lat)) {
      why.push_back("bbox");
    }
    for (std::size_t k = 0; k < kPollutantCount; ++k) {
      const double v = r.values[k];
      const std::string name(to_string(kAllPollutants[k]));
      if (std::isnan(v)) {
        if (policy.drop_missing) why.push_back("missing:" + name);
        continue;
      }
      if (!std::isfinite(v) || v < policy.ranges[k].min || v > policy.ranges[k].max)
        why.push_back("range:" + name);
    }
  }

  std::map<std::string, std::vector<std::size_t>> by_taxi;
  for (std::size_t i = 0; i < records.size(); ++i)
    by_taxi[records[i].taxi_id].push_back(i);
  for (auto& [taxi, idx] : by_taxi) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return records[a].timestamp < records[b].timestamp;
    });
    std::optional<std::size_t> anchor;
    for (std::size_t i : idx) {
      if (!reasons[i].empty()) continue;
      if (anchor) {
        const auto& prev = records[*anchor];
        const auto& cur = records[i];
        const double d = geo::equirectangular_distance(prev.position(), cur.position());
        const double dt = static_cast<double>(cur.timestamp - prev.timestamp);
        const bool too_fast = dt > 0.0 ? d / dt > policy.max_speed_mps : d > 0.0;
        if (too_fast) {
          reasons[i].push_back("speed");
          continue;
        }
      }
      anchor = i;
    }
  }

  CleaningResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (reasons[i].empty())
      out.kept.push_back(records[i]);
    else
      out.rejected.push_back({records[i], std::move(reasons[i])});
  }
  return out;
}

struct ReferenceSample {
  UnixSeconds timestamp = 0;
  double value = 0.0;
};

/// Hourly fixed-site concentrations per pollutant, timestamps strictly
/// increasing on whole hours.
struct ReferenceSeries {
  std::array<std::vector<ReferenceSample>, kPollutantCount> samples;

  const std::vector<ReferenceSample>& of(Pollutant p) const {
    return samples[index_of(p)];
  }
  std::vector<ReferenceSample>& of(Pollutant p) { return samples[index_of(p)]; }
};

inline ParseResult<ReferenceSeries> parse_reference_csv(
    const std::filesystem::path& path) {
  const csv::Table table = csv::read_table(path);
  const std::vector<std::string> expected = {"timestamp", "pollutant", "value"};
  if (table.header != expected)
    throw Error("unknown reference header in " + path.string() +
                " (expected timestamp,pollutant,value)");
  ParseResult<ReferenceSeries> out;
  out.data_rows = table.rows.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 3) {
      out.errors.push_back({line, "expected 3 fields"});
      continue;
    }
    auto ts = parse_iso8601_utc(row[0]);
    auto pol = parse_pollutant(trim(row[1]));
    auto val = parse_double(row[2]);
    if (!ts) {
      out.errors.push_back({line, "bad timestamp '" + row[0] + "'"});
      continue;
    }
    if (!pol) {
      out.errors.push_back({line, "unknown pollutant '" + row[1] + "'"});
      continue;
    }
    if (!val) {
      out.errors.push_back({line, "non-numeric value"});
      continue;
    }
    if (*ts % kSecondsPerHour != 0)
      throw Error("timestamp not on a whole hour at line " + std::to_string(line));
    auto& seq = out.value.of(*pol);
    if (!seq.empty()) {
      if (seq.back().timestamp == *ts)
        throw Error("duplicate timestamp at line " + std::to_string(line));
      if (seq.back().timestamp > *ts)
        throw Error("non-monotone timestamp at line " + std::to_string(line));
    }
    seq.push_back({*ts, *val});
  }
  return out;
}

inline void write_reference_csv(const std::filesystem::path& path,
                                const ReferenceSeries& series) {
  csv::Writer w(path);
  w.row({"timestamp", "pollutant", "value"});
  for (Pollutant p : kAllPollutants)
    for (const auto& s : series.of(p))
      w.row({format_iso8601_utc(s.timestamp), std::string(to_string(p)),
             format_double(s.value)});
}

enum class Crs { lonlat, meters };

struct Polyline {
  std::vector<geo::Point2> vertices;  // (lon, lat) when crs == lonlat
  Crs crs = Crs::lonlat;
};

struct RoadNetwork {
  std::vector<Polyline> polylines;
};

struct RoadLoadResult {
  RoadNetwork network;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::optional<Polyline> polyline_from_coordinates(const nlohmann::json& coords,
                                                         Crs crs,
                                                         const std::string& where,
                                                         std::vector<std::string>& warnings) {
  Polyline pl;
  pl.crs = crs;
  if (!coords.is_array()) {
    warnings.push_back(where + ": coordinates are not an array; skipped");
    return std::nullopt;
  }
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      warnings.push_back(where + ": malformed vertex; skipped");
      return std::nullopt;
    }
    const geo::Point2 v{c[0].get<double>(), c[1].get<double>()};
    if (!pl.vertices.empty() && pl.vertices.back() == v) {
      warnings.push_back(where + ": repeated vertex collapsed");
      continue;
    }
    pl.vertices.push_back(v);
  }
  if (pl.vertices.size() < 2) {
    warnings.push_back(where + ": fewer than 2 distinct vertices; dropped");
    return std::nullopt;
  }
  return pl;
}

}  // namespace detail

inline RoadNetwork parse_road_network(const nlohmann::json& doc,
                                      std::vector<std::string>& warnings) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    throw Error("road network must be a GeoJSON FeatureCollection");
  Crs default_crs = Crs::lonlat;
  if (doc.contains("crs") && doc["crs"].is_string())
    default_crs = doc["crs"].get<std::string>() == "meters" ? Crs::meters : Crs::lonlat;
  RoadNetwork net;
  const auto& features = doc.value("features", nlohmann::json::array());
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& feat = features[f];
    const std::string where = "feature " + std::to_string(f);
    Crs crs = default_crs;
    if (feat.contains("properties") && feat["properties"].is_object()) {
      const auto& props = feat["properties"];
      if (props.contains("crs") && props["crs"].is_string()) {
        const std::string c = props["crs"].get<std::string>();
        if (c == "meters") {
          crs = Crs::meters;
        } else if (c == "lonlat") {
          crs = Crs::lonlat;
        } else {
          warnings.push_back(where + ": unknown crs '" + c + "'; skipped");
          continue;
        }
      }
    }
    if (!feat.contains("geometry") || !feat["geometry"].is_object()) {
      warnings.push_back(where + ": no geometry; skipped");
      continue;
    }
    const auto& geom = feat["geometry"];
    const std::string type = geom.value("type", "");
    if (type == "LineString") {
      if (auto pl = detail::polyline_from_coordinates(geom["coordinates"], crs, where, warnings))
        net.polylines.push_back(std::move(*pl));
    } else if (type == "MultiLineString" && geom["coordinates"].is_array()) {
      for (const auto& part : geom["coordinates"])
        if (auto pl = detail::polyline_from_coordinates(part, crs, where, warnings))
          net.polylines.push_back(std::move(*pl));
    } else {
      warnings.push_back(where + ": geometry type '" + type + "' is not a line; skipped");
    }
  }
  return net;
}

inline RoadLoadResult load_road_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open road network: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid GeoJSON in " + path.string() + ": " + e.what());
  }
  RoadLoadResult out;
  out.network = parse_road_network(doc, out.warnings);
  return out;
}

inline void write_road_network(const std::filesystem::path& path, const RoadNetwork& net) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& pl : net.polylines) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& v : pl.vertices) coords.push_back({v.x, v.y});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"crs", pl.crs == Crs::meters ? "meters" : "lonlat"}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write road network: " + path.string());
  out << doc.dump(1) << '\n';
}

// Projected-meter copies of every polyline. Lonlat polylines whose
// projection collapses consecutive vertices are cleaned again.
inline std::vector<std::vector<geo::Point2>> to_meters(const RoadNetwork& net,
                                                       const geo::Projection& proj) {
  std::vector<std::vector<geo::Point2>> out;
  out.reserve(net.polylines.size());
  for (const auto& pl : net.polylines) {
    std::vector<geo::Point2> m;
    m.reserve(pl.vertices.size());
    for (const auto& v : pl.vertices) {
      const geo::Point2 p = pl.crs == Crs::meters ? v : proj.project(v.x, v.y);
      if (!m.empty() && m.back() == p) continue;
      m.push_back(p);
    }
    if (m.size() >= 2) out.push_back(std::move(m));
  }
  return out;
}

}  // namespace streetair::ingest

#endif  // STREETAIR_INGEST_HPP
