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
#ifndef STREETAIR_GEOSPATIAL_HPP
#define STREETAIR_GEOSPATIAL_HPP

#include <cmath>
#include <compare>
#include <numbers>
#include <optional>
#include <string>

#include "streetair/common.hpp"

namespace streetair::geo {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

// Local equirectangular projection about (lon0, lat0).
//   x = R (lon - lon0) cos(lat0),  y = R (lat - lat0), angles in radians.
// Accurate to about 0.1 % over a city-sized extent.
class Projection {
 public:
  Projection() = default;
  Projection(double lon0, double lat0, double radius = kEarthRadiusM)
      : lon0_(lon0), lat0_(lat0), radius_(radius),
        cos_lat0_(std::cos(lat0 * kDegToRad)) {}

  Point2 project(double lon, double lat) const {
    return {radius_ * (lon - lon0_) * cos_lat0_ * kDegToRad,
            radius_ * (lat - lat0_) * kDegToRad};
  }
  Point2 project(LonLat ll) const { return project(ll.lon, ll.lat); }

  LonLat unproject(Point2 p) const {
    return {lon0_ + p.x / (radius_ * cos_lat0_ * kDegToRad),
            lat0_ + p.y / (radius_ * kDegToRad)};
  }

  double lon0() const { return lon0_; }
  double lat0() const { return lat0_; }
  double radius() const { return radius_; }

 private:
  double lon0_ = 0.0;
  double lat0_ = 0.0;
  double radius_ = kEarthRadiusM;
  double cos_lat0_ = 1.0;
};

// Distance in meters under the equirectangular projection centred on the
// pair's midpoint.
inline double equirectangular_distance(LonLat a, LonLat b) {
  const Projection proj{0.5 * (a.lon + b.lon), 0.5 * (a.lat + b.lat)};
  return distance(proj.project(a), proj.project(b));
}

struct GridSpec {
  double cell_size = 200.0;
  Point2 origin{};

  void validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size))
      throw Error("grid cell size must be > 0");
  }
};

struct CellIndex {
  long long i = 0;
  long long j = 0;
  auto operator<=>(const CellIndex&) const = default;
};

// Lower and left cell edges are inclusive.
inline CellIndex assign_grid_cell(double x, double y, const GridSpec& grid) {
  return {static_cast<long long>(std::floor((x - grid.origin.x) / grid.cell_size)),
          static_cast<long long>(std::floor((y - grid.origin.y) / grid.cell_size))};
}

inline Point2 cell_center(CellIndex c, const GridSpec& grid) {
  return {grid.origin.x + (static_cast<double>(c.i) + 0.5) * grid.cell_size,
          grid.origin.y + (static_cast<double>(c.j) + 0.5) * grid.cell_size};
}

inline std::string location_id(CellIndex c) {
  return std::to_string(c.i) + "_" + std::to_string(c.j);
}

inline std::optional<CellIndex> parse_location_id(const std::string& id) {
  const auto sep = id.find('_', 1);
  if (sep == std::string::npos) return std::nullopt;
  auto i = parse_int(std::string_view(id).substr(0, sep));
  auto j = parse_int(std::string_view(id).substr(sep + 1));
  if (!i || !j) return std::nullopt;
  return CellIndex{*i, *j};
}

// Degrees clockwise from north, in [0, 360).
inline double bearing_deg(Point2 from, Point2 to) {
  double b = std::atan2(to.x - from.x, to.y - from.y) / kDegToRad;
  if (b < 0.0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

inline double normalize_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

}  // namespace streetair::geo

#endif  // STREETAIR_GEOSPATIAL_HPP
