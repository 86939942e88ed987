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
#ifndef STREETAIR_SAMPLING_HPP
#define STREETAIR_SAMPLING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streetair/aggregation.hpp"
#include "streetair/common.hpp"
#include "streetair/csv.hpp"
#include "streetair/geospatial.hpp"

namespace streetair::geo {

using Polyline2 = std::vector<Point2>;

/// Piece of a road polyline that lies inside a buffer disc.
struct ClippedPolyline {
  std::size_t parent = 0;
  // Arc length along the parent polyline at the first vertex.
  double start_arc = 0.0;
  Polyline2 vertices;
};

namespace detail {

// Parameter interval [t0, t1] of segment p + t (q - p), t in [0, 1], inside
// the closed disc. Returns false when the segment misses the disc.
inline bool segment_disc_interval(Point2 p, Point2 q, Point2 c, double r,
                                  double& t0, double& t1) {
  const Point2 d = q - p;
  const Point2 f = p - c;
  const double a = dot(d, d);
  const double b = 2.0 * dot(f, d);
  const double cc = dot(f, f) - r * r;
  const double disc = b * b - 4.0 * a * cc;
  if (a == 0.0 || disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double qroot = -0.5 * (b + std::copysign(sq, b));
  double r1 = qroot / a;
  double r2 = qroot != 0.0 ? cc / qroot : -r1;
  if (r1 > r2) std::swap(r1, r2);
  t0 = std::max(0.0, r1);
  t1 = std::min(1.0, r2);
  return t0 < t1;
}

}  // namespace detail

// Pieces of each polyline inside the closed disc, in parent order. Segment
// ends inside the disc are copied verbatim, so a polyline entirely inside is
// returned unchanged.
inline std::vector<ClippedPolyline> clip_polylines_to_disc(std::span<const Polyline2> network,
                                                           Point2 center, double r) {
  if (!(r > 0.0)) throw Error("buffer radius must be > 0");
  std::vector<ClippedPolyline> out;
  for (std::size_t pi = 0; pi < network.size(); ++pi) {
    const auto& v = network[pi];
    bool open = false;
    double arc = 0.0;
    ClippedPolyline cur;
    auto close = [&] {
      if (open && cur.vertices.size() >= 2) out.push_back(std::move(cur));
      cur = ClippedPolyline{};
      open = false;
    };
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const Point2 p = v[k];
      const Point2 q = v[k + 1];
      const double len = distance(p, q);
      double t0 = 0.0, t1 = 0.0;
      if (!detail::segment_disc_interval(p, q, center, r, t0, t1)) {
        close();
        arc += len;
        continue;
      }
      const Point2 entry = t0 == 0.0 ? p : p + t0 * (q - p);
      const Point2 exit = t1 == 1.0 ? q : p + t1 * (q - p);
      if (!(open && t0 == 0.0)) {
        close();
        open = true;
        cur.parent = pi;
        cur.start_arc = arc + t0 * len;
        cur.vertices.push_back(entry);
      }
      if (!(cur.vertices.back() == exit)) cur.vertices.push_back(exit);
      if (t1 < 1.0) close();
      arc += len;
    }
    close();
  }
  return out;
}

/// A road point inside a buffer from which four images are requested.
struct SamplePoint {
  std::uint64_t point_id = 0;
  Point2 position;
  // Road direction, degrees clockwise from north.
  double bearing_deg = 0.0;
  std::size_t polyline = 0;
  double arc_length = 0.0;
  CellIndex cell;
  double radius = 0.0;

  // Views at 0, 90, 180 and 270 degrees relative to the road.
  std::array<double, 4> headings() const {
    return {normalize_heading(bearing_deg), normalize_heading(bearing_deg + 90.0),
            normalize_heading(bearing_deg + 180.0), normalize_heading(bearing_deg + 270.0)};
  }
};

inline constexpr std::array<int, 4> kHeadingOffsets = {0, 90, 180, 270};

// Calls emit(arc, position, bearing) at arc lengths 0, spacing, 2 spacing, ...
// along v. The final vertex is emitted only when it falls on a step.
template <typename Emit>
void walk_arc_lattice(std::span<const Point2> v, double spacing, Emit&& emit) {
  if (v.size() < 2) return;
  std::vector<double> cum(v.size(), 0.0);
  for (std::size_t k = 1; k < v.size(); ++k) cum[k] = cum[k - 1] + distance(v[k - 1], v[k]);
  const double total = cum.back();
  std::size_t seg = 0;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (s > total + 1e-9) break;
    while (seg + 2 < v.size() && s >= cum[seg + 1]) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = std::clamp((s - cum[seg]) / len, 0.0, 1.0);
    const Point2 pos = t == 0.0   ? v[seg]
                       : t == 1.0 ? v[seg + 1]
                                  : v[seg] + t * (v[seg + 1] - v[seg]);
    emit(s, pos, bearing_deg(v[seg], v[seg + 1]));
  }
}

namespace detail {

// Hash grid used to drop points that come within `radius` of a point taken
// from another polyline.
class Deduplicator {
 public:
  explicit Deduplicator(double radius) : radius_(radius), cell_(std::max(radius, 1e-6)) {}

  bool near_other_polyline(Point2 p, std::size_t polyline) const {
    const long long cx = key(p.x), cy = key(p.y);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& e : it->second)
          if (e.polyline != polyline && distance(e.p, p) <= radius_) return true;
      }
    return false;
  }

  void insert(Point2 p, std::size_t polyline) {
    cells_[pack(key(p.x), key(p.y))].push_back({p, polyline});
  }

 private:
  struct Entry {
    Point2 p;
    std::size_t polyline;
  };
  long long key(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
  static std::uint64_t pack(long long a, long long b) {
    return (static_cast<std::uint64_t>(a) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(b);
  }
  double radius_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;
};

}  // namespace detail

struct SamplingOptions {
  double spacing = 25.0;
  double dedup_radius = 1.0;
};

// Samples each clipped polyline from its own start (arc length 0) at the
// configured spacing. Points within dedup_radius of a point already taken
// from a different polyline are dropped.
inline std::vector<SamplePoint> generate_sample_points(std::span<const ClippedPolyline> clipped,
                                                       double radius, CellIndex cell = {},
                                                       const SamplingOptions& opts = {}) {
  if (!(opts.spacing > 0.0)) throw Error("sampling spacing must be > 0");
  std::vector<SamplePoint> out;
  detail::Deduplicator dedup(opts.dedup_radius);
  for (std::size_t ci = 0; ci < clipped.size(); ++ci) {
    walk_arc_lattice(std::span<const Point2>(clipped[ci].vertices), opts.spacing,
                     [&](double s, Point2 pos, double bearing) {
                       if (dedup.near_other_polyline(pos, ci)) return;
                       dedup.insert(pos, ci);
                       SamplePoint sp;
                       sp.point_id = out.size();
                       sp.position = pos;
                       sp.bearing_deg = bearing;
                       sp.polyline = ci;
                       sp.arc_length = s;
                       sp.cell = cell;
                       sp.radius = radius;
                       out.push_back(sp);
                     });
  }
  return out;
}

/// Network-wide sample lattice: every polyline walked from its own start,
/// deduplicated once. Buffer plans select from it, so a point present at
/// radius r is the same point (same id) at every larger radius.
class NetworkLattice {
 public:
  NetworkLattice() = default;
  NetworkLattice(std::span<const Polyline2> network, const SamplingOptions& opts = {})
      : spacing_(opts.spacing) {
    if (!(opts.spacing > 0.0)) throw Error("sampling spacing must be > 0");
    detail::Deduplicator dedup(opts.dedup_radius);
    for (std::size_t pi = 0; pi < network.size(); ++pi) {
      walk_arc_lattice(std::span<const Point2>(network[pi]), opts.spacing,
                       [&](double s, Point2 pos, double bearing) {
                         if (dedup.near_other_polyline(pos, pi)) return;
                         dedup.insert(pos, pi);
                         SamplePoint sp;
                         sp.point_id = points_.size();
                         sp.position = pos;
                         sp.bearing_deg = bearing;
                         sp.polyline = pi;
                         sp.arc_length = s;
                         points_.push_back(sp);
                       });
    }
    for (const auto& p : points_)
      buckets_[bucket_key(bucket(p.position.x), bucket(p.position.y))].push_back(
          static_cast<std::size_t>(p.point_id));
  }

  const std::vector<SamplePoint>& points() const { return points_; }
  double spacing() const { return spacing_; }

  // Ids of points with distance(center, p) <= r, ascending.
  std::vector<std::size_t> within(Point2 center, double r) const {
    std::vector<std::size_t> ids;
    const long long x0 = bucket(center.x - r), x1 = bucket(center.x + r);
    const long long y0 = bucket(center.y - r), y1 = bucket(center.y + r);
    for (long long bx = x0; bx <= x1; ++bx)
      for (long long by = y0; by <= y1; ++by) {
        auto it = buckets_.find(bucket_key(bx, by));
        if (it == buckets_.end()) continue;
        for (std::size_t id : it->second)
          if (distance(center, points_[id].position) <= r) ids.push_back(id);
      }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  static constexpr double kBucket = 250.0;
  static long long bucket(double v) { return static_cast<long long>(std::floor(v / kBucket)); }
  static std::uint64_t bucket_key(long long a, long long b) {
    return (static_cast<std::uint64_t>(a) << 32) ^ (static_cast<std::uint64_t>(b) & 0xffffffffULL);
  }

  double spacing_ = 25.0;
  std::vector<SamplePoint> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

struct PlanKey {
  std::string location_id;
  double radius = 0.0;
  auto operator<=>(const PlanKey&) const = default;
};

struct SamplingPlan {
  std::vector<double> radii;
  std::map<PlanKey, std::vector<SamplePoint>> entries;
  // Locations with no sample point inside the largest radius.
  std::vector<std::string> flagged;

  const std::vector<SamplePoint>& points(const std::string& location, double radius) const {
    static const std::vector<SamplePoint> empty;
    auto it = entries.find({location, radius});
    return it == entries.end() ? empty : it->second;
  }
};

inline const std::vector<double>& default_radii() {
  static const std::vector<double> r = {100.0, 200.0, 300.0, 400.0, 500.0};
  return r;
}

inline SamplingPlan build_sampling_plan(std::span<const AggregationLocation> locations,
                                        const NetworkLattice& lattice,
                                        std::vector<double> radii = default_radii()) {
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  for (double r : radii)
    if (!(r > 0.0)) throw Error("buffer radius must be > 0");
  SamplingPlan plan;
  plan.radii = radii;
  for (const auto& loc : locations) {
    const std::string id = loc.id();
    bool any = false;
    for (double r : radii) {
      auto& pts = plan.entries[{id, r}];
      for (std::size_t pid : lattice.within(loc.centroid, r)) {
        SamplePoint sp = lattice.points()[pid];
        sp.cell = loc.cell;
        sp.radius = r;
        pts.push_back(sp);
      }
      any = any || !pts.empty();
    }
    if (!any) plan.flagged.push_back(id);
  }
  return plan;
}

inline void write_plan_csv(const std::filesystem::path& path, const SamplingPlan& plan) {
  csv::Writer w(path);
  w.row({"location_id", "radius_m", "point_id", "x", "y", "bearing_deg"});
  for (const auto& [key, pts] : plan.entries)
    for (const auto& p : pts)
      w.row({key.location_id, format_double(key.radius), std::to_string(p.point_id),
             format_double(p.position.x), format_double(p.position.y),
             format_double(p.bearing_deg)});
}

inline SamplingPlan read_plan_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_table(path);
  const std::vector<std::string> expected = {"location_id", "radius_m", "point_id",
                                             "x",           "y",        "bearing_deg"};
  if (t.header != expected) throw Error("unexpected plan header in " + path.string());
  SamplingPlan plan;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto radius = row.size() == 6 ? parse_double(row[1]) : std::nullopt;
    auto pid = row.size() == 6 ? parse_int(row[2]) : std::nullopt;
    auto x = row.size() == 6 ? parse_double(row[3]) : std::nullopt;
    auto y = row.size() == 6 ? parse_double(row[4]) : std::nullopt;
    auto b = row.size() == 6 ? parse_double(row[5]) : std::nullopt;
    auto cell = row.empty() ? std::nullopt : parse_location_id(row[0]);
    if (!radius || !pid || !x || !y || !b || !cell)
      throw Error("bad plan row at line " + std::to_string(t.line_numbers[r]));
    SamplePoint sp;
    sp.point_id = static_cast<std::uint64_t>(*pid);
    sp.position = {*x, *y};
    sp.bearing_deg = *b;
    sp.cell = *cell;
    sp.radius = *radius;
    plan.entries[{row[0], *radius}].push_back(sp);
    if (std::find(plan.radii.begin(), plan.radii.end(), *radius) == plan.radii.end())
      plan.radii.push_back(*radius);
  }
  std::sort(plan.radii.begin(), plan.radii.end());
  return plan;
}

}  // namespace streetair::geo

#endif  // STREETAIR_SAMPLING_HPP
