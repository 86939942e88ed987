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
#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "streetair/aggregation.hpp"
#include "streetair/random.hpp"
#include "streetair/sampling.hpp"

namespace sa = streetair;
namespace geo = streetair::geo;

namespace {

// Arc length of p along polyline v, found from the segment p lies on.
double arc_position(const geo::Polyline2& v, geo::Point2 p) {
  double cum = 0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double dx = v[k + 1].x - v[k].x, dy = v[k + 1].y - v[k].y;
    const double len = std::hypot(dx, dy);
    const double t = ((p.x - v[k].x) * dx + (p.y - v[k].y) * dy) / (len * len);
    const double ex = v[k].x + t * dx - p.x, ey = v[k].y + t * dy - p.y;
    if (t >= -1e-12 && t <= 1 + 1e-12 && std::hypot(ex, ey) < 1e-7) return cum + t * len;
    cum += len;
  }
  return -1;
}

std::vector<geo::Polyline2> random_network(sa::Rng& rng, int lines) {
  std::vector<geo::Polyline2> net;
  for (int l = 0; l < lines; ++l) {
    geo::Polyline2 pl;
    const int n = 2 + static_cast<int>(rng.index(4));
    for (int k = 0; k < n; ++k) pl.push_back({rng.uniform(-700, 700), rng.uniform(-700, 700)});
    net.push_back(pl);
  }
  return net;
}

geo::AggregationLocation location_at(geo::Point2 c, long long i) {
  geo::AggregationLocation loc;
  loc.cell = {i, 0};
  loc.centroid = c;
  loc.count = 1;
  return loc;
}

}  // namespace

TEST(Projection, OriginStepAndRoundTrip) {
  const geo::Projection proj(113.26, 23.13);
  auto o = proj.project(113.26, 23.13);
  EXPECT_EQ(o.x, 0.0);
  EXPECT_EQ(o.y, 0.0);
  const double step = proj.project(113.26, 23.131).y;
  EXPECT_NEAR(step, 6371000.0 * (23.131 - 23.13) * std::acos(-1.0) / 180.0, 1e-9);
  EXPECT_NEAR(step, 111.194, 1e-3);
  sa::Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double lon = 113.0 + rng.uniform() * 0.6, lat = 22.9 + rng.uniform() * 0.5;
    auto back = proj.unproject(proj.project(lon, lat));
    EXPECT_NEAR(back.lon, lon, 1e-9);
    EXPECT_NEAR(back.lat, lat, 1e-9);
    auto xy = proj.project(lon, lat);
    auto xy2 = proj.project(back);
    EXPECT_NEAR(xy.x, xy2.x, 1e-9);
    EXPECT_NEAR(xy.y, xy2.y, 1e-9);
  }
}

TEST(GridCell, EdgesAndFloor) {
  const geo::GridSpec grid;
  EXPECT_EQ(geo::assign_grid_cell(0, 0, grid), (geo::CellIndex{0, 0}));
  EXPECT_EQ(geo::assign_grid_cell(199.99, 200.0, grid), (geo::CellIndex{0, 1}));
  EXPECT_EQ(geo::assign_grid_cell(-0.01, 0, grid), (geo::CellIndex{-1, 0}));
  EXPECT_EQ(geo::parse_location_id(geo::location_id({-3, 7})), (geo::CellIndex{-3, 7}));
}

TEST(Median, SmallExamples) {
  std::vector<double> a{1, 5, 3}, b{2, 4}, c{7};
  EXPECT_EQ(geo::median_inplace(a), 3.0);
  EXPECT_EQ(geo::median_inplace(b), 3.0);
  EXPECT_EQ(geo::median_inplace(c), 7.0);
}

TEST(Median, AggregateMatchesSortOracle) {
  const geo::Projection proj(113.26, 23.13);
  const geo::GridSpec grid;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    sa::Rng rng(sa::derive_seed(99, {trial}));
    std::vector<sa::ingest::MonitoringRecord> recs(1000);
    std::map<std::pair<long long, long long>, std::array<std::vector<double>, 4>> groups;
    for (auto& r : recs) {
      const double x = rng.uniform(-900, 900), y = rng.uniform(-900, 900);
      const auto ll = proj.unproject({x, y});
      r.lon = ll.lon;
      r.lat = ll.lat;
      for (auto& v : r.values) v = std::round(rng.uniform(0, 60) * 4) / 4;
      const auto xy = proj.project(r.lon, r.lat);
      auto& g = groups[{static_cast<long long>(std::floor(xy.x / 200)),
                        static_cast<long long>(std::floor(xy.y / 200))}];
      for (int k = 0; k < 4; ++k) g[k].push_back(r.values[k]);
    }
    auto locs = geo::aggregate_to_grid(recs, proj, grid);
    ASSERT_EQ(locs.size(), groups.size());
    for (const auto& loc : locs) {
      const auto& g = groups.at({loc.cell.i, loc.cell.j});
      EXPECT_EQ(loc.count, g[0].size());
      for (int k = 0; k < 4; ++k) EXPECT_EQ(loc.median[k], oracle::sorted_median(g[k]));
    }
  }
}

TEST(Clip, DiameterSegment) {
  const std::vector<geo::Polyline2> net = {{{-500, 0}, {500, 0}}};
  auto clipped = geo::clip_polylines_to_disc(net, {0, 0}, 100);
  ASSERT_EQ(clipped.size(), 1u);
  ASSERT_EQ(clipped[0].vertices.size(), 2u);
  EXPECT_NEAR(clipped[0].vertices[0].x, -100, 1e-12);
  EXPECT_NEAR(clipped[0].vertices[1].x, 100, 1e-12);
  EXPECT_EQ(clipped[0].vertices[0].y, 0.0);
}

TEST(Clip, OutsideAndInside) {
  const std::vector<geo::Polyline2> out = {{{300, 300}, {400, 300}}};
  EXPECT_TRUE(geo::clip_polylines_to_disc(out, {0, 0}, 100).empty());
  const std::vector<geo::Polyline2> in = {{{-10, 0}, {0, 20}, {30, 5}}};
  auto c = geo::clip_polylines_to_disc(in, {0, 0}, 100);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].vertices, in[0]);
}

TEST(Clip, PiecesStayInDiscAndKeepOrder) {
  sa::Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    auto net = random_network(rng, 6);
    const geo::Point2 c{rng.uniform(-200, 200), rng.uniform(-200, 200)};
    const double r = rng.uniform(50, 400);
    auto pieces = geo::clip_polylines_to_disc(net, c, r);
    std::size_t last_parent = 0;
    for (const auto& p : pieces) {
      EXPECT_GE(p.parent, last_parent);
      last_parent = p.parent;
      for (auto v : p.vertices) EXPECT_LE(geo::distance(v, c), r + 1e-9);
    }
  }
}

TEST(SamplePoints, DiameterSegmentNinePoints) {
  const std::vector<geo::Polyline2> net = {{{-500, 0}, {500, 0}}};
  auto clipped = geo::clip_polylines_to_disc(net, {0, 0}, 100);
  auto pts = geo::generate_sample_points(clipped, 100);
  ASSERT_EQ(pts.size(), 9u);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(pts[k].position.x, -100.0 + 25.0 * static_cast<double>(k), 1e-9);
    EXPECT_EQ(pts[k].bearing_deg, 90.0);
  }
}

TEST(SamplePoints, ShortPieceAndNorthBearing) {
  std::vector<geo::ClippedPolyline> c(1);
  c[0].vertices = {{0, 0}, {0, 10}};
  auto pts = geo::generate_sample_points(c, 100);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].bearing_deg, 0.0);
  const auto h = pts[0].headings();
  EXPECT_EQ(h, (std::array<double, 4>{0, 90, 180, 270}));
}

TEST(SamplePoints, DeduplicatesAcrossPolylines) {
  std::vector<geo::ClippedPolyline> c(2);
  c[0].vertices = {{-50, 0}, {50, 0}};
  c[1].vertices = {{0, -50}, {0, 50}};
  auto pts = geo::generate_sample_points(c, 100);
  // Both cross at (0,0): 5 + 5 points minus the shared one.
  EXPECT_EQ(pts.size(), 9u);
}

TEST(SamplingPlan, DiameterCountsPerRadius) {
  const std::vector<geo::Polyline2> net = {{{-500, 0}, {500, 0}}};
  const geo::NetworkLattice lattice(net);
  std::vector<geo::AggregationLocation> locs = {location_at({0, 0}, 0)};
  auto plan = geo::build_sampling_plan(locs, lattice);
  const std::vector<std::size_t> expected = {9, 17, 25, 33, 41};
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_EQ(plan.points(locs[0].id(), geo::default_radii()[i]).size(), expected[i]);
}

TEST(SamplingPlan, FarLocationFlagged) {
  const std::vector<geo::Polyline2> net = {{{-500, 0}, {500, 0}}};
  const geo::NetworkLattice lattice(net);
  std::vector<geo::AggregationLocation> locs = {location_at({0, 2000}, 0)};
  auto plan = geo::build_sampling_plan(locs, lattice);
  ASSERT_EQ(plan.flagged.size(), 1u);
  for (double r : plan.radii) EXPECT_TRUE(plan.points(locs[0].id(), r).empty());
}

TEST(SamplingPlan, RandomNetworksNestedInDiscAndSpaced) {
  sa::Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const auto net = random_network(rng, 5);
    const geo::NetworkLattice lattice(net);
    std::vector<geo::AggregationLocation> locs;
    for (int l = 0; l < 4; ++l)
      locs.push_back(location_at({rng.uniform(-400, 400), rng.uniform(-400, 400)}, l));
    auto plan = geo::build_sampling_plan(locs, lattice);
    for (const auto& loc : locs) {
      std::vector<std::uint64_t> prev;
      for (double r : plan.radii) {
        std::vector<std::uint64_t> ids;
        for (const auto& p : plan.points(loc.id(), r)) {
          EXPECT_LE(geo::distance(p.position, loc.centroid), r + 1e-9);
          ids.push_back(p.point_id);
        }
        EXPECT_TRUE(std::includes(ids.begin(), ids.end(), prev.begin(), prev.end()));
        prev = ids;
      }
    }
    const auto& pts = lattice.points();
    for (std::size_t k = 1; k < pts.size(); ++k) {
      if (pts[k].polyline != pts[k - 1].polyline) continue;
      const auto& pl = net[pts[k].polyline];
      const double a = arc_position(pl, pts[k - 1].position);
      const double b = arc_position(pl, pts[k].position);
      // Skipped lattice steps come from deduplication only.
      const double steps = std::round((b - a) / 25.0);
      EXPECT_GE(steps, 1.0);
      EXPECT_NEAR(b - a, 25.0 * steps, 1e-9);
    }
    for (const auto& p : pts) {
      const auto h = p.headings();
      for (int k = 0; k < 4; ++k)
        EXPECT_NEAR(h[k], std::fmod(p.bearing_deg + 90.0 * k, 360.0), 1e-12);
    }
  }
}

TEST(SamplingPlan, ClippedPiecesSpacedExactly) {
  sa::Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    const auto net = random_network(rng, 4);
    const geo::Point2 c{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    auto pieces = geo::clip_polylines_to_disc(net, c, 300);
    auto pts = geo::generate_sample_points(pieces, 300, {}, {25.0, 0.0});
    for (std::size_t k = 1; k < pts.size(); ++k) {
      if (pts[k].polyline != pts[k - 1].polyline) continue;
      const auto& pl = pieces[pts[k].polyline].vertices;
      EXPECT_NEAR(arc_position(pl, pts[k].position) - arc_position(pl, pts[k - 1].position), 25.0,
                  1e-9);
    }
    for (const auto& p : pts) EXPECT_LE(geo::distance(p.position, c), 300 + 1e-9);
  }
}

TEST(SamplingPlan, CsvRoundTrip) {
  const std::vector<geo::Polyline2> net = {{{-500, 0}, {500, 0}}, {{0, -300}, {20, 300}}};
  const geo::NetworkLattice lattice(net);
  std::vector<geo::AggregationLocation> locs = {location_at({0, 0}, 0), location_at({50, 80}, 1)};
  auto plan = geo::build_sampling_plan(locs, lattice);
  const auto path = std::filesystem::temp_directory_path() / "streetair_plan_roundtrip.csv";
  geo::write_plan_csv(path, plan);
  auto back = geo::read_plan_csv(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.radii, plan.radii);
  for (const auto& [key, pts] : plan.entries) {
    const auto& got = back.points(key.location_id, key.radius);
    ASSERT_EQ(got.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_EQ(got[i].point_id, pts[i].point_id);
      EXPECT_EQ(got[i].position, pts[i].position);
      EXPECT_EQ(got[i].bearing_deg, pts[i].bearing_deg);
    }
  }
}
