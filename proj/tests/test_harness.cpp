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

#include <cstring>
#include <set>

#include "fixtures.hpp"
#include "streetair/harness/experiment.hpp"
#include "streetair/harness/report.hpp"
#include "streetair/harness/synth.hpp"
#include "test_util.hpp"

namespace sa = streetair;
namespace hx = streetair::harness;

namespace {

hx::ResultRow result(const std::string& alg, double mse, double r2 = 0.5) {
  hx::ResultRow r;
  r.pollutant = "no";
  r.algorithm = alg;
  r.angle_strategy = "average";
  r.radius = 100;
  r.quality = "keep_all";
  r.n_locations = 50;
  r.mean = {mse, std::sqrt(mse) * 0.8, std::sqrt(mse), 12.0, r2};
  r.best_params = "x=1";
  return r;
}

// Locations on a line with random class ratios for every radius and angle.
hx::PreparedData fake_prepared(const hx::ExperimentConfig& cfg, std::size_t n, std::uint64_t seed) {
  sa::Rng rng(seed);
  hx::PreparedData d;
  for (std::size_t i = 0; i < n; ++i) {
    sa::geo::AggregationLocation loc;
    loc.cell = {static_cast<std::int64_t>(i), 0};
    loc.count = 5;
    for (auto& v : loc.median) v = rng.uniform(10, 50);
    d.locations.push_back(loc);
    for (double r : cfg.experiment.radii)
      for (const auto& a : cfg.experiment.angle_strategies) {
        sa::imaging::FeatureRow row;
        row.location_id = loc.id();
        row.radius = r;
        row.angle_strategy = a.name();
        row.n_points = 3;
        row.n_images = 12;
        row.low_quality_proportion = static_cast<double>(i % 7) / 20.0;
        double total = 0;
        for (auto& v : row.features.ratio) total += (v = rng.uniform());
        for (auto& v : row.features.ratio) v /= total;
        row.features.recompute_groups();
        d.features.push_back(row);
        d.features_hq.push_back(row);
      }
  }
  return d;
}

hx::ExperimentConfig one_cell_config() {
  hx::ExperimentConfig cfg;
  auto& ex = cfg.experiment;
  ex.pollutants = {sa::Pollutant::no};
  ex.angle_strategies = {sa::imaging::AngleStrategy::average()};
  ex.radii = {100};
  ex.algorithms = {sa::modeling::Algorithm::stepwise};
  ex.grids.rf.n_trees = {10};
  ex.grids.rf.max_depth = {4};
  return cfg;
}

}  // namespace

TEST(QualityBins, BoundaryMembership) {
  const auto bins = hx::default_quality_bins();
  const std::vector<double> props = {0.0, 0.05, 0.0500001, 0.31, 0.30, 0.001};
  const auto a = hx::bin_by_quality(props, bins);
  ASSERT_EQ(a.bins.size(), 6u);
  EXPECT_EQ(a.bins[0], (std::vector<std::size_t>{0}));
  EXPECT_EQ(a.bins[1], (std::vector<std::size_t>{1, 5}));
  EXPECT_EQ(a.bins[2], (std::vector<std::size_t>{2}));
  EXPECT_EQ(a.bins[5], (std::vector<std::size_t>{4}));
  EXPECT_EQ(a.unbinned, (std::vector<std::size_t>{3}));
  EXPECT_EQ(bins[0].label(), "0%");
  EXPECT_EQ(bins[1].label(), "0-5%");
  EXPECT_THROW(hx::validate_bins({{5, 10}, {0, 5}}), sa::Error);
  EXPECT_THROW(hx::validate_bins({{5, 1}}), sa::Error);
  EXPECT_THROW(hx::validate_bins({}), sa::Error);
}

TEST(QualityBins, EveryProportionLandsInAtMostOneBin) {
  sa::Rng rng(3);
  std::vector<double> props(2000);
  for (auto& p : props) p = rng.index(4) == 0 ? 0.0 : rng.uniform(0, 0.4);
  const auto a = hx::bin_by_quality(props, hx::default_quality_bins());
  std::set<std::size_t> seen;
  std::size_t total = a.unbinned.size();
  for (const auto& b : a.bins) {
    total += b.size();
    for (auto i : b) EXPECT_TRUE(seen.insert(i).second);
  }
  for (auto i : a.unbinned) {
    EXPECT_TRUE(seen.insert(i).second);
    EXPECT_GT(props[i], 0.30);
  }
  EXPECT_EQ(total, props.size());
}

TEST(QualityHandling, ParseAndName) {
  EXPECT_EQ(hx::QualityHandling::parse("keep_all").kind, hx::QualityHandling::Kind::keep_all);
  const auto q = hx::QualityHandling::parse("drop_locations_above:15");
  EXPECT_EQ(q.threshold_pct, 15.0);
  EXPECT_EQ(q.name(), "drop_locations_above:15");
  EXPECT_THROW(hx::QualityHandling::parse("drop_locations_above:150"), sa::Error);
  EXPECT_THROW(hx::QualityHandling::parse("sometimes"), sa::Error);
}

TEST(Config, JsonRoundTrip) {
  hx::ExperimentConfig c;
  c.seed = 99;
  c.grid.cell_size = 150;
  c.calibration.utc_offset_seconds = 8 * 3600;
  c.experiment.radii = {100, 300};
  c.experiment.quality_handling = {hx::QualityHandling::parse("drop_low_quality"),
                                   hx::QualityHandling::parse("by_bin")};
  c.experiment.grids.rf.n_trees = {7};
  c.svi.backoff_base = std::chrono::milliseconds(250);
  testing_util::TempDir dir("config");
  hx::save_config(dir / "c.json", c);
  const auto back = hx::load_config(dir / "c.json");
  EXPECT_EQ(hx::config_to_json(back), hx::config_to_json(c));
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.svi.backoff_base.count(), 250);
  EXPECT_EQ(back.experiment.quality_handling.size(), 2u);

  const auto partial = hx::config_from_json(nlohmann::json{{"seed", 5}});
  EXPECT_EQ(hx::config_to_json(partial)["experiment"], hx::config_to_json(hx::ExperimentConfig{})["experiment"]);
  EXPECT_THROW(hx::config_from_json(nlohmann::json{{"experiment", {{"algorithms", {"svm"}}}}}), sa::Error);
}

TEST(Report, EmptyResultsAreRejected) {
  testing_util::TempDir dir("report_empty");
  try {
    hx::render_report({}, dir.path());
    FAIL();
  } catch (const sa::Error& e) {
    EXPECT_STREQ(e.what(), "nothing to report");
  }
}

TEST(Report, RankingOrdersByMse) {
  const std::vector<hx::ResultRow> rows = {result("gbt", 2.0), result("rf", 1.0), result("gbt", 3.0)};
  const auto ranks = hx::rank_by_mse(rows, "no");
  ASSERT_EQ(ranks.size(), 2u);
  EXPECT_EQ(ranks[0].algorithm, "rf");
  EXPECT_EQ(ranks[1].algorithm, "gbt");
  EXPECT_EQ(ranks[1].mse, 2.0);
  EXPECT_EQ(ranks[1].row, 0u);
}

TEST(Report, PublishedNoLeaderboardOrder) {
  std::vector<hx::ResultRow> rows;
  for (const auto& p : fixtures::published_no_rows()) {
    auto r = result(p.algorithm, p.mse, p.r2);
    r.mean = {p.mse, p.mae, p.rmse, p.mape, p.r2};
    rows.push_back(r);
  }
  std::vector<std::string> order;
  for (const auto& e : hx::rank_by_mse(rows, "no")) order.push_back(e.algorithm);
  EXPECT_EQ(order, (std::vector<std::string>{"rf", "gbt", "nn", "stepwise"}));
  const std::string md = hx::markdown_table(rows, "no");
  EXPECT_NE(md.find("**9.132**"), std::string::npos);
  EXPECT_NE(md.find("<u>9.443</u>"), std::string::npos);
  EXPECT_EQ(hx::ranking_summary(rows).find("- no: rf (9.132) > gbt (9.443) > nn (9.590) > stepwise (10.162)") ==
                std::string::npos,
            false);
}

TEST(Report, HigherR2IsBest) {
  const std::vector<hx::ResultRow> rows = {result("a", 1.0, 0.2), result("b", 2.0, 0.9), result("c", 3.0, 0.5)};
  const std::string md = hx::markdown_table(rows, "no");
  EXPECT_NE(md.find("**0.900**"), std::string::npos);
  EXPECT_NE(md.find("<u>0.500</u>"), std::string::npos);
  EXPECT_NE(md.find("**1.000**"), std::string::npos);
}

TEST(Report, ResultsCsvRoundTripAndFiles) {
  std::vector<hx::ResultRow> rows = {result("stepwise", 2.5), result("rf", 1.25)};
  rows[1].improvement_pct = 50;
  testing_util::TempDir dir("report");
  const auto files = hx::render_report(rows, dir.path());
  EXPECT_GE(files.files.size(), 3u);
  for (const auto& f : files.files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  const auto back = hx::read_results_csv(dir / "results.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].algorithm, "rf");
  EXPECT_EQ(back[1].mean.mse, 1.25);
  EXPECT_EQ(back[1].improvement_pct, 50.0);
  EXPECT_TRUE(std::isnan(back[0].improvement_pct));
}

TEST(Matrix, DefaultConfigHasFourHundredCells) {
  const hx::ExperimentConfig cfg;
  const auto data = fake_prepared(cfg, 4, 1);
  const auto cells = hx::build_data_cells(cfg, data);
  EXPECT_EQ(cells.size() * cfg.experiment.algorithms.size(), 400u);
  std::set<std::tuple<std::string, std::string, double>> distinct;
  for (const auto& c : cells) distinct.insert({std::string(sa::to_string(c.pollutant)), c.angle.name(), c.radius});
  EXPECT_EQ(distinct.size(), 100u);
}

TEST(Matrix, ByBinExpandsIntoOneCellPerBin) {
  auto cfg = one_cell_config();
  cfg.experiment.quality_handling = {hx::QualityHandling::parse("by_bin")};
  const auto data = fake_prepared(cfg, 70, 2);
  const auto cells = hx::build_data_cells(cfg, data);
  ASSERT_EQ(cells.size(), 6u);
  std::size_t total = 0;
  for (const auto& c : cells) total += c.data.size();
  // Proportions are (i mod 7)/20, so 0.30 is the largest and every row is binned.
  EXPECT_EQ(total, 70u);
  EXPECT_EQ(cells[0].quality, "bin:0%");
  EXPECT_EQ(cells[0].data.size(), 10u);
}

TEST(Matrix, SingleCellSingleAlgorithmGivesOneRow) {
  const auto cfg = one_cell_config();
  const auto res = hx::run_experiment_matrix(cfg, fake_prepared(cfg, 40, 3));
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_TRUE(res.skipped.empty());
  EXPECT_EQ(res.rows[0].n_locations, 40u);
  EXPECT_EQ(res.rows[0].improvement_pct, 0.0);
}

TEST(Matrix, SmallCellsAreSkippedWithReason) {
  const auto cfg = one_cell_config();
  const auto res = hx::run_experiment_matrix(cfg, fake_prepared(cfg, 19, 4));
  EXPECT_TRUE(res.rows.empty());
  ASSERT_EQ(res.skipped.size(), 1u);
  EXPECT_EQ(res.skipped[0].reason, "only 19 locations, need 20");
}

TEST(Matrix, WorkerCountDoesNotChangeResults) {
  auto cfg = one_cell_config();
  cfg.experiment.algorithms = {sa::modeling::Algorithm::stepwise, sa::modeling::Algorithm::rf};
  cfg.experiment.radii = {100, 200};
  const auto data = fake_prepared(cfg, 30, 5);
  const auto a = hx::run_experiment_matrix(cfg, data);
  cfg.experiment.workers = 3;
  const auto b = hx::run_experiment_matrix(cfg, data);
  ASSERT_EQ(a.rows.size(), 4u);
  ASSERT_EQ(b.rows.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.rows[i].algorithm, b.rows[i].algorithm);
    EXPECT_EQ(a.rows[i].mean.mse, b.rows[i].mean.mse);
    EXPECT_EQ(a.rows[i].mean.r2, b.rows[i].mean.r2);
    EXPECT_EQ(a.rows[i].best_params, b.rows[i].best_params);
  }
  EXPECT_EQ(a.rows[0].algorithm, "stepwise");
  EXPECT_EQ(a.rows[2].algorithm, "rf");
  EXPECT_FALSE(std::isnan(a.rows[2].improvement_pct));
}

TEST(Synth, CityIsSeededAndCoherent) {
  hx::SynthOptions opt;
  opt.hours = 3;
  opt.taxis = 4;
  opt.extent_m = 1200;
  const auto a = hx::generate_city(opt);
  const auto b = hx::generate_city(opt);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].timestamp, b.records[i].timestamp);
    EXPECT_EQ(std::memcmp(a.records[i].values.data(), b.records[i].values.data(), sizeof(sa::PollutantValues)), 0);
  }
  EXPECT_EQ(a.labels.size(), a.images.size());
  EXPECT_FALSE(a.labels.empty());
  EXPECT_EQ(a.reference.samples[0].size(), 3u);
  opt.seed = 8;
  const auto c = hx::generate_city(opt);
  EXPECT_NE(std::memcmp(c.records[5].values.data(), a.records[5].values.data(), sizeof(sa::PollutantValues)), 0);
  opt.corrupt_fraction = 2;
  EXPECT_THROW(hx::generate_city(opt), sa::Error);
}
