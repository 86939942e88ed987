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
// Drives the command-line tool through a whole synthetic run.
#include <gtest/gtest.h>

#include <cstdlib>

#include "streetair/harness/stages.hpp"
#include "test_util.hpp"

#ifndef STREETAIR_CLI
#error "STREETAIR_CLI must name the command-line binary"
#endif

namespace hx = streetair::harness;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + STREETAIR_CLI + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void shrink_config(const fs::path& dir) {
  auto cfg = hx::load_config(dir / hx::files::kConfig);
  auto& ex = cfg.experiment;
  ex.pollutants = {streetair::Pollutant::no};
  ex.angle_strategies = {streetair::imaging::AngleStrategy::average()};
  ex.radii = {100};
  ex.algorithms = {streetair::modeling::Algorithm::stepwise, streetair::modeling::Algorithm::rf};
  hx::save_config(dir / hx::files::kConfig, cfg);
}

}  // namespace

TEST(Cli, SynthIsReproducible) {
  testing_util::TempDir a("cli_a"), b("cli_b");
  const auto log = a / "log.txt";
  ASSERT_EQ(run("synth --hours 3 --taxis 4 --seed 11 --out-dir \"" + a.path().string() + "\"", log), 0);
  ASSERT_EQ(run("synth --hours 3 --taxis 4 --seed 11 --out-dir \"" + b.path().string() + "\"", log), 0);
  for (const char* f : {hx::files::kMonitoring, hx::files::kReference, hx::files::kRoads, hx::files::kConfig})
    EXPECT_EQ(testing_util::read_text(a / f), testing_util::read_text(b / f)) << f;
  EXPECT_FALSE(testing_util::read_text(a / hx::files::kMonitoring).empty());
}

TEST(Cli, FullPipelineProducesReport) {
  testing_util::TempDir d("cli_run");
  const auto log = d / "log.txt";
  const std::string dir = " --out-dir \"" + d.path().string() + "\"";
  ASSERT_EQ(run("synth --hours 4 --seed 5" + dir, log), 0) << testing_util::read_text(log);
  shrink_config(d.path());
  for (const char* stage : {"ingest", "calibrate", "aggregate", "plan", "fetch --mode offline", "quality",
                            "features", "experiment", "report"})
    ASSERT_EQ(run(std::string(stage) + dir, log), 0) << stage << "\n" << testing_util::read_text(log);
  const auto rows = hx::read_results_csv(d / hx::files::kResults);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].algorithm, "stepwise");
  EXPECT_TRUE(fs::exists(d.path() / hx::files::kReportDir / "tables.md"));
  EXPECT_TRUE(fs::exists(d / hx::files::kSkipped));
  EXPECT_TRUE(fs::exists(d / hx::files::kCvTable));

  ASSERT_EQ(run("train --algorithm rf --radius 100 --angle average" + dir, log), 0) << testing_util::read_text(log);
  const auto model = streetair::modeling::load_model((d / hx::files::kModel).string());
  EXPECT_EQ(model.algorithm, streetair::modeling::Algorithm::rf);
}

TEST(Cli, ErrorsExitNonzero) {
  testing_util::TempDir d("cli_err");
  const auto log = d / "log.txt";
  EXPECT_NE(run("ingest --out-dir \"" + d.path().string() + "\"", log), 0);
  testing_util::write_text(d / hx::files::kMonitoring, "taxi_id,timestamp,lon,lat,no_ppb,no2_ppb,pm25_ugm3,pm10_ugm3\nt1,x,z,w,1,2,3,4\n");
  EXPECT_EQ(run("ingest --out-dir \"" + d.path().string() + "\"", log), 1);
  EXPECT_NE(run("report --out-dir \"" + d.path().string() + "\"", log), 0);
  EXPECT_NE(run("bogus", log), 0);
}
