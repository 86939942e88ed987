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

// Command-line front end: one subcommand per pipeline stage.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "streetair/harness/stages.hpp"

namespace {

namespace fs = std::filesystem;
using namespace streetair;
using namespace streetair::harness;

struct CommonArgs {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out_dir = ".";
  std::string data_dir;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--seed", a.seed, "Master seed (overrides the config)");
  cmd->add_option("--config", a.config, "Experiment config JSON");
  cmd->add_option("--out-dir", a.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--data-dir", a.data_dir, "Input directory (defaults to --out-dir)");
  cmd->add_option("--workers", a.workers, "Worker threads (overrides the config)");
}

StageContext make_context(const CommonArgs& a) {
  StageContext ctx;
  ctx.out_dir = a.out_dir;
  ctx.data_dir = a.data_dir.empty() ? a.out_dir : a.data_dir;
  fs::create_directories(ctx.out_dir);
  fs::path cfg = a.config;
  if (cfg.empty() && fs::exists(ctx.data_dir / files::kConfig)) cfg = ctx.data_dir / files::kConfig;
  if (!cfg.empty()) ctx.config = load_config(cfg);
  if (a.seed) ctx.config.seed = *a.seed;
  if (a.workers) {
    ctx.config.experiment.workers = *a.workers;
    ctx.config.svi.concurrency = *a.workers;
  }
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Street-level imagery air-pollution modeling pipeline"};
  app.require_subcommand(1);

  CommonArgs common;
  std::function<StageStatus(const StageContext&)> action;

  auto simple = [&](const char* name, const char* help, StageStatus (*fn)(const StageContext&)) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    cmd->callback([&action, fn] { action = fn; });
  };
  simple("ingest", "Parse and clean monitoring.csv", &stage_ingest);
  simple("calibrate", "Remove the diurnal background using reference.csv", &stage_calibrate);
  simple("aggregate", "Median of calibrated readings per grid cell", &stage_aggregate);
  simple("plan", "Road sample points per location and buffer radius", &stage_plan);
  simple("quality", "Assess blur, exposure and color distortion of every image", &stage_quality);
  simple("features", "Label-map class ratios per location, radius and angle", &stage_features);
  simple("experiment", "Run the full strategy x learner matrix", &stage_experiment);
  simple("report", "Render tables, ranking and sweep files from results.csv", &stage_report);

  std::string mode = "offline";
  {
    auto* cmd = app.add_subcommand("fetch", "Download or verify street-level images");
    add_common(cmd, common);
    cmd->add_option("--mode", mode, "online or offline")
        ->check(CLI::IsMember({"online", "offline"}))
        ->capture_default_str();
    cmd->callback([&] {
      action = [&mode](const StageContext& c) {
        return stage_fetch(c, mode == "online" ? svi::FetchMode::online : svi::FetchMode::offline);
      };
    });
  }

  TrainRequest train;
  std::string pollutant = "no", algorithm = "rf";
  {
    auto* cmd = app.add_subcommand("train", "Grid search and fit one model");
    add_common(cmd, common);
    cmd->add_option("--pollutant", pollutant)->capture_default_str();
    cmd->add_option("--algorithm", algorithm, "stepwise, rf, gbt or nn")->capture_default_str();
    cmd->add_option("--radius", train.radius)->capture_default_str();
    cmd->add_option("--angle", train.angle, "0, 90, 180, 270 or average")->capture_default_str();
    cmd->add_option("--quality", train.quality)->capture_default_str();
    cmd->callback([&] {
      action = [&](const StageContext& c) {
        auto p = parse_pollutant(pollutant);
        if (!p) return StageStatus{2, "unknown pollutant " + pollutant};
        train.pollutant = *p;
        train.algorithm = modeling::parse_algorithm(algorithm);
        return stage_train(c, train);
      };
    });
  }

  SynthOptions synth;
  {
    auto* cmd = app.add_subcommand("synth", "Generate a seeded synthetic city");
    add_common(cmd, common);
    cmd->add_option("--corrupt-fraction", synth.corrupt_fraction)->capture_default_str();
    cmd->add_option("--defect-fraction", synth.natural_defect_fraction)->capture_default_str();
    cmd->add_option("--hours", synth.hours)->capture_default_str();
    cmd->add_option("--taxis", synth.taxis)->capture_default_str();
    cmd->add_option("--extent", synth.extent_m, "City side length in meters")->capture_default_str();
    cmd->callback([&] {
      action = [&](const StageContext& c) {
        if (common.seed) synth.seed = *common.seed;
        return stage_synth(c, synth);
      };
    });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    const StageContext ctx = make_context(common);
    const StageStatus st = action(ctx);
    if (st.code != 0) std::cerr << "error: " << st.message << '\n';
    return st.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
