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
#ifndef STREETAIR_MODELING_GRID_SEARCH_HPP
#define STREETAIR_MODELING_GRID_SEARCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "streetair/common.hpp"
#include "streetair/csv.hpp"
#include "streetair/modeling/cross_validation.hpp"
#include "streetair/modeling/model.hpp"
#include "streetair/parallel.hpp"

namespace streetair::modeling {

// Search axes per learner. Defaults are the full published grids.
struct HyperGrid {
  struct Gbt {
    std::vector<double> eta = {0, 0.01, 0.05, 0.1, 0.3, 0.5};
    std::vector<double> min_child_weight = {1, 2, 3, 4, 5};
    std::vector<int> max_depth = {3, 5, 7, 9, 10};
    std::vector<double> gamma = {0, 0.1, 0.3, 0.5, 0.7, 0.9, 1};
    std::vector<double> subsample = {0.5, 0.6, 0.7, 0.8, 0.9, 1};
    int n_rounds = 300;
    double lambda = 1.0;
  } gbt;
  struct Rf {
    std::vector<int> n_trees = {50, 100, 200, 500};
    std::vector<int> max_depth = {6, 7, 8, 9, 10, 11, 12};
  } rf;
  struct Nn {
    std::vector<double> learning_rate = {0.0001, 0.0003, 0.0005, 0.001};
    std::vector<int> batch_size = {8, 16, 32, 64};
    int epochs = 200;
    std::vector<int> hidden = {64, 32};
  } nn;

  // Cartesian product, first axis outermost.
  std::vector<ModelParams> points(Algorithm a) const {
    std::vector<ModelParams> out;
    auto require = [](bool ok, const char* what) {
      if (!ok) throw Error(std::string("empty hyperparameter axis: ") + what);
    };
    switch (a) {
      case Algorithm::stepwise: out.emplace_back(StepwiseParams{}); break;
      case Algorithm::rf:
        require(!rf.n_trees.empty(), "rf.n_trees");
        require(!rf.max_depth.empty(), "rf.max_depth");
        for (int t : rf.n_trees)
          for (int d : rf.max_depth) {
            RfParams p;
            p.n_trees = t;
            p.max_depth = d;
            out.emplace_back(p);
          }
        break;
      case Algorithm::gbt:
        require(!gbt.eta.empty(), "gbt.eta");
        require(!gbt.min_child_weight.empty(), "gbt.min_child_weight");
        require(!gbt.max_depth.empty(), "gbt.max_depth");
        require(!gbt.gamma.empty(), "gbt.gamma");
        require(!gbt.subsample.empty(), "gbt.subsample");
        for (double e : gbt.eta)
          for (double w : gbt.min_child_weight)
            for (int d : gbt.max_depth)
              for (double g : gbt.gamma)
                for (double s : gbt.subsample) {
                  GbtParams p;
                  p.eta = e;
                  p.min_child_weight = w;
                  p.max_depth = d;
                  p.gamma = g;
                  p.subsample = s;
                  p.n_rounds = gbt.n_rounds;
                  p.lambda = gbt.lambda;
                  out.emplace_back(p);
                }
        break;
      case Algorithm::nn:
        require(!nn.learning_rate.empty(), "nn.learning_rate");
        require(!nn.batch_size.empty(), "nn.batch_size");
        for (double lr : nn.learning_rate)
          for (int b : nn.batch_size) {
            MlpParams p;
            p.learning_rate = lr;
            p.batch_size = b;
            p.epochs = nn.epochs;
            p.hidden = nn.hidden;
            out.emplace_back(p);
          }
        break;
    }
    return out;
  }

  nlohmann::json to_json() const {
    return {{"gbt",
             {{"eta", gbt.eta},
              {"min_child_weight", gbt.min_child_weight},
              {"max_depth", gbt.max_depth},
              {"gamma", gbt.gamma},
              {"subsample", gbt.subsample},
              {"n_rounds", gbt.n_rounds},
              {"lambda", gbt.lambda}}},
            {"rf", {{"n_trees", rf.n_trees}, {"max_depth", rf.max_depth}}},
            {"nn",
             {{"learning_rate", nn.learning_rate},
              {"batch_size", nn.batch_size},
              {"epochs", nn.epochs},
              {"hidden", nn.hidden}}}};
  }

  // Keys present in j replace the defaults.
  static HyperGrid from_json(const nlohmann::json& j) {
    HyperGrid g;
    auto get = [](const nlohmann::json& o, const char* k, auto& field) {
      if (o.contains(k)) field = o.at(k).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("gbt")) {
      const auto& o = j.at("gbt");
      get(o, "eta", g.gbt.eta);
      get(o, "min_child_weight", g.gbt.min_child_weight);
      get(o, "max_depth", g.gbt.max_depth);
      get(o, "gamma", g.gbt.gamma);
      get(o, "subsample", g.gbt.subsample);
      get(o, "n_rounds", g.gbt.n_rounds);
      get(o, "lambda", g.gbt.lambda);
    }
    if (j.contains("rf")) {
      get(j.at("rf"), "n_trees", g.rf.n_trees);
      get(j.at("rf"), "max_depth", g.rf.max_depth);
    }
    if (j.contains("nn")) {
      const auto& o = j.at("nn");
      get(o, "learning_rate", g.nn.learning_rate);
      get(o, "batch_size", g.nn.batch_size);
      get(o, "epochs", g.nn.epochs);
      get(o, "hidden", g.nn.hidden);
    }
    return g;
  }
};

struct GridSearchResult {
  Algorithm algorithm = Algorithm::stepwise;
  std::vector<ModelParams> points;
  std::vector<CvResult> cv;  // aligned with points
  std::size_t best = 0;

  const ModelParams& best_params() const { return points[best]; }
  const CvResult& best_cv() const { return cv[best]; }
};

// Exhaustive search minimizing mean CV MSE; the earliest point wins ties.
inline GridSearchResult grid_search(const Dataset& data, const std::vector<ModelParams>& points,
                                    std::uint64_t seed, const CvOptions& opts = {},
                                    std::size_t workers = 1) {
  if (points.empty()) throw Error("grid search needs at least one grid point");
  GridSearchResult res;
  res.algorithm = algorithm_of(points.front());
  res.points = points;
  res.cv.resize(points.size());
  parallel_for(points.size(), workers,
               [&](std::size_t i) { res.cv[i] = cross_validate(data, points[i], seed, opts, i); });
  for (std::size_t i = 1; i < points.size(); ++i)
    if (res.cv[i].mean.mse < res.cv[res.best].mean.mse) res.best = i;
  return res;
}

inline std::vector<std::string> cv_table_header() {
  return {"algorithm", "grid_index", "params", "fold", "mse", "mae", "rmse", "mape", "r2"};
}

// One row per (grid point, fold) followed by a "mean" row per point.
inline void write_cv_table(const std::string& path, const std::vector<GridSearchResult>& results) {
  csv::Writer w(path);
  w.row(cv_table_header());
  auto emit = [&w](const GridSearchResult& r, std::size_t i, const std::string& fold,
                   const metrics::MetricsReport& m) {
    w.row({std::string(to_string(r.algorithm)), std::to_string(i), params_string(r.points[i]), fold,
           format_double(m.mse), format_double(m.mae), format_double(m.rmse),
           format_double(m.mape), format_double(m.r2)});
  };
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      for (std::size_t f = 0; f < r.cv[i].folds.size(); ++f)
        emit(r, i, std::to_string(f), r.cv[i].folds[f]);
      emit(r, i, "mean", r.cv[i].mean);
    }
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_GRID_SEARCH_HPP
