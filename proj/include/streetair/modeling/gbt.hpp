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
#ifndef STREETAIR_MODELING_GBT_HPP
#define STREETAIR_MODELING_GBT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "streetair/common.hpp"
#include "streetair/modeling/dataset.hpp"
#include "streetair/modeling/tree.hpp"
#include "streetair/random.hpp"

namespace streetair::modeling {

struct GbtParams {
  double eta = 0.3;
  double min_child_weight = 1.0;
  int max_depth = 6;
  double gamma = 0.0;
  double subsample = 1.0;
  int n_rounds = 300;
  double lambda = 1.0;

  void validate() const {
    if (!(eta >= 0.0)) throw Error("gbt eta must be >= 0");
    if (!(lambda >= 0.0)) throw Error("gbt lambda must be >= 0");
    if (!(gamma >= 0.0)) throw Error("gbt gamma must be >= 0");
    if (!(min_child_weight >= 0.0)) throw Error("gbt min_child_weight must be >= 0");
    if (max_depth < 0) throw Error("gbt max_depth must be >= 0");
    if (n_rounds < 0) throw Error("gbt n_rounds must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw Error("gbt subsample must be in (0, 1]");
  }
};

struct GbtModel {
  GbtParams params;
  double base_score = 0.0;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const { return predict_rounds(x, trees.size()); }

  // Prediction using only the first `rounds` trees.
  double predict_rounds(std::span<const double> x, std::size_t rounds) const {
    double s = 0.0;
    const std::size_t r = std::min(rounds, trees.size());
    for (std::size_t t = 0; t < r; ++t) s += trees[t].predict(x);
    return base_score + params.eta * s;
  }
};

namespace detail {

struct SecondOrderRule {
  double lambda;
  double gamma;
  double min_child_weight;

  double gain(double gl, double hl, double gr, double hr) const {
    if (hl < min_child_weight || hr < min_child_weight)
      return -std::numeric_limits<double>::infinity();
    const double g = gl + gr, h = hl + hr;
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) -
           gamma;
  }
  double leaf(double g, double h) const { return -g / (h + lambda); }
};

}  // namespace detail

inline GbtModel fit_gbt(const Dataset& data, const GbtParams& params, std::uint64_t seed) {
  params.validate();
  data.validate();
  const std::size_t n = data.size();
  const std::size_t p = data.features();

  GbtModel model;
  model.params = params;
  for (double v : data.y) model.base_score += v;
  model.base_score /= static_cast<double>(n);
  if (params.eta == 0.0 || params.n_rounds == 0) return model;

  const ColumnOrder order(data.x);
  const detail::SecondOrderRule rule{params.lambda, params.gamma, params.min_child_weight};
  std::vector<double> yhat(n, model.base_score);
  const std::size_t m = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))), 1, n);
  std::vector<std::size_t> perm(n), rows;
  std::vector<double> g, h(m, 1.0);
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto choose = [&](std::vector<std::size_t>& out) { out = all; };

  for (int round = 0; round < params.n_rounds; ++round) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (m < n) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(round)}));
      for (std::size_t k = 0; k < m; ++k) std::swap(perm[k], perm[k + rng.index(n - k)]);
      rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
      std::sort(rows.begin(), rows.end());
    } else {
      rows = perm;
    }
    g.resize(m);
    for (std::size_t i = 0; i < m; ++i) g[i] = yhat[rows[i]] - data.y[rows[i]];

    detail::TreeGrowthInput in;
    in.x = &data.x;
    in.order = &order;
    in.rows = rows;
    in.g = g;
    in.h = h;
    in.max_depth = params.max_depth;
    RegressionTree tree = detail::grow_tree(in, rule, choose);
    for (std::size_t i = 0; i < n; ++i) yhat[i] += params.eta * tree.predict(data.x.row(i));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_GBT_HPP
