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
#ifndef STREETAIR_MODELING_RANDOM_FOREST_HPP
#define STREETAIR_MODELING_RANDOM_FOREST_HPP

#include <algorithm>
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

struct RfParams {
  int n_trees = 100;
  int max_depth = 8;
  // Test hooks; both on for normal training.
  bool bootstrap = true;
  bool feature_sampling = true;

  void validate() const {
    if (n_trees < 1) throw Error("random forest needs n_trees >= 1");
    if (max_depth < 0) throw Error("random forest max_depth must be >= 0");
  }
};

struct ForestModel {
  RfParams params;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
};

namespace detail {

// Variance-reduction gain expressed through sums: with g = y and h = 1,
// GL^2/HL + GR^2/HR - G^2/H equals the drop in squared error.
struct VarianceRule {
  double gain(double gl, double hl, double gr, double hr) const {
    const double g = gl + gr, h = hl + hr;
    return gl * gl / hl + gr * gr / hr - g * g / h;
  }
  double leaf(double g, double h) const { return g / h; }
};

}  // namespace detail

inline ForestModel fit_random_forest(const Dataset& data, const RfParams& params,
                                     std::uint64_t seed) {
  params.validate();
  data.validate();
  const std::size_t n = data.size();
  const std::size_t p = data.features();
  const std::size_t mtry = params.feature_sampling ? (p + 2) / 3 : p;
  const ColumnOrder order(data.x);

  ForestModel model;
  model.params = params;
  model.trees.reserve(static_cast<std::size_t>(params.n_trees));
  std::vector<std::size_t> rows(n);
  std::vector<double> g(n), h(n, 1.0);
  std::vector<std::size_t> pool(p);
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    if (params.bootstrap) {
      for (auto& r : rows) r = rng.index(n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    for (std::size_t i = 0; i < n; ++i) g[i] = data.y[rows[i]];

    auto choose = [&](std::vector<std::size_t>& out) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      if (mtry < p) {
        for (std::size_t k = 0; k < mtry; ++k) std::swap(pool[k], pool[k + rng.index(p - k)]);
      }
      out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(mtry));
      std::sort(out.begin(), out.end());
    };

    detail::TreeGrowthInput in;
    in.x = &data.x;
    in.order = &order;
    in.rows = rows;
    in.g = g;
    in.h = h;
    in.max_depth = params.max_depth;
    in.stop_on_constant_g = true;
    model.trees.push_back(detail::grow_tree(in, detail::VarianceRule{}, choose));
  }
  return model;
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_RANDOM_FOREST_HPP
