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
#ifndef STREETAIR_MODELING_CROSS_VALIDATION_HPP
#define STREETAIR_MODELING_CROSS_VALIDATION_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "streetair/common.hpp"
#include "streetair/metrics.hpp"
#include "streetair/modeling/dataset.hpp"
#include "streetair/modeling/model.hpp"
#include "streetair/random.hpp"

namespace streetair::modeling {

// Seeded permutation cut into k contiguous chunks; the first n % k chunks
// hold one extra index.
inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                         std::uint64_t seed) {
  if (k < 2) throw Error("k-fold needs k >= 2");
  if (n < k) throw Error("k-fold needs at least k samples");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(at),
                    perm.begin() + static_cast<std::ptrdiff_t>(at + size));
    at += size;
  }
  return folds;
}

struct CvOptions {
  std::size_t k = 10;
  // R^2 against the training-fold mean instead of the held-out mean.
  bool r2_uses_training_mean = false;
};

struct CvResult {
  std::vector<metrics::MetricsReport> folds;
  metrics::MetricsReport mean;
};

inline std::uint64_t fold_seed(std::uint64_t seed) { return derive_seed(seed, {0xF01DULL}); }

inline double r2_against(std::span<const double> y, std::span<const double> yhat, double ref) {
  double ssr = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ssr += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    sst += (y[i] - ref) * (y[i] - ref);
  }
  return sst == 0.0 ? quiet_nan() : 1.0 - ssr / sst;
}

// fit_predict(train, test_x, fold) returns predictions for test_x. Folds
// depend only on `seed`, so every grid point sees the same partition.
template <typename FitPredict>
CvResult cross_validate_with(const Dataset& data, std::uint64_t seed, const CvOptions& opts,
                             FitPredict&& fit_predict) {
  data.validate();
  const auto folds = kfold_split(data.size(), opts.k, fold_seed(seed));
  CvResult res;
  std::vector<char> held(data.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(held.begin(), held.end(), 0);
    for (std::size_t i : folds[f]) held[i] = 1;
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!held[i]) train_idx.push_back(i);
    const Dataset train = data.subset(train_idx);
    const Dataset test = data.subset(folds[f]);
    const std::vector<double> yhat = fit_predict(train, test.x, f);
    auto m = metrics::compute_metrics(test.y, yhat);
    if (opts.r2_uses_training_mean) {
      double mu = 0.0;
      for (double v : train.y) mu += v;
      m.r2 = r2_against(test.y, yhat, mu / static_cast<double>(train.size()));
    }
    res.folds.push_back(m);
  }
  res.mean = metrics::mean_report(res.folds);
  return res;
}

// Model seed per fold is derived from (seed, grid_index, fold).
inline CvResult cross_validate(const Dataset& data, const ModelParams& params, std::uint64_t seed,
                               const CvOptions& opts = {}, std::size_t grid_index = 0) {
  return cross_validate_with(
      data, seed, opts, [&](const Dataset& train, const Matrix& test_x, std::size_t fold) {
        const auto model = fit_model(
            train, params,
            derive_seed(seed, {static_cast<std::uint64_t>(grid_index), static_cast<std::uint64_t>(fold)}));
        return model.predict(test_x);
      });
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_CROSS_VALIDATION_HPP
