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
#ifndef STREETAIR_MODELING_STEPWISE_HPP
#define STREETAIR_MODELING_STEPWISE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "streetair/common.hpp"
#include "streetair/modeling/dataset.hpp"
#include "streetair/modeling/standardize.hpp"

namespace streetair::modeling {

struct StepwiseParams {
  // Cap on moves; the search stops earlier when AIC stops improving.
  int max_steps = 1000;
};

struct LinearFit {
  double intercept = 0.0;
  std::vector<double> coef;
  double rss = 0.0;
};

struct StepwiseModel {
  Standardizer standardizer;
  std::vector<std::size_t> selected;  // ascending
  double intercept = 0.0;
  std::vector<double> coef;  // aligned with selected

  double predict(std::span<const double> x) const {
    double s = intercept;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      const std::size_t j = selected[k];
      const double z =
          standardizer.scale[j] > 0.0 ? (x[j] - standardizer.mean[j]) / standardizer.scale[j] : 0.0;
      s += coef[k] * z;
    }
    return s;
  }
};

// Least squares on [1, x_S]. nullopt when the design is rank deficient.
inline std::optional<LinearFit> ols(const Matrix& x, std::span<const double> y,
                                    std::span<const std::size_t> subset) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto q = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd a(n, q + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index k = 0; k < q; ++k)
      a(i, k + 1) = x(static_cast<std::size_t>(i), subset[static_cast<std::size_t>(k)]);
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < q + 1) return std::nullopt;
  const Eigen::VectorXd beta = qr.solve(b);
  LinearFit fit;
  fit.intercept = beta(0);
  for (Eigen::Index k = 0; k < q; ++k) fit.coef.push_back(beta(k + 1));
  fit.rss = (a * beta - b).squaredNorm();
  return fit;
}

// n ln(RSS/n) + 2(q+1), with RSS floored at 1e-12 TSS so exact fits compare
// by parameter count.
inline double aic(double rss, double tss, std::size_t n, std::size_t q) {
  const double nn = static_cast<double>(n);
  const double floored = std::max(rss, 1e-12 * tss);
  return nn * std::log(floored / nn) + 2.0 * static_cast<double>(q + 1);
}

inline StepwiseModel fit_stepwise_linear(const Dataset& data, const StepwiseParams& params = {}) {
  data.validate();
  const std::size_t n = data.size();
  const std::size_t p = data.features();
  StepwiseModel model;
  model.standardizer = Standardizer::fit(data.x);
  const Matrix z = model.standardizer.transform(data.x);

  double mean = 0.0;
  for (double v : data.y) mean += v;
  mean /= static_cast<double>(n);
  double tss = 0.0;
  for (double v : data.y) tss += (v - mean) * (v - mean);
  model.intercept = mean;
  if (tss == 0.0) return model;

  std::vector<std::size_t> current;
  double current_aic = aic(tss, tss, n, 0);
  LinearFit current_fit{mean, {}, tss};

  for (int step = 0; step < params.max_steps; ++step) {
    double best_aic = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_set;
    std::optional<LinearFit> best_fit;
    // Feature j toggles membership; scanning j ascending gives the
    // lowest-index tie-break across adds and drops.
    for (std::size_t j = 0; j < p; ++j) {
      std::vector<std::size_t> cand = current;
      auto it = std::lower_bound(cand.begin(), cand.end(), j);
      if (it != cand.end() && *it == j) {
        cand.erase(it);
      } else {
        if (!(n > cand.size() + 2)) continue;
        cand.insert(it, j);
      }
      auto fit = ols(z, data.y, cand);
      if (!fit) continue;
      const double a = aic(fit->rss, tss, n, cand.size());
      if (a < best_aic) {
        best_aic = a;
        best_set = std::move(cand);
        best_fit = std::move(fit);
      }
    }
    if (!best_fit || !(best_aic < current_aic)) break;
    current = std::move(best_set);
    current_aic = best_aic;
    current_fit = std::move(*best_fit);
  }
  model.selected = current;
  model.intercept = current_fit.intercept;
  model.coef = current_fit.coef;
  return model;
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_STEPWISE_HPP
