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
#ifndef STREETAIR_METRICS_HPP
#define STREETAIR_METRICS_HPP

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "streetair/common.hpp"

namespace streetair::metrics {

struct MetricsReport {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // percent
  double r2 = 0.0;
};

namespace detail {
inline void check_lengths(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw Error("metric inputs differ in length");
  if (y.empty()) throw Error("metric inputs are empty");
}
}  // namespace detail

inline double mse(std::span<const double> y, std::span<const double> yhat) {
  detail::check_lengths(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

inline double mae(std::span<const double> y, std::span<const double> yhat) {
  detail::check_lengths(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

inline double rmse(std::span<const double> y, std::span<const double> yhat) {
  return std::sqrt(mse(y, yhat));
}

// Percent; zero targets are skipped, all-zero targets are an error.
inline double mape(std::span<const double> y, std::span<const double> yhat) {
  detail::check_lengths(y, yhat);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    s += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    ++n;
  }
  if (n == 0) throw Error("MAPE undefined: all targets are zero");
  return 100.0 * s / static_cast<double>(n);
}

// 1 - SSR/SST with the mean of y. NaN when y is constant.
inline double r2(std::span<const double> y, std::span<const double> yhat) {
  detail::check_lengths(y, yhat);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ssr = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ssr += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  if (sst == 0.0) return quiet_nan();
  return 1.0 - ssr / sst;
}

inline MetricsReport compute_metrics(std::span<const double> y, std::span<const double> yhat) {
  MetricsReport m;
  m.mse = mse(y, yhat);
  m.mae = mae(y, yhat);
  m.rmse = std::sqrt(m.mse);
  m.mape = mape(y, yhat);
  m.r2 = r2(y, yhat);
  return m;
}

inline MetricsReport mean_report(std::span<const MetricsReport> folds) {
  if (folds.empty()) throw Error("no folds to average");
  MetricsReport m;
  for (const auto& f : folds) {
    m.mse += f.mse;
    m.mae += f.mae;
    m.rmse += f.rmse;
    m.mape += f.mape;
    m.r2 += f.r2;
  }
  const double n = static_cast<double>(folds.size());
  m.mse /= n;
  m.mae /= n;
  m.rmse /= n;
  m.mape /= n;
  m.r2 /= n;
  return m;
}

// 100 (baseline - model) / model, in percent.
inline double improvement_pct(double mse_baseline, double mse_model) {
  if (!(mse_model > 0.0)) throw Error("improvement_pct needs a positive model MSE");
  return 100.0 * (mse_baseline - mse_model) / mse_model;
}

// Pearson r via Welford's single-pass co-moment update. nullopt when either
// column is constant.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation inputs differ in length");
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0, cxx = 0.0, cyy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    mx += dx / n;
    my += dy / n;
    cxx += dx * (x[i] - mx);
    cyy += dy * (y[i] - my);
    cxy += dx * (y[i] - my);
  }
  if (cxx <= 0.0 || cyy <= 0.0) return std::nullopt;
  return cxy / std::sqrt(cxx * cyy);
}

// Row-major features (n x p) against targets (n x q): result[f][t].
inline std::vector<std::vector<std::optional<double>>> correlation_matrix(
    std::span<const double> features, std::size_t p, std::span<const double> targets,
    std::size_t q) {
  if (p == 0 || q == 0) throw Error("correlation matrix needs columns");
  if (features.size() % p || targets.size() % q || features.size() / p != targets.size() / q)
    throw Error("correlation inputs have inconsistent shapes");
  const std::size_t n = features.size() / p;
  std::vector<std::vector<std::optional<double>>> out(p, std::vector<std::optional<double>>(q));
  std::vector<double> a(n), b(n);
  for (std::size_t f = 0; f < p; ++f) {
    for (std::size_t i = 0; i < n; ++i) a[i] = features[i * p + f];
    for (std::size_t t = 0; t < q; ++t) {
      for (std::size_t i = 0; i < n; ++i) b[i] = targets[i * q + t];
      out[f][t] = pearson(a, b);
    }
  }
  return out;
}

}  // namespace streetair::metrics

#endif  // STREETAIR_METRICS_HPP
