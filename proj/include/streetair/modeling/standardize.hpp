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
#ifndef STREETAIR_MODELING_STANDARDIZE_HPP
#define STREETAIR_MODELING_STANDARDIZE_HPP

#include <cmath>
#include <span>
#include <vector>

#include "streetair/modeling/dataset.hpp"

namespace streetair::modeling {

// Per-feature z-score with training mean and population standard deviation.
// Zero-variance features map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant feature

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    const std::size_t n = x.rows(), p = x.cols();
    s.mean.assign(p, 0.0);
    s.scale.assign(p, 0.0);
    if (n == 0) return s;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) s.mean[j] += x(i, j);
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double d = x(i, j) - s.mean[j];
        s.scale[j] += d * d;
      }
    for (double& v : s.scale) v = std::sqrt(v / static_cast<double>(n));
    return s;
  }

  void transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j)
      out[j] = scale[j] > 0.0 ? (in[j] - mean[j]) / scale[j] : 0.0;
  }

  Matrix transform(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) transform_row(x.row(i), out.row(i));
    return out;
  }
};

inline std::pair<Standardizer, Matrix> standardize(const Matrix& train) {
  Standardizer s = Standardizer::fit(train);
  Matrix z = s.transform(train);
  return {std::move(s), std::move(z)};
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_STANDARDIZE_HPP
