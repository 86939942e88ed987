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
#ifndef STREETAIR_MODELING_DATASET_HPP
#define STREETAIR_MODELING_DATASET_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "streetair/common.hpp"

namespace streetair::modeling {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error("matrix data does not match its shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols_, cols_); }

  std::span<const double> data() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Feature matrix (locations x features) with one target column.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;

  std::size_t size() const { return y.size(); }
  std::size_t features() const { return x.cols(); }

  void validate() const {
    if (x.rows() != y.size()) throw Error("dataset feature/target row mismatch");
    if (y.size() < 2) throw Error("dataset needs at least 2 rows");
    if (!ids.empty() && ids.size() != y.size()) throw Error("dataset id count mismatch");
    for (double v : x.data())
      if (!std::isfinite(v)) throw Error("dataset has a non-finite feature");
    for (double v : y)
      if (!std::isfinite(v)) throw Error("dataset has a non-finite target");
  }

  Dataset subset(std::span<const std::size_t> idx) const {
    Dataset d;
    d.x = x.select_rows(idx);
    d.y.reserve(idx.size());
    for (std::size_t i : idx) d.y.push_back(y[i]);
    if (!ids.empty())
      for (std::size_t i : idx) d.ids.push_back(ids[i]);
    d.feature_names = feature_names;
    return d;
  }
};

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_DATASET_HPP
