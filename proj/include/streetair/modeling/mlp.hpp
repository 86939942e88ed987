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
#ifndef STREETAIR_MODELING_MLP_HPP
#define STREETAIR_MODELING_MLP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetair/common.hpp"
#include "streetair/modeling/dataset.hpp"
#include "streetair/modeling/standardize.hpp"
#include "streetair/random.hpp"

namespace streetair::modeling {

struct MlpParams {
  double learning_rate = 0.001;
  int batch_size = 32;
  int epochs = 200;
  std::vector<int> hidden = {64, 32};
  bool zero_output_init = false;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw Error("mlp learning_rate must be >= 0");
    if (batch_size < 1) throw Error("mlp batch_size must be >= 1");
    if (epochs < 0) throw Error("mlp epochs must be >= 0");
    for (int h : hidden)
      if (h < 1) throw Error("mlp hidden layer widths must be >= 1");
  }
};

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

// Fully connected ReLU network with a linear scalar output. Samples are
// columns of the input matrices.
class Mlp {
 public:
  std::vector<DenseLayer> layers;

  static Mlp init(std::size_t inputs, const std::vector<int>& hidden, double output_bias,
                  bool zero_output, Rng& rng) {
    Mlp net;
    std::size_t fan_in = inputs;
    std::vector<std::size_t> widths(hidden.begin(), hidden.end());
    widths.push_back(1);
    for (std::size_t l = 0; l < widths.size(); ++l) {
      DenseLayer layer;
      layer.w.resize(static_cast<Eigen::Index>(widths[l]), static_cast<Eigen::Index>(fan_in));
      layer.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(widths[l]));
      const bool output = l + 1 == widths.size();
      const double sd = std::sqrt((output ? 1.0 : 2.0) / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
        for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
          layer.w(r, c) = (output && zero_output) ? 0.0 : rng.normal(0.0, sd);
      if (output) layer.b(0) = output_bias;
      net.layers.push_back(std::move(layer));
      fan_in = widths[l];
    }
    return net;
  }

  Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Eigen::MatrixXd z = (layers[l].w * a).colwise() + layers[l].b;
      if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
      a = std::move(z);
    }
    return a.row(0);
  }

  // Signs of hidden pre-activations, flattened; used to detect kinks.
  std::vector<bool> activation_pattern(const Eigen::MatrixXd& x) const {
    std::vector<bool> out;
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      Eigen::MatrixXd z = (layers[l].w * a).colwise() + layers[l].b;
      for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z.data()[i] > 0.0);
      a = z.cwiseMax(0.0);
    }
    return out;
  }

  // Mean squared error over the columns of x and its gradient.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                           std::vector<DenseLayer>& grad) const {
    const std::size_t L = layers.size();
    std::vector<Eigen::MatrixXd> acts(L + 1);
    acts[0] = x;
    for (std::size_t l = 0; l < L; ++l) {
      Eigen::MatrixXd z = (layers[l].w * acts[l]).colwise() + layers[l].b;
      if (l + 1 < L) z = z.cwiseMax(0.0);
      acts[l + 1] = std::move(z);
    }
    const double n = static_cast<double>(x.cols());
    const Eigen::RowVectorXd r = acts[L].row(0) - y;
    const double loss = r.squaredNorm() / n;

    grad.resize(L);
    Eigen::MatrixXd delta = (2.0 / n) * r;
    for (std::size_t l = L; l-- > 0;) {
      grad[l].w = delta * acts[l].transpose();
      grad[l].b = delta.rowwise().sum();
      if (l == 0) break;
      Eigen::MatrixXd back = layers[l].w.transpose() * delta;
      delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
    return loss;
  }

  std::size_t parameter_count() const {
    std::size_t k = 0;
    for (const auto& layer : layers) k += static_cast<std::size_t>(layer.w.size() + layer.b.size());
    return k;
  }

  static std::vector<double> flatten(const std::vector<DenseLayer>& ls) {
    std::vector<double> out;
    for (const auto& layer : ls) {
      out.insert(out.end(), layer.w.data(), layer.w.data() + layer.w.size());
      out.insert(out.end(), layer.b.data(), layer.b.data() + layer.b.size());
    }
    return out;
  }
  std::vector<double> parameters() const { return flatten(layers); }

  void set_parameters(std::span<const double> theta) {
    if (theta.size() != parameter_count()) throw Error("mlp parameter count mismatch");
    std::size_t k = 0;
    for (auto& layer : layers) {
      std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(k), layer.w.size(), layer.w.data());
      k += static_cast<std::size_t>(layer.w.size());
      std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(k), layer.b.size(), layer.b.data());
      k += static_cast<std::size_t>(layer.b.size());
    }
  }
};

struct MlpModel {
  MlpParams params;
  Standardizer standardizer;
  Mlp net;

  double predict(std::span<const double> x) const {
    Eigen::MatrixXd col(static_cast<Eigen::Index>(x.size()), 1);
    std::vector<double> z(x.size());
    standardizer.transform_row(x, z);
    for (std::size_t j = 0; j < z.size(); ++j) col(static_cast<Eigen::Index>(j), 0) = z[j];
    return net.forward(col)(0);
  }
};

inline Eigen::MatrixXd to_columns(const Matrix& x) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.cols()), static_cast<Eigen::Index>(x.rows()));
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x(i, j);
  return out;
}

inline MlpModel fit_mlp(const Dataset& data, const MlpParams& params, std::uint64_t seed) {
  params.validate();
  data.validate();
  const std::size_t n = data.size();
  MlpModel model;
  model.params = params;
  model.standardizer = Standardizer::fit(data.x);
  const Eigen::MatrixXd x = to_columns(model.standardizer.transform(data.x));
  Eigen::RowVectorXd y(static_cast<Eigen::Index>(n));
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y(static_cast<Eigen::Index>(i)) = data.y[i];
    y_mean += data.y[i];
  }
  y_mean /= static_cast<double>(n);

  Rng init_rng(derive_seed(seed, {0}));
  model.net = Mlp::init(data.features(), params.hidden, y_mean, params.zero_output_init, init_rng);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::vector<double> theta = model.net.parameters();
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
  std::vector<DenseLayer> grad;
  std::vector<std::size_t> perm(n);
  const auto batch = static_cast<std::size_t>(params.batch_size);
  double b1t = 1.0, b2t = 1.0;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(epoch)}));
    rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const auto bs = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xb(x.rows(), bs);
      Eigen::RowVectorXd yb(bs);
      for (std::size_t k = start; k < end; ++k) {
        const auto c = static_cast<Eigen::Index>(k - start);
        xb.col(c) = x.col(static_cast<Eigen::Index>(perm[k]));
        yb(c) = y(static_cast<Eigen::Index>(perm[k]));
      }
      const double loss = model.net.loss_and_gradient(xb, yb, grad);
      if (!std::isfinite(loss))
        throw Error("mlp training diverged: non-finite loss at epoch " + std::to_string(epoch));
      const std::vector<double> gflat = Mlp::flatten(grad);
      b1t *= kBeta1;
      b2t *= kBeta2;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gflat[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gflat[i] * gflat[i];
        const double mhat = m[i] / (1.0 - b1t);
        const double vhat = v[i] / (1.0 - b2t);
        theta[i] -= params.learning_rate * mhat / (std::sqrt(vhat) + kEps);
      }
      model.net.set_parameters(theta);
    }
  }
  return model;
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_MLP_HPP
