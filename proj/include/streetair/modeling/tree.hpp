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
#ifndef STREETAIR_MODELING_TREE_HPP
#define STREETAIR_MODELING_TREE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "streetair/modeling/dataset.hpp"

namespace streetair::modeling {

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// Binary regression tree; x[feature] < threshold goes left.
class RegressionTree {
 public:
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = x[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold ? nodes[i].left
                                                                              : nodes[i].right;
    return nodes[i].value;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
  }

  nlohmann::json to_json(int i = 0) const {
    const TreeNode& n = nodes[i];
    if (n.feature < 0) return {{"leaf", n.value}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", to_json(n.left)},
            {"right", to_json(n.right)}};
  }

  static RegressionTree from_json(const nlohmann::json& j) {
    RegressionTree t;
    t.append(j);
    return t;
  }

 private:
  int append(const nlohmann::json& j) {
    const int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("leaf")) {
      nodes[idx].value = j.at("leaf").get<double>();
      return idx;
    }
    nodes[idx].feature = j.at("feature").get<int>();
    nodes[idx].threshold = j.at("threshold").get<double>();
    const int l = append(j.at("left"));
    const int r = append(j.at("right"));
    nodes[idx].left = l;
    nodes[idx].right = r;
    return idx;
  }
};

// Per-feature row order of a training matrix, computed once per fit.
class ColumnOrder {
 public:
  ColumnOrder() = default;
  explicit ColumnOrder(const Matrix& x) : order_(x.cols()) {
    for (std::size_t f = 0; f < x.cols(); ++f) {
      auto& o = order_[f];
      o.resize(x.rows());
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
  }
  const std::vector<std::uint32_t>& sorted_rows(std::size_t f) const { return order_[f]; }
  std::size_t features() const { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

namespace detail {

struct TreeGrowthInput {
  const Matrix* x = nullptr;
  const ColumnOrder* order = nullptr;
  // Training rows of this tree; duplicates allowed (bootstrap).
  std::span<const std::size_t> rows;
  // First- and second-order statistics per position in `rows`.
  std::span<const double> g;
  std::span<const double> h;
  int max_depth = 0;
  // Leaves are forced when every g in a node is equal.
  bool stop_on_constant_g = false;
};

// Greedy exact-split growth. Rule supplies
//   double gain(GL, HL, GR, HR)   (-inf when the split is not allowed)
//   double leaf(G, H)
// and choose(features) fills the candidate feature list for a node.
// Only splits with gain > 0 are taken; ties keep the first candidate in
// ascending (feature, threshold) order.
template <typename Rule, typename Chooser>
RegressionTree grow_tree(const TreeGrowthInput& in, const Rule& rule, Chooser&& choose) {
  const Matrix& x = *in.x;
  const std::size_t m = in.rows.size();
  const std::size_t p = x.cols();

  // Positions in `rows` sorted by each feature: bucket positions by row, then
  // walk the presorted row order.
  std::vector<std::uint32_t> row_start(x.rows() + 1, 0);
  for (std::size_t pos = 0; pos < m; ++pos) ++row_start[in.rows[pos] + 1];
  for (std::size_t r = 0; r < x.rows(); ++r) row_start[r + 1] += row_start[r];
  std::vector<std::uint32_t> by_row(m);
  {
    std::vector<std::uint32_t> fill(row_start.begin(), row_start.end() - 1);
    for (std::size_t pos = 0; pos < m; ++pos)
      by_row[fill[in.rows[pos]]++] = static_cast<std::uint32_t>(pos);
  }
  std::vector<std::vector<std::uint32_t>> ord(p);
  for (std::size_t f = 0; f < p; ++f) {
    auto& o = ord[f];
    o.reserve(m);
    for (std::uint32_t r : in.order->sorted_rows(f))
      for (std::uint32_t k = row_start[r]; k < row_start[r + 1]; ++k) o.push_back(by_row[k]);
  }

  auto value = [&](std::uint32_t pos, std::size_t f) { return x(in.rows[pos], f); };

  RegressionTree tree;
  std::vector<char> goes_left(m, 0);
  std::vector<std::uint32_t> scratch(m);
  std::vector<std::size_t> candidates;

  struct Task {
    int node;
    std::size_t lo, hi;
    int depth;
  };
  std::vector<Task> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, m, 0});

  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    double G = 0.0, H = 0.0;
    for (std::size_t k = t.lo; k < t.hi; ++k) {
      const std::uint32_t pos = ord[0].empty() ? static_cast<std::uint32_t>(k) : ord[0][k];
      G += in.g[pos];
      H += in.h[pos];
    }
    tree.nodes[t.node].value = rule.leaf(G, H);

    if (t.depth >= in.max_depth || t.hi - t.lo < 2 || p == 0) continue;
    if (in.stop_on_constant_g) {
      double lo_g = std::numeric_limits<double>::infinity(), hi_g = -lo_g;
      for (std::size_t k = t.lo; k < t.hi; ++k) {
        lo_g = std::min(lo_g, in.g[ord[0][k]]);
        hi_g = std::max(hi_g, in.g[ord[0][k]]);
      }
      if (lo_g == hi_g) continue;
    }

    choose(candidates);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t f : candidates) {
      const auto& o = ord[f];
      double GL = 0.0, HL = 0.0;
      for (std::size_t k = t.lo; k + 1 < t.hi; ++k) {
        GL += in.g[o[k]];
        HL += in.h[o[k]];
        const double a = value(o[k], f);
        const double b = value(o[k + 1], f);
        if (!(a < b)) continue;
        const double gain = rule.gain(GL, HL, G - GL, H - HL);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double thr = 0.5 * (a + b);
          if (!(a < thr)) thr = b;
          best_threshold = thr;
        }
      }
    }
    if (best_feature < 0) continue;

    const auto bf = static_cast<std::size_t>(best_feature);
    std::size_t n_left = 0;
    for (std::size_t k = t.lo; k < t.hi; ++k) {
      const std::uint32_t pos = ord[0][k];
      goes_left[pos] = value(pos, bf) < best_threshold;
      n_left += goes_left[pos];
    }
    for (std::size_t f = 0; f < p; ++f) {
      auto& o = ord[f];
      std::size_t li = 0, ri = n_left;
      for (std::size_t k = t.lo; k < t.hi; ++k) {
        const std::uint32_t pos = o[k];
        if (goes_left[pos])
          scratch[li++] = pos;
        else
          scratch[ri++] = pos;
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(t.hi - t.lo),
                o.begin() + static_cast<std::ptrdiff_t>(t.lo));
    }

    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[t.node].feature = best_feature;
    tree.nodes[t.node].threshold = best_threshold;
    tree.nodes[t.node].left = left;
    tree.nodes[t.node].right = right;
    // Right is pushed first so the left subtree is expanded first.
    stack.push_back({right, t.lo + n_left, t.hi, t.depth + 1});
    stack.push_back({left, t.lo, t.lo + n_left, t.depth + 1});
  }
  return tree;
}

}  // namespace detail

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_TREE_HPP
