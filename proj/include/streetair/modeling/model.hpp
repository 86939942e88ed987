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
#ifndef STREETAIR_MODELING_MODEL_HPP
#define STREETAIR_MODELING_MODEL_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "streetair/common.hpp"
#include "streetair/modeling/dataset.hpp"
#include "streetair/modeling/gbt.hpp"
#include "streetair/modeling/mlp.hpp"
#include "streetair/modeling/random_forest.hpp"
#include "streetair/modeling/stepwise.hpp"

namespace streetair::modeling {

enum class Algorithm { stepwise, rf, gbt, nn };

inline constexpr std::array<Algorithm, 4> kAllAlgorithms = {Algorithm::stepwise, Algorithm::rf,
                                                            Algorithm::gbt, Algorithm::nn};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::stepwise: return "stepwise";
    case Algorithm::rf: return "rf";
    case Algorithm::gbt: return "gbt";
    case Algorithm::nn: return "nn";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == s) return a;
  throw Error("unknown algorithm '" + std::string(s) + "'");
}

using ModelParams = std::variant<StepwiseParams, RfParams, GbtParams, MlpParams>;

inline Algorithm algorithm_of(const ModelParams& p) {
  return static_cast<Algorithm>(p.index());
}

// Stable "k=v;k=v" rendering used in tables.
inline std::string params_string(const ModelParams& params) {
  std::string s;
  auto kv = [&s](std::string_view k, const std::string& v) {
    if (!s.empty()) s += ';';
    s += k;
    s += '=';
    s += v;
  };
  auto num = [](double v) { return format_double(v); };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StepwiseParams>) {
          kv("criterion", "aic");
        } else if constexpr (std::is_same_v<T, RfParams>) {
          kv("n_trees", std::to_string(p.n_trees));
          kv("max_depth", std::to_string(p.max_depth));
        } else if constexpr (std::is_same_v<T, GbtParams>) {
          kv("eta", num(p.eta));
          kv("min_child_weight", num(p.min_child_weight));
          kv("max_depth", std::to_string(p.max_depth));
          kv("gamma", num(p.gamma));
          kv("subsample", num(p.subsample));
          kv("n_rounds", std::to_string(p.n_rounds));
          kv("lambda", num(p.lambda));
        } else {
          kv("learning_rate", num(p.learning_rate));
          kv("batch_size", std::to_string(p.batch_size));
          kv("epochs", std::to_string(p.epochs));
          std::string h;
          for (int w : p.hidden) h += (h.empty() ? "" : "x") + std::to_string(w);
          kv("hidden", h);
        }
      },
      params);
  return s;
}

inline nlohmann::json params_to_json(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StepwiseParams>) {
          return {{"max_steps", p.max_steps}};
        } else if constexpr (std::is_same_v<T, RfParams>) {
          return {{"n_trees", p.n_trees},
                  {"max_depth", p.max_depth},
                  {"bootstrap", p.bootstrap},
                  {"feature_sampling", p.feature_sampling}};
        } else if constexpr (std::is_same_v<T, GbtParams>) {
          return {{"eta", p.eta},           {"min_child_weight", p.min_child_weight},
                  {"max_depth", p.max_depth}, {"gamma", p.gamma},
                  {"subsample", p.subsample}, {"n_rounds", p.n_rounds},
                  {"lambda", p.lambda}};
        } else {
          return {{"learning_rate", p.learning_rate}, {"batch_size", p.batch_size},
                  {"epochs", p.epochs},               {"hidden", p.hidden},
                  {"zero_output_init", p.zero_output_init}};
        }
      },
      params);
}

// Missing keys keep their defaults, so partial objects are valid overrides.
inline ModelParams params_from_json(Algorithm a, const nlohmann::json& j) {
  auto get = [&j](const char* k, auto& field) {
    if (j.contains(k)) field = j.at(k).get<std::decay_t<decltype(field)>>();
  };
  switch (a) {
    case Algorithm::stepwise: {
      StepwiseParams p;
      get("max_steps", p.max_steps);
      return p;
    }
    case Algorithm::rf: {
      RfParams p;
      get("n_trees", p.n_trees);
      get("max_depth", p.max_depth);
      get("bootstrap", p.bootstrap);
      get("feature_sampling", p.feature_sampling);
      return p;
    }
    case Algorithm::gbt: {
      GbtParams p;
      get("eta", p.eta);
      get("min_child_weight", p.min_child_weight);
      get("max_depth", p.max_depth);
      get("gamma", p.gamma);
      get("subsample", p.subsample);
      get("n_rounds", p.n_rounds);
      get("lambda", p.lambda);
      return p;
    }
    case Algorithm::nn: {
      MlpParams p;
      get("learning_rate", p.learning_rate);
      get("batch_size", p.batch_size);
      get("epochs", p.epochs);
      get("hidden", p.hidden);
      get("zero_output_init", p.zero_output_init);
      return p;
    }
  }
  throw Error("unknown algorithm");
}

using FittedModel = std::variant<StepwiseModel, ForestModel, GbtModel, MlpModel>;

struct TrainedModel {
  Algorithm algorithm = Algorithm::stepwise;
  ModelParams params;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  FittedModel fitted;

  double predict(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, fitted);
  }

  std::vector<double> predict(const Matrix& x) const {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
    return out;
  }
};

inline TrainedModel fit_model(const Dataset& data, const ModelParams& params, std::uint64_t seed) {
  TrainedModel m;
  m.algorithm = algorithm_of(params);
  m.params = params;
  m.seed = seed;
  m.feature_names = data.feature_names;
  switch (m.algorithm) {
    case Algorithm::stepwise:
      m.fitted = fit_stepwise_linear(data, std::get<StepwiseParams>(params));
      break;
    case Algorithm::rf: m.fitted = fit_random_forest(data, std::get<RfParams>(params), seed); break;
    case Algorithm::gbt: m.fitted = fit_gbt(data, std::get<GbtParams>(params), seed); break;
    case Algorithm::nn: m.fitted = fit_mlp(data, std::get<MlpParams>(params), seed); break;
  }
  return m;
}

inline constexpr std::string_view kModelFormat = "streetair-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json standardizer_json(const Standardizer& s) {
  return {{"mean", s.mean}, {"scale", s.scale}};
}
inline Standardizer standardizer_from(const nlohmann::json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  return s;
}

inline nlohmann::json trees_json(const std::vector<RegressionTree>& trees) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& t : trees) a.push_back(t.to_json());
  return a;
}
inline std::vector<RegressionTree> trees_from(const nlohmann::json& j) {
  std::vector<RegressionTree> out;
  for (const auto& t : j) out.push_back(RegressionTree::from_json(t));
  return out;
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["algorithm"] = to_string(m.algorithm);
  j["seed"] = m.seed;
  j["params"] = params_to_json(m.params);
  j["feature_names"] = m.feature_names;
  std::visit(
      [&j](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, StepwiseModel>) {
          j["standardizer"] = detail::standardizer_json(f.standardizer);
          j["selected"] = f.selected;
          j["intercept"] = f.intercept;
          j["coef"] = f.coef;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["trees"] = detail::trees_json(f.trees);
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          j["base_score"] = f.base_score;
          j["trees"] = detail::trees_json(f.trees);
        } else {
          j["standardizer"] = detail::standardizer_json(f.standardizer);
          nlohmann::json layers = nlohmann::json::array();
          for (const auto& l : f.net.layers) {
            nlohmann::json w = nlohmann::json::array();
            for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
              std::vector<double> row(static_cast<std::size_t>(l.w.cols()));
              for (Eigen::Index c = 0; c < l.w.cols(); ++c) row[static_cast<std::size_t>(c)] = l.w(r, c);
              w.push_back(row);
            }
            layers.push_back({{"weights", w},
                              {"bias", std::vector<double>(l.b.data(), l.b.data() + l.b.size())}});
          }
          j["layers"] = layers;
        }
      },
      m.fitted);
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kModelFormat) throw Error("not a streetair model file");
  if (j.value("version", 0) != kModelFormatVersion)
    throw Error("unsupported model format version " + std::to_string(j.value("version", 0)));
  TrainedModel m;
  m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.params = params_from_json(m.algorithm, j.at("params"));
  m.feature_names = j.value("feature_names", std::vector<std::string>{});
  switch (m.algorithm) {
    case Algorithm::stepwise: {
      StepwiseModel f;
      f.standardizer = detail::standardizer_from(j.at("standardizer"));
      f.selected = j.at("selected").get<std::vector<std::size_t>>();
      f.intercept = j.at("intercept").get<double>();
      f.coef = j.at("coef").get<std::vector<double>>();
      m.fitted = std::move(f);
      break;
    }
    case Algorithm::rf: {
      ForestModel f;
      f.params = std::get<RfParams>(m.params);
      f.trees = detail::trees_from(j.at("trees"));
      m.fitted = std::move(f);
      break;
    }
    case Algorithm::gbt: {
      GbtModel f;
      f.params = std::get<GbtParams>(m.params);
      f.base_score = j.at("base_score").get<double>();
      f.trees = detail::trees_from(j.at("trees"));
      m.fitted = std::move(f);
      break;
    }
    case Algorithm::nn: {
      MlpModel f;
      f.params = std::get<MlpParams>(m.params);
      f.standardizer = detail::standardizer_from(j.at("standardizer"));
      for (const auto& lj : j.at("layers")) {
        DenseLayer l;
        const auto rows = lj.at("weights").get<std::vector<std::vector<double>>>();
        const auto bias = lj.at("bias").get<std::vector<double>>();
        const auto cols = rows.empty() ? 0 : rows.front().size();
        l.w.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != cols) throw Error("ragged layer weights in model file");
          for (std::size_t c = 0; c < cols; ++c)
            l.w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        l.b = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
        f.net.layers.push_back(std::move(l));
      }
      m.fitted = std::move(f);
      break;
    }
  }
  return m;
}

inline void save_model(const std::string& path, const TrainedModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << model_to_json(m).dump(1) << '\n';
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return model_from_json(nlohmann::json::parse(in));
}

}  // namespace streetair::modeling

#endif  // STREETAIR_MODELING_MODEL_HPP
