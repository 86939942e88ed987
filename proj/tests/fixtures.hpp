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
// Fixed inputs shared by the unit tests and the acceptance runner.
#ifndef STREETAIR_TESTS_FIXTURES_HPP
#define STREETAIR_TESTS_FIXTURES_HPP

#include <limits>
#include <string>
#include <vector>

namespace fixtures {

inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Expected values computed with exact rational arithmetic, then rounded.
// NaN marks an undefined metric (all-zero targets for MAPE, constant
// targets for R^2).
struct MetricCase {
  std::vector<double> y, yhat;
  double mse, mae, mape, r2;
};

inline const std::vector<MetricCase>& metric_cases() {
  static const std::vector<MetricCase> cases = {
    {{1, 2, 3}, {1, 2, 3}, 0.0, 0.0, 0.0, 1.0},
    {{0, 0}, {1, 3}, 5.0, 2.0, kNan, kNan},
    {{2, 4, 6, 8}, {5, 5, 5, 5}, 5.0, 2.0, 57.291666666666664, 0.0},
    {{1, 2}, {2, 1}, 1.0, 1.0, 75.0, -3.0},
    {{10, 20, 30}, {12, 18, 33}, 5.666666666666667, 2.3333333333333335, 13.333333333333334, 0.915},
    {{-1, 1}, {0, 0}, 1.0, 1.0, 100.0, 0.0},
    {{3, 3, 3, 5}, {3, 3, 3, 3}, 1.0, 0.5, 10.0, -0.3333333333333333},
    {{1, 4, 9, 16, 25}, {2, 4, 8, 16, 26}, 0.6, 0.6, 23.022222222222222, 0.9919786096256684},
    {{100}, {90}, 100.0, 10.0, 10.0, kNan},
    {{2, 2}, {2, 3}, 0.5, 0.5, 25.0, kNan},
    {{8, -4, 12, 15, -5, 16, 6}, {9, 7, 1, 11, 2, 1, 7}, 76.28571428571429, 7.142857142857143, 93.75, -0.2223675604970569},
    {{16, -5, 20, 8}, {4, 16, 0, 19}, 276.5, 16.0, 183.125, -2.032213845099383},
    {{4, -1, -2, -8, 13}, {17, 5, 13, 1, 12}, 102.4, 8.8, 359.03846153846155, -1.0745542949756888},
    {{16, 11, 9, 11, 3, 1}, {16, -1, 15, 4, 9, -3}, 46.833333333333336, 5.833333333333333, 139.8989898989899, -0.8070739549839229},
    {{13, 1}, {-3, -6}, 152.5, 11.5, 411.53846153846155, -3.236111111111111},
    {{-6, -9, 18, 14, -8}, {2, -1, 3, 20, -6}, 78.6, 7.8, 74.68253968253968, 0.42610981308411217},
    {{3, -7, -5, 19, -5}, {17, 16, 17, 19, 14}, 314.0, 15.6, 323.04761904761904, -2.3836206896551726},
    {{2, -8, 2, 18}, {13, -5, -8, -3}, 167.75, 11.25, 301.0416666666667, -0.9337175792507204},
    {{0, 7}, {8, -9}, 160.0, 12.0, 228.57142857142858, -12.061224489795919},
    {{17, -1}, {18, -7}, 18.5, 3.5, 302.94117647058823, 0.7716049382716049},
    {{8, 13, 15, 14}, {6, 14, -6, 16}, 112.5, 6.5, 46.744505494505496, -14.517241379310345},
    {{-9, -1, -9, -6}, {15, 9, 6, 13}, 315.5, 17.0, 437.5, -28.52046783625731},
    {{-3, -9}, {17, 14}, 464.5, 21.5, 461.1111111111111, -50.611111111111114},
    {{-3, 8, 1}, {13, -2, 17}, 204.0, 14.0, 752.7777777777778, -8.870967741935484},
  };
  return cases;
}

// Published NO results: MSE per algorithm and the quoted improvements over
// the linear baseline, in percent.
struct PublishedRow {
  std::string algorithm;
  double mse, mae, rmse, mape, r2;
};

inline const std::vector<PublishedRow>& published_no_rows() {
  static const std::vector<PublishedRow> rows = {
      {"gbt", 9.443, 2.319, 3.070, 8.325, 0.198},
      {"rf", 9.132, 2.260, 3.019, 8.240, 0.225},
      {"nn", 9.590, 2.351, 3.096, 8.892, 0.186},
      {"stepwise", 10.162, 2.431, 3.185, 8.412, 0.137},
  };
  return rows;
}

inline constexpr double kPublishedImprovementGbt = 7.62;
inline constexpr double kPublishedImprovementRf = 11.28;
inline constexpr double kPublishedImprovementNn = 5.97;

}  // namespace fixtures

#endif  // STREETAIR_TESTS_FIXTURES_HPP
