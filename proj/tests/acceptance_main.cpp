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
// Runs the checks behind each acceptance criterion and prints one verdict
// line per criterion. Exit status is nonzero when any criterion fails.
#include <gtest/gtest.h>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

struct Criterion {
  int id;
  std::string summary;
  std::vector<std::string> tests;  // "Suite.Name" or "Suite.*"
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "published NO improvements and ranking", {"Reproduction.*"}},
      {2, "property suite substitutes for the unavailable dataset", {}},
      {3, "metric oracle suite", {"Metrics.*"}},
      {4, "geometry suite",
       {"SamplingPlan.DiameterCountsPerRadius", "SamplingPlan.RandomNetworksNestedInDiscAndSpaced",
        "SamplingPlan.ClippedPiecesSpacedExactly", "SamplePoints.*"}},
      {5, "median aggregation against sort oracle", {"Median.AggregateMatchesSortOracle"}},
      {6, "calibration de-diurnalization",
       {"ApplyCalibration.FlatReferenceIsIdentity", "ApplyCalibration.RemovesDiurnalShape"}},
      {7, "image-quality suite",
       {"LaplaceVariance.ConstantIsZero", "LaplaceVariance.Checkerboard6x6", "Exposure.WhiteBlackAndHalf",
        "Distortion.GrayRedAndComposite"}},
      {8, "feature extraction", {"LabelRatios.TwoByTwoFixture", "LabelRatios.RandomMapsSumToOne"}},
      {9, "learner verification",
       {"Mlp.AnalyticGradientMatchesCentralDifferences", "RandomForest.SingleDeterministicTreeMatchesExhaustiveCart",
        "Gbt.ZeroEtaOrZeroRoundsPredictTheMean", "Gbt.TrainingMseNonIncreasingOver300Rounds",
        "Stepwise.MatchesExhaustiveAicSearch"}},
      {10, "qualitative findings on the synthetic city", {"SyntheticCity.*"}},
      {11, "determinism across worker counts", {"Determinism.*"}},
  };
  return c;
}

bool matches(const std::string& pattern, const std::string& full) {
  if (pattern.size() >= 2 && pattern.substr(pattern.size() - 2) == ".*")
    return full.rfind(pattern.substr(0, pattern.size() - 1), 0) == 0;
  return pattern == full;
}

class Recorder : public testing::EmptyTestEventListener {
 public:
  std::map<std::string, bool> outcome;
  void OnTestEnd(const testing::TestInfo& info) override {
    outcome[std::string(info.test_suite_name()) + "." + info.name()] = info.result()->Passed();
  }
};

}  // namespace

int main(int argc, char** argv) {
  testing::InitGoogleTest(&argc, argv);
  std::string filter;
  for (const auto& c : criteria())
    for (const auto& t : c.tests) filter += (filter.empty() ? "" : ":") + t;
  testing::GTEST_FLAG(filter) = filter;
  auto* rec = new Recorder;
  testing::UnitTest::GetInstance()->listeners().Append(rec);
  const int gtest_status = RUN_ALL_TESTS();

  std::map<int, bool> verdict;
  for (const auto& c : criteria()) {
    if (c.tests.empty()) continue;
    std::size_t ran = 0;
    bool ok = true;
    for (const auto& [name, passed] : rec->outcome)
      for (const auto& pattern : c.tests)
        if (matches(pattern, name)) {
          ++ran;
          ok = ok && passed;
          break;
        }
    verdict[c.id] = ok && ran >= c.tests.size();
  }
  bool suite = true;
  for (int id = 3; id <= 9; ++id) suite = suite && verdict[id];
  verdict[2] = suite;

  bool all = true;
  std::printf("\n");
  for (const auto& c : criteria()) {
    std::printf("criterion %d: %s %s\n", c.id, verdict[c.id] ? "PASS" : "FAIL", c.summary.c_str());
    all = all && verdict[c.id];
  }
  return all && gtest_status == 0 ? 0 : 1;
}
