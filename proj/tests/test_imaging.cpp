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
#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "streetair/imaging.hpp"
#include "streetair/random.hpp"

namespace sa = streetair;
namespace im = streetair::imaging;
using sa::LabelMap;
using sa::Rgb;
using sa::RgbImage;

namespace {

std::vector<std::uint8_t> bytes_of(const RgbImage& img) {
  return {img.bytes().begin(), img.bytes().end()};
}

RgbImage checkerboard(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v = (x + y) % 2 ? 255 : 0;
      img.set(x, y, {v, v, v});
    }
  return img;
}

RgbImage from_bytes(const std::vector<std::uint8_t>& b, int w, int h) {
  RgbImage img(w, h);
  std::copy(b.begin(), b.end(), img.bytes().begin());
  return img;
}

RgbImage gray_noise(int w, int h, sa::Rng& rng) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<std::uint8_t>(40 + rng.index(170));
      img.set(x, y, {v, v, v});
    }
  return img;
}

LabelMap label_map(int w, int h, std::initializer_list<im::SegClass> ids) {
  LabelMap m(w, h);
  int k = 0;
  for (auto c : ids) {
    m.set(k % w, k / w, static_cast<std::uint8_t>(c));
    ++k;
  }
  return m;
}

double ratio_sum(const im::FeatureVector& f) {
  return std::accumulate(f.ratio.begin(), f.ratio.end(), 0.0);
}

void expect_group_decomposition(const im::FeatureVector& f) {
  const auto& members = im::group_members();
  for (std::size_t g = 0; g < im::kGroupCount; ++g) {
    double s = 0;
    for (auto c : members[g]) s += f.ratio[c];
    EXPECT_EQ(f.group[g], s);
  }
}

}  // namespace

TEST(LaplaceVariance, ConstantIsZero) {
  EXPECT_EQ(im::laplace_variance(RgbImage(8, 8, {128, 128, 128})), 0.0);
}

TEST(LaplaceVariance, Checkerboard6x6) {
  EXPECT_EQ(im::laplace_variance(checkerboard(6, 6)), 1040400.0);
}

TEST(LaplaceVariance, MatchesReferenceConvolutionAndBlurLowers) {
  sa::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const int w = 3 + static_cast<int>(rng.index(30)), h = 3 + static_cast<int>(rng.index(20));
    RgbImage img(w, h);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng.index(256));
    const double ref = oracle::laplacian_variance(oracle::luma(bytes_of(img)), w, h);
    EXPECT_NEAR(im::laplace_variance(img), ref, 1e-9 * std::max(1.0, ref));
  }
  const auto sharp = checkerboard(16, 16);
  const auto blurred = from_bytes(oracle::box_blur(bytes_of(sharp), 16, 16), 16, 16);
  EXPECT_LT(im::laplace_variance(blurred), im::laplace_variance(sharp));
}

TEST(LaplaceVariance, MirrorInvariantAndTooSmall) {
  sa::Rng rng(8);
  const auto img = gray_noise(13, 9, rng);
  RgbImage flip_h(13, 9), flip_v(13, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 13; ++x) {
      flip_h.set(12 - x, y, img.at(x, y));
      flip_v.set(x, 8 - y, img.at(x, y));
    }
  const double v = im::laplace_variance(img);
  EXPECT_NEAR(im::laplace_variance(flip_h), v, 1e-9 * v);
  EXPECT_NEAR(im::laplace_variance(flip_v), v, 1e-9 * v);
  EXPECT_THROW(im::laplace_variance(RgbImage(2, 5)), sa::Error);
}

TEST(Exposure, WhiteBlackAndHalf) {
  const im::QualityThresholds t;
  auto white = im::exposure_fractions(RgbImage(4, 4, {255, 255, 255}), t);
  EXPECT_EQ(white.over, 1.0);
  auto black = im::exposure_fractions(RgbImage(4, 4, {0, 0, 0}), t);
  EXPECT_EQ(black.under, 1.0);
  RgbImage half(4, 4, {128, 128, 128});
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 2; ++y) half.set(x, y, {255, 255, 255});
  auto h = im::exposure_fractions(half, t);
  EXPECT_EQ(h.over, 0.5);
  EXPECT_EQ(im::classify(1e6, h.over, h.under, 0.0, t), im::Verdict::ok);
  EXPECT_EQ(im::classify(1e6, white.over, white.under, 0.0, t), im::Verdict::overexposure);
  EXPECT_EQ(im::classify(1e6, black.over, black.under, 0.0, t), im::Verdict::underexposure);
}

TEST(Exposure, ChannelPermutationInvariant) {
  sa::Rng rng(6);
  RgbImage img(10, 10), perm(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const Rgb c{static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
                  static_cast<std::uint8_t>(rng.index(256))};
      img.set(x, y, c);
      perm.set(x, y, {c.b, c.r, c.g});
    }
  auto a = im::exposure_fractions(img, {});
  auto b = im::exposure_fractions(perm, {});
  EXPECT_EQ(a.over, b.over);
  EXPECT_EQ(a.under, b.under);
}

TEST(Distortion, GrayRedAndComposite) {
  sa::Rng rng(9);
  EXPECT_EQ(im::color_distortion_score(gray_noise(8, 8, rng)), 0.0);
  EXPECT_EQ(im::color_distortion_score(RgbImage(8, 8, {255, 0, 0})), 1.0);
  RgbImage mix(8, 8, {128, 128, 128});
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 8; ++x) mix.set(x, y, {255, 0, 0});
  const double ref = oracle::histogram_distortion(bytes_of(mix));
  EXPECT_NEAR(im::color_distortion_score(mix), ref, 1e-12);
  EXPECT_NEAR(ref, 0.5, 1e-12);
  for (int t = 0; t < 20; ++t) {
    RgbImage img(9, 7);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng.index(16) * 16);
    EXPECT_NEAR(im::color_distortion_score(img), oracle::histogram_distortion(bytes_of(img)), 1e-12);
  }
}

TEST(AssessQuality, Verdicts) {
  const im::QualityThresholds t;
  EXPECT_EQ(im::assess_quality(RgbImage(8, 8, {128, 128, 128}), t).verdict, im::Verdict::blur);
  sa::Rng rng(10);
  const auto noise = gray_noise(32, 16, rng);
  auto ok = im::assess_quality(noise, t);
  EXPECT_GE(ok.blur_variance, t.blur_variance);
  EXPECT_EQ(ok.verdict, im::Verdict::ok);
  RgbImage red(32, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x) red.set(x, y, {static_cast<std::uint8_t>((x + y) % 2 ? 230 : 60), 0, 0});
  auto r = im::assess_quality(red, t);
  EXPECT_GE(r.blur_variance, t.blur_variance);
  EXPECT_EQ(r.verdict, im::Verdict::color_distortion);
  EXPECT_EQ(im::classify(r.blur_variance, r.over_fraction, r.under_fraction, r.distortion, t),
            r.verdict);
}

TEST(LabelRatios, TwoByTwoFixture) {
  using C = im::SegClass;
  auto f = im::label_ratios(label_map(2, 2, {C::road, C::road, C::sky, C::building}));
  EXPECT_EQ(f.ratio[static_cast<int>(C::road)], 0.5);
  EXPECT_EQ(f.ratio[static_cast<int>(C::sky)], 0.25);
  EXPECT_EQ(f.ratio[static_cast<int>(C::building)], 0.25);
  EXPECT_EQ(f[im::Group::network], 0.5);
  EXPECT_EQ(f[im::Group::nature], 0.25);
  EXPECT_EQ(f[im::Group::human], 0.25);
  EXPECT_EQ(f[im::Group::vehicles], 0.0);
}

TEST(LabelRatios, AllSkyVoidAndEmpty) {
  using C = im::SegClass;
  auto sky = im::label_ratios(label_map(1, 3, {C::sky, C::sky, C::sky}));
  EXPECT_EQ(sky.ratio[static_cast<int>(C::sky)], 1.0);
  EXPECT_EQ(sky[im::Group::nature], 1.0);
  LabelMap m = label_map(2, 2, {C::road, C::road, C::road});
  EXPECT_EQ(m.ids()[3], LabelMap::kVoid);
  EXPECT_EQ(im::label_ratios(m).ratio[static_cast<int>(C::road)], 1.0);
  try {
    im::label_ratios(LabelMap(3, 3));
    FAIL();
  } catch (const sa::Error& e) {
    EXPECT_STREQ(e.what(), "empty segmentation");
  }
}

TEST(LabelRatios, RandomMapsSumToOne) {
  sa::Rng rng(12);
  for (int t = 0; t < 1000; ++t) {
    const int w = 1 + static_cast<int>(rng.index(40)), h = 1 + static_cast<int>(rng.index(20));
    LabelMap m(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        m.set(x, y, rng.uniform() < 0.1 ? LabelMap::kVoid : static_cast<std::uint8_t>(rng.index(19)));
    m.set(0, 0, static_cast<std::uint8_t>(rng.index(19)));
    auto f = im::label_ratios(m);
    EXPECT_NEAR(ratio_sum(f), 1.0, 1e-12);
    expect_group_decomposition(f);
  }
}

TEST(Groups, MembershipIsAPartition) {
  std::vector<int> seen(im::kClassCount, 0);
  for (const auto& g : im::group_members())
    for (auto c : g) ++seen[c];
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_EQ(im::group_of(static_cast<std::uint8_t>(im::SegClass::train)), im::Group::network);
  EXPECT_EQ(im::group_of(static_cast<std::uint8_t>(im::SegClass::bicycle)), im::Group::human);
}

namespace {

im::FeatureVector road_vector(double road) {
  im::FeatureVector f;
  f.ratio[static_cast<int>(im::SegClass::road)] = road;
  f.ratio[static_cast<int>(im::SegClass::sky)] = 1.0 - road;
  f.recompute_groups();
  return f;
}

}  // namespace

TEST(AggregateAngles, IdentityMeanOrderAndSingle) {
  const auto v = road_vector(0.3);
  std::vector<im::AngleFeature> same = {{0, v}, {90, v}, {180, v}, {270, v}};
  EXPECT_EQ(*im::aggregate_angles(same, im::AngleStrategy::average()), v);
  std::vector<im::AngleFeature> two = {{0, road_vector(0.2)}, {90, road_vector(0.4)}};
  auto m = *im::aggregate_angles(two, im::AngleStrategy::average());
  EXPECT_NEAR(m.ratio[static_cast<int>(im::SegClass::road)], 0.3, 1e-15);
  std::vector<im::AngleFeature> rev = {two[1], two[0]};
  EXPECT_EQ(*im::aggregate_angles(rev, im::AngleStrategy::average()), m);
  EXPECT_EQ(*im::aggregate_angles(two, im::AngleStrategy::single(90)), two[1].features);
  EXPECT_FALSE(im::aggregate_angles(two, im::AngleStrategy::single(180)).has_value());
}

TEST(AggregateBuffer, MeansFilteringAndProportion) {
  const auto avg = im::AngleStrategy::average();
  std::vector<im::PointObservations> one = {{7, {{0, road_vector(0.6), false}}}};
  auto b1 = *im::aggregate_buffer(one, avg);
  EXPECT_EQ(b1.features, road_vector(0.6));
  EXPECT_EQ(b1.n_points, 1u);

  std::vector<im::PointObservations> two = {{1, {{0, road_vector(0.2), false}}},
                                              {2, {{0, road_vector(0.4), false}}}};
  auto b2 = *im::aggregate_buffer(two, avg);
  EXPECT_NEAR(b2.features.ratio[static_cast<int>(im::SegClass::road)], 0.3, 1e-15);

  std::vector<im::PointObservations> mixed = {
      {1, {{0, road_vector(0.2), false}, {90, road_vector(0.2), false}}},
      {2, {{0, road_vector(0.9), true}, {90, road_vector(0.9), true}}}};
  im::BufferOptions drop;
  drop.drop_low_quality = true;
  auto b3 = *im::aggregate_buffer(mixed, avg, drop);
  EXPECT_EQ(b3.n_points, 1u);
  EXPECT_EQ(b3.features, road_vector(0.2));
  EXPECT_EQ(b3.low_quality_proportion, 0.5);

  std::vector<im::PointObservations> all_bad = {{1, {{0, road_vector(0.2), true}}}};
  EXPECT_FALSE(im::aggregate_buffer(all_bad, avg, drop).has_value());
}

TEST(AggregateBuffer, AveragingOrderWithEqualImageCounts) {
  sa::Rng rng(14);
  std::vector<im::PointObservations> pts;
  for (std::uint64_t p = 0; p < 6; ++p) {
    im::PointObservations po{p, {}};
    for (int a : {0, 90, 180, 270}) {
      LabelMap m(6, 4);
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) m.set(x, y, static_cast<std::uint8_t>(rng.index(19)));
      po.images.push_back({a, im::label_ratios(m), false});
    }
    pts.push_back(po);
  }
  im::BufferOptions per_image;
  per_image.weighting = im::BufferWeighting::per_image;
  auto a = *im::aggregate_buffer(pts, im::AngleStrategy::average());
  auto b = *im::aggregate_buffer(pts, im::AngleStrategy::average(), per_image);
  for (std::size_t c = 0; c < im::kClassCount; ++c) EXPECT_NEAR(a.features.ratio[c], b.features.ratio[c], 1e-15);
  EXPECT_NEAR(ratio_sum(a.features), 1.0, 1e-12);
  expect_group_decomposition(a.features);
}

TEST(Png, LabelAndRgbRoundTrip) {
  sa::Rng rng(15);
  LabelMap m(17, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 17; ++x) m.set(x, y, static_cast<std::uint8_t>(rng.index(20) == 19 ? 255 : rng.index(19)));
  auto back = sa::png::decode_labels(sa::png::encode_labels(m));
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, m);
  const auto img = gray_noise(9, 4, rng);
  EXPECT_EQ(*sa::png::decode_rgb(sa::png::encode_rgb(img)), img);
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4};
  EXPECT_FALSE(sa::png::decode_rgb(junk).has_value());
}
