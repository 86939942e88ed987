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
#ifndef STREETAIR_IMAGING_HPP
#define STREETAIR_IMAGING_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streetair/common.hpp"
#include "streetair/csv.hpp"
#include "streetair/image.hpp"

namespace streetair::imaging {

// ---------------------------------------------------------------------------
// Segmentation classes and groups

inline constexpr std::size_t kClassCount = 19;
inline constexpr std::size_t kGroupCount = 4;
inline constexpr std::size_t kFeatureCount = kClassCount + kGroupCount;

enum class SegClass : std::uint8_t {
  terrain, vegetation, sky, wall, building, road, traffic_sign, traffic_light,
  sidewalk, fence, pole, bus, train, truck, car, bicycle, motorcycle, rider, person
};

inline constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "terrain", "vegetation",    "sky",      "wall",  "building", "road",    "traffic_sign",
    "traffic_light", "sidewalk", "fence",   "pole",  "bus",      "train",   "truck",
    "car",     "bicycle",       "motorcycle", "rider", "person"};

enum class Group : std::uint8_t { vehicles, network, human, nature };

inline constexpr std::array<std::string_view, kGroupCount> kGroupNames = {
    "grp_vehicles", "grp_network", "grp_human", "grp_nature"};

// Group members in canonical summation order. Train is the rail member of
// the transport network group.
inline const std::array<std::vector<std::uint8_t>, kGroupCount>& group_members() {
  using C = SegClass;
  auto id = [](C c) { return static_cast<std::uint8_t>(c); };
  static const std::array<std::vector<std::uint8_t>, kGroupCount> m = {
      std::vector<std::uint8_t>{id(C::bus), id(C::car), id(C::truck), id(C::motorcycle)},
      std::vector<std::uint8_t>{id(C::road), id(C::sidewalk), id(C::traffic_light),
                                id(C::traffic_sign), id(C::pole), id(C::train)},
      std::vector<std::uint8_t>{id(C::building), id(C::wall), id(C::fence), id(C::rider),
                                id(C::bicycle), id(C::person)},
      std::vector<std::uint8_t>{id(C::vegetation), id(C::sky), id(C::terrain)}};
  return m;
}

inline Group group_of(std::uint8_t class_id) {
  const auto& m = group_members();
  for (std::size_t g = 0; g < kGroupCount; ++g)
    if (std::find(m[g].begin(), m[g].end(), class_id) != m[g].end())
      return static_cast<Group>(g);
  throw Error("class id out of range: " + std::to_string(class_id));
}

/// 19 class ratios and their 4 group sums.
struct FeatureVector {
  std::array<double, kClassCount> ratio{};
  std::array<double, kGroupCount> group{};

  double operator[](SegClass c) const { return ratio[static_cast<std::size_t>(c)]; }
  double operator[](Group g) const { return group[static_cast<std::size_t>(g)]; }

  void recompute_groups() {
    const auto& m = group_members();
    for (std::size_t g = 0; g < kGroupCount; ++g) {
      double s = 0.0;
      for (std::uint8_t c : m[g]) s += ratio[c];
      group[g] = s;
    }
  }

  std::array<double, kFeatureCount> row() const {
    std::array<double, kFeatureCount> out{};
    std::copy(ratio.begin(), ratio.end(), out.begin());
    std::copy(group.begin(), group.end(), out.begin() + kClassCount);
    return out;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline std::vector<std::string> feature_names(bool with_groups = true) {
  std::vector<std::string> names(kClassNames.begin(), kClassNames.end());
  if (with_groups) names.insert(names.end(), kGroupNames.begin(), kGroupNames.end());
  return names;
}

// Void pixels are excluded from the denominator.
inline FeatureVector label_ratios(const LabelMap& map) {
  std::array<std::size_t, kClassCount> counts{};
  std::size_t valid = 0;
  for (std::uint8_t id : map.ids()) {
    if (id == LabelMap::kVoid) continue;
    if (id >= kClassCount) throw Error("invalid class id " + std::to_string(id));
    ++counts[id];
    ++valid;
  }
  if (valid == 0) throw Error("empty segmentation");
  FeatureVector fv;
  for (std::size_t c = 0; c < kClassCount; ++c)
    fv.ratio[c] = static_cast<double>(counts[c]) / static_cast<double>(valid);
  fv.recompute_groups();
  return fv;
}

// Component-wise mean of the class ratios; groups are re-derived so the
// result keeps the exact group decomposition.
inline FeatureVector mean_of(std::span<const FeatureVector> vs) {
  if (vs.empty()) throw Error("mean of zero feature vectors");
  FeatureVector out;
  for (const auto& v : vs)
    for (std::size_t c = 0; c < kClassCount; ++c) out.ratio[c] += v.ratio[c];
  for (double& r : out.ratio) r /= static_cast<double>(vs.size());
  out.recompute_groups();
  return out;
}

// ---------------------------------------------------------------------------
// Image quality

struct QualityThresholds {
  double blur_variance = 100.0;
  double over_value = 0.95;   // V >= over_value counts as overexposed
  double under_value = 0.10;  // V <= under_value counts as underexposed
  double exposure_fraction = 0.5;  // flagged when fraction > this
  double distortion = 0.5;
};

enum class Verdict { ok, blur, overexposure, underexposure, color_distortion };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::blur: return "blur";
    case Verdict::overexposure: return "overexposure";
    case Verdict::underexposure: return "underexposure";
    case Verdict::color_distortion: return "color_distortion";
  }
  return "?";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::ok, Verdict::blur, Verdict::overexposure,
                    Verdict::underexposure, Verdict::color_distortion})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

// Population variance of the 3x3 Laplacian response over interior pixels of
// the luma image g = 0.299 R + 0.587 G + 0.114 B. Luma is held in integer
// thousandths so the convolution is exact.
inline double laplace_variance(const RgbImage& img) {
  const int w = img.width(), h = img.height();
  if (w < 3 || h < 3) throw Error("image smaller than the 3x3 Laplacian kernel");
  std::vector<std::int64_t> luma(img.pixel_count());
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < luma.size(); ++i)
    luma[i] = 299 * bytes[3 * i] + 587 * bytes[3 * i + 1] + 114 * bytes[3 * i + 2];
  auto at = [&](int x, int y) { return luma[static_cast<std::size_t>(y) * w + x]; };
  std::vector<double> resp;
  resp.reserve(static_cast<std::size_t>(w - 2) * static_cast<std::size_t>(h - 2));
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x)
      resp.push_back(static_cast<double>(at(x, y - 1) + at(x - 1, y) + at(x + 1, y) +
                                         at(x, y + 1) - 4 * at(x, y)));
  double mean = 0.0;
  for (double r : resp) mean += r;
  mean /= static_cast<double>(resp.size());
  double ss = 0.0;
  for (double r : resp) ss += (r - mean) * (r - mean);
  return ss / static_cast<double>(resp.size()) / 1e6;
}

struct ExposureFractions {
  double over = 0.0;
  double under = 0.0;
};

// HSV value channel V = max(R, G, B) / 255.
inline ExposureFractions exposure_fractions(const RgbImage& img,
                                            const QualityThresholds& t = {}) {
  std::array<bool, 256> is_over{}, is_under{};
  for (int v = 0; v < 256; ++v) {
    is_over[v] = v / 255.0 >= t.over_value;
    is_under[v] = v / 255.0 <= t.under_value;
  }
  std::size_t over = 0, under = 0;
  const auto b = img.bytes();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const std::uint8_t v = std::max({b[3 * i], b[3 * i + 1], b[3 * i + 2]});
    over += is_over[v];
    under += is_under[v];
  }
  const double n = static_cast<double>(img.pixel_count());
  return {static_cast<double>(over) / n, static_cast<double>(under) / n};
}

// 1 - min over channel pairs of the normalized histogram intersection.
inline double color_distortion_score(const RgbImage& img) {
  std::array<std::array<std::size_t, 256>, 3> hist{};
  const auto b = img.bytes();
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) ++hist[c][b[3 * i + c]];
  auto intersection = [&](int a, int c) {
    std::size_t s = 0;
    for (int k = 0; k < 256; ++k) s += std::min(hist[a][k], hist[c][k]);
    return s;
  };
  const std::size_t worst = std::min({intersection(0, 1), intersection(0, 2), intersection(1, 2)});
  return 1.0 - static_cast<double>(worst) / static_cast<double>(img.pixel_count());
}

struct QualityReport {
  double blur_variance = 0.0;
  double over_fraction = 0.0;
  double under_fraction = 0.0;
  double distortion = 0.0;
  Verdict verdict = Verdict::ok;

  bool low_quality() const { return verdict != Verdict::ok; }
};

// First failing check in the order blur, overexposure, underexposure,
// color distortion.
inline Verdict classify(double blur_variance, double over, double under, double distortion,
                        const QualityThresholds& t) {
  if (blur_variance < t.blur_variance) return Verdict::blur;
  if (over > t.exposure_fraction) return Verdict::overexposure;
  if (under > t.exposure_fraction) return Verdict::underexposure;
  if (distortion > t.distortion) return Verdict::color_distortion;
  return Verdict::ok;
}

inline QualityReport assess_quality(const RgbImage& img, const QualityThresholds& t = {}) {
  QualityReport r;
  r.blur_variance = laplace_variance(img);
  const auto exp = exposure_fractions(img, t);
  r.over_fraction = exp.over;
  r.under_fraction = exp.under;
  r.distortion = color_distortion_score(img);
  r.verdict = classify(r.blur_variance, r.over_fraction, r.under_fraction, r.distortion, t);
  return r;
}

// ---------------------------------------------------------------------------
// Angle and buffer aggregation

struct AngleStrategy {
  enum class Kind { single, average };
  Kind kind = Kind::average;
  int angle = 0;  // heading offset for single

  static AngleStrategy single(int angle) { return {Kind::single, angle}; }
  static AngleStrategy average() { return {Kind::average, 0}; }

  std::string name() const { return kind == Kind::average ? "average" : std::to_string(angle); }
  friend bool operator==(const AngleStrategy&, const AngleStrategy&) = default;
};

inline std::optional<AngleStrategy> parse_angle_strategy(std::string_view s) {
  if (s == "average" || s == "360") return AngleStrategy::average();
  for (int a : {0, 90, 180, 270})
    if (s == std::to_string(a)) return AngleStrategy::single(a);
  return std::nullopt;
}

struct AngleFeature {
  int offset = 0;  // 0, 90, 180 or 270 relative to the road
  FeatureVector features;
};

// single(theta) -> that angle's vector; average -> mean over available angles.
inline std::optional<FeatureVector> aggregate_angles(std::span<const AngleFeature> per_angle,
                                                     const AngleStrategy& strategy) {
  if (strategy.kind == AngleStrategy::Kind::single) {
    for (const auto& a : per_angle)
      if (a.offset == strategy.angle) return a.features;
    return std::nullopt;
  }
  if (per_angle.empty()) return std::nullopt;
  std::vector<FeatureVector> vs;
  vs.reserve(per_angle.size());
  for (const auto& a : per_angle) vs.push_back(a.features);
  return mean_of(vs);
}

struct ImageObservation {
  int offset = 0;
  FeatureVector features;
  bool low_quality = false;
};

struct PointObservations {
  std::uint64_t point_id = 0;
  std::vector<ImageObservation> images;
};

enum class BufferWeighting { per_point, per_image };

struct BufferOptions {
  bool drop_low_quality = false;
  BufferWeighting weighting = BufferWeighting::per_point;
};

struct BufferFeatures {
  FeatureVector features;
  std::size_t n_points = 0;
  std::size_t n_images = 0;
  // Low-quality images / all images in the buffer, before any filtering.
  double low_quality_proportion = 0.0;
};

// Mean over contributing points (ordered by point id). Returns nullopt when
// no point contributes.
inline std::optional<BufferFeatures> aggregate_buffer(std::vector<PointObservations> points,
                                                      const AngleStrategy& strategy,
                                                      const BufferOptions& opts = {}) {
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.point_id < b.point_id; });
  std::size_t total = 0, low = 0;
  for (const auto& p : points)
    for (const auto& im : p.images) {
      ++total;
      low += im.low_quality;
    }
  if (total == 0) return std::nullopt;

  std::vector<FeatureVector> contributions;
  BufferFeatures out;
  out.low_quality_proportion = static_cast<double>(low) / static_cast<double>(total);
  for (const auto& p : points) {
    std::vector<AngleFeature> usable;
    for (const auto& im : p.images) {
      if (opts.drop_low_quality && im.low_quality) continue;
      if (strategy.kind == AngleStrategy::Kind::single && im.offset != strategy.angle) continue;
      usable.push_back({im.offset, im.features});
    }
    if (usable.empty()) continue;
    ++out.n_points;
    out.n_images += usable.size();
    if (opts.weighting == BufferWeighting::per_image) {
      for (const auto& u : usable) contributions.push_back(u.features);
    } else {
      contributions.push_back(*aggregate_angles(usable, strategy));
    }
  }
  if (contributions.empty()) return std::nullopt;
  out.features = mean_of(contributions);
  return out;
}

// ---------------------------------------------------------------------------
// Tables

struct FeatureRow {
  std::string location_id;
  double radius = 0.0;
  std::string angle_strategy;
  std::size_t n_points = 0;
  std::size_t n_images = 0;
  double low_quality_proportion = 0.0;
  FeatureVector features;
};

inline std::vector<std::string> feature_table_header() {
  std::vector<std::string> h = {"location_id", "radius_m", "angle_strategy",
                                "n_points",    "n_images", "low_quality_prop"};
  for (auto n : feature_names()) h.push_back(n);
  return h;
}

inline void write_feature_table(const std::filesystem::path& path,
                                const std::vector<FeatureRow>& rows) {
  csv::Writer w(path);
  w.row(feature_table_header());
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.location_id, format_double(r.radius), r.angle_strategy,
                                  std::to_string(r.n_points), std::to_string(r.n_images),
                                  format_double(r.low_quality_proportion)};
    for (double v : r.features.row()) f.push_back(format_double(v));
    w.row(f);
  }
}

inline std::vector<FeatureRow> read_feature_table(const std::filesystem::path& path) {
  const csv::Table t = csv::read_table(path);
  if (t.header != feature_table_header())
    throw Error("unexpected feature table header in " + path.string());
  std::vector<FeatureRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto fail = [&] {
      throw Error("bad feature row at line " + std::to_string(t.line_numbers[r]));
    };
    if (row.size() != t.header.size()) fail();
    FeatureRow fr;
    fr.location_id = row[0];
    auto radius = parse_double(row[1]);
    auto np = parse_int(row[3]);
    auto ni = parse_int(row[4]);
    auto lq = parse_double(row[5]);
    if (!radius || !np || !ni || !lq) fail();
    fr.radius = *radius;
    fr.angle_strategy = row[2];
    fr.n_points = static_cast<std::size_t>(*np);
    fr.n_images = static_cast<std::size_t>(*ni);
    fr.low_quality_proportion = *lq;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      auto v = parse_double(row[6 + k]);
      if (!v) fail();
      if (k < kClassCount)
        fr.features.ratio[k] = *v;
      else
        fr.features.group[k - kClassCount] = *v;
    }
    out.push_back(fr);
  }
  return out;
}

struct QualityRow {
  std::string image_id;
  QualityReport report;
};

inline void write_quality_csv(const std::filesystem::path& path,
                              const std::vector<QualityRow>& rows) {
  csv::Writer w(path);
  w.row({"image_id", "blur_var", "over_frac", "under_frac", "distortion", "verdict"});
  for (const auto& r : rows)
    w.row({r.image_id, format_double(r.report.blur_variance),
           format_double(r.report.over_fraction), format_double(r.report.under_fraction),
           format_double(r.report.distortion), std::string(to_string(r.report.verdict))});
}

inline std::map<std::string, QualityReport> read_quality_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_table(path);
  const std::vector<std::string> expected = {"image_id", "blur_var", "over_frac",
                                             "under_frac", "distortion", "verdict"};
  if (t.header != expected) throw Error("unexpected quality header in " + path.string());
  std::map<std::string, QualityReport> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != 6) throw Error("bad quality row at line " + std::to_string(t.line_numbers[r]));
    QualityReport q;
    auto b = parse_double(row[1]), o = parse_double(row[2]), u = parse_double(row[3]),
         d = parse_double(row[4]);
    auto v = parse_verdict(row[5]);
    if (!b || !o || !u || !d || !v)
      throw Error("bad quality row at line " + std::to_string(t.line_numbers[r]));
    q.blur_variance = *b;
    q.over_fraction = *o;
    q.under_fraction = *u;
    q.distortion = *d;
    q.verdict = *v;
    out[row[0]] = q;
  }
  return out;
}

}  // namespace streetair::imaging

#endif  // STREETAIR_IMAGING_HPP
