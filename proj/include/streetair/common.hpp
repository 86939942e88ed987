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
#ifndef STREETAIR_COMMON_HPP
#define STREETAIR_COMMON_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace streetair {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pollutant : int { no = 0, no2 = 1, pm25 = 2, pm10 = 3 };

inline constexpr std::size_t kPollutantCount = 4;
inline constexpr std::array<Pollutant, kPollutantCount> kAllPollutants = {
    Pollutant::no, Pollutant::no2, Pollutant::pm25, Pollutant::pm10};

using PollutantValues = std::array<double, kPollutantCount>;

inline constexpr std::size_t index_of(Pollutant p) {
  return static_cast<std::size_t>(p);
}

inline std::string_view to_string(Pollutant p) {
  switch (p) {
    case Pollutant::no: return "no";
    case Pollutant::no2: return "no2";
    case Pollutant::pm25: return "pm25";
    case Pollutant::pm10: return "pm10";
  }
  return "?";
}

inline std::optional<Pollutant> parse_pollutant(std::string_view s) {
  for (Pollutant p : kAllPollutants)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Fixed-point formatting used by reports, where stable width matters more
// than round-tripping.
inline std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed,
                           digits);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

// Strict parse: the whole field must be a finite number.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace streetair

#endif  // STREETAIR_COMMON_HPP
