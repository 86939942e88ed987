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
#ifndef STREETAIR_SVI_CLIENT_HPP
#define STREETAIR_SVI_CLIENT_HPP

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <openssl/evp.h>

#include "streetair/common.hpp"
#include "streetair/geospatial.hpp"
#include "streetair/image.hpp"
#include "streetair/parallel.hpp"
#include "streetair/sampling.hpp"

namespace streetair::svi {

struct ImageRequest {
  double lon = 0.0;
  double lat = 0.0;
  double heading = 0.0;
  double pitch = 0.0;
  int width = 1024;
  int height = 512;
  // Offline lookup hints; not part of the cache identity.
  std::optional<std::uint64_t> point_id;
  std::optional<int> view_offset;

  // Heading rounded to 0.1 degree and wrapped into [0, 360).
  double canonical_heading() const {
    const double tenths = std::fmod(std::round(heading * 10.0), 3600.0);
    return (tenths < 0 ? tenths + 3600.0 : tenths) / 10.0;
  }

  // Canonical form: 1e-6 degree coordinates, 0.1 degree heading.
  std::string serialize() const {
    auto fixed = [](double v, int digits) {
      std::string s = format_fixed(v, digits);
      if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
      return s;
    };
    return "lon=" + fixed(lon, 6) + ";lat=" + fixed(lat, 6) +
           ";heading=" + fixed(canonical_heading(), 1) +
           ";pitch=" + fixed(pitch, 1) + ";width=" + std::to_string(width) +
           ";height=" + std::to_string(height);
  }
};

inline ImageRequest build_request(const geo::SamplePoint& point, double heading,
                                  const geo::Projection& proj) {
  const geo::LonLat ll = proj.unproject(point.position);
  ImageRequest r;
  r.lon = ll.lon;
  r.lat = ll.lat;
  r.heading = geo::normalize_heading(heading);
  r.point_id = point.point_id;
  return r;
}

// Views of a point at the four offsets relative to its road bearing.
inline std::vector<ImageRequest> build_point_requests(const geo::SamplePoint& point,
                                                      const geo::Projection& proj) {
  std::vector<ImageRequest> out;
  for (double off : geo::kHeadingOffsets) {
    ImageRequest r = build_request(point, point.bearing_deg + off, proj);
    r.view_offset = static_cast<int>(off);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

inline std::string cache_key(const ImageRequest& r) { return sha256_hex(r.serialize()); }

// One PNG per key under root/ab/cd/<key>.png.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path path_for(const std::string& key) const {
    return root_ / key.substr(0, 2) / key.substr(2, 2) / (key + ".png");
  }

  std::optional<std::vector<std::uint8_t>> get(const std::string& key) const {
    return png::read_file(path_for(key));
  }

  // Temp file then rename, so readers never see a partial file.
  void put(const std::string& key, std::span<const std::uint8_t> bytes) const {
    const auto final_path = path_for(key);
    std::filesystem::create_directories(final_path.parent_path());
    static std::atomic<std::uint64_t> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    auto tmp = final_path;
    tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter.fetch_add(1));
    png::write_file(tmp, bytes);
    std::filesystem::rename(tmp, final_path);
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

enum class FetchMode { online, offline };

enum class FetchStatus { ok, unavailable, permanent_failure, retries_exhausted, corrupt };

inline std::string_view to_string(FetchStatus s) {
  switch (s) {
    case FetchStatus::ok: return "ok";
    case FetchStatus::unavailable: return "unavailable";
    case FetchStatus::permanent_failure: return "permanent_failure";
    case FetchStatus::retries_exhausted: return "retries_exhausted";
    case FetchStatus::corrupt: return "corrupt";
  }
  return "?";
}

struct FetchResult {
  FetchStatus status = FetchStatus::unavailable;
  std::optional<RgbImage> image;
  int attempts = 0;
  int http_status = 0;
  bool from_cache = false;
  std::string message;

  bool ok() const { return status == FetchStatus::ok; }
};

struct SviConfig {
  std::string endpoint_template;
  double rps_limit = 10.0;
  std::string cache_dir;
  std::string offline_dir;
  std::optional<std::string> api_key;  // falls back to SVI_API_KEY
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  double backoff_factor = 2.0;
  std::size_t concurrency = 4;
  std::chrono::seconds timeout{30};
};

inline std::string expand_template(std::string tpl, const ImageRequest& r, const std::string& key) {
  auto fixed = [](double v, int d) { return format_fixed(v, d); };
  const std::pair<std::string, std::string> subs[] = {
      {"{lon}", fixed(r.lon, 6)},          {"{lat}", fixed(r.lat, 6)},
      {"{heading}", fixed(r.canonical_heading(), 1)},  {"{pitch}", fixed(r.pitch, 1)},
      {"{width}", std::to_string(r.width)}, {"{height}", std::to_string(r.height)},
      {"{key}", key}};
  for (const auto& [from, to] : subs)
    for (std::size_t at = tpl.find(from); at != std::string::npos; at = tpl.find(from, at + to.size()))
      tpl.replace(at, from.size(), to);
  return tpl;
}

// Splits "scheme://host[:port]/path?query" for the HTTP client.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Global requests-per-second ceiling shared by all workers.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  explicit RateLimiter(double rps) : interval_(rps > 0 ? 1.0 / rps : 0.0) {}

  // Reserves the next slot and returns how long the caller must wait.
  Clock::duration reserve() {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto now = Clock::now();
    if (next_ < now) next_ = now;
    const auto wait = next_ - now;
    next_ += std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(interval_));
    return wait;
  }

 private:
  double interval_;
  std::mutex mutex_;
  Clock::time_point next_{};
};

class SviClient {
 public:
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  SviClient(SviConfig config, FetchMode mode, SleepFn sleep = {})
      : config_(std::move(config)),
        mode_(mode),
        limiter_(config_.rps_limit),
        sleep_(sleep ? std::move(sleep)
                     : SleepFn([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
    if (mode_ == FetchMode::online) {
      if (config_.endpoint_template.empty()) throw Error("online mode needs endpoint_template");
      if (!config_.api_key) {
        if (const char* k = std::getenv("SVI_API_KEY")) config_.api_key = k;
      }
      if (!config_.api_key || config_.api_key->empty())
        throw Error("online mode needs an API key (set SVI_API_KEY)");
    } else if (config_.cache_dir.empty() && config_.offline_dir.empty()) {
      throw Error("offline mode needs an image directory or cache directory");
    }
  }

  FetchResult fetch(const ImageRequest& req) {
    FetchResult res;
    const std::string key = cache_key(req);
    std::optional<DiskCache> cache;
    if (!config_.cache_dir.empty()) cache.emplace(config_.cache_dir);

    if (cache) {
      if (auto bytes = cache->get(key)) return decoded(std::move(*bytes), true);
    }
    if (mode_ == FetchMode::offline) {
      if (!config_.offline_dir.empty() && req.point_id && req.view_offset) {
        const auto path = std::filesystem::path(config_.offline_dir) /
                          std::to_string(*req.point_id) / (std::to_string(*req.view_offset) + ".png");
        if (auto bytes = png::read_file(path)) return decoded(std::move(*bytes), true);
      }
      res.status = FetchStatus::unavailable;
      res.message = "not in offline store";
      return res;
    }

    const auto [base, path] =
        split_url(expand_template(config_.endpoint_template, req, config_.api_key.value_or("")));
    auto delay = config_.backoff_base;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        sleep_(delay);
        delay = std::chrono::milliseconds(
            static_cast<std::int64_t>(static_cast<double>(delay.count()) * config_.backoff_factor));
      }
      const auto wait = limiter_.reserve();
      if (wait > RateLimiter::Clock::duration::zero())
        sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
      res.attempts = attempt + 1;
      httplib::Client http(base);
      http.set_connection_timeout(config_.timeout);
      http.set_read_timeout(config_.timeout);
      auto reply = http.Get(path);
      if (!reply) {
        res.http_status = 0;
        res.message = "transport error: " + httplib::to_string(reply.error());
        continue;
      }
      res.http_status = reply->status;
      if (reply->status >= 200 && reply->status < 300) {
        std::vector<std::uint8_t> bytes(reply->body.begin(), reply->body.end());
        FetchResult ok = decoded(bytes, false);
        ok.attempts = res.attempts;
        ok.http_status = res.http_status;
        if (ok.ok() && cache) cache->put(key, bytes);
        return ok;
      }
      if (reply->status >= 400 && reply->status < 500) {
        res.status = FetchStatus::permanent_failure;
        res.message = "HTTP " + std::to_string(reply->status);
        return res;
      }
      res.message = "HTTP " + std::to_string(reply->status);
    }
    res.status = FetchStatus::retries_exhausted;
    return res;
  }

  // Exactly one result per request, in request order.
  std::vector<FetchResult> fetch_batch(std::span<const ImageRequest> requests) {
    std::vector<FetchResult> out(requests.size());
    parallel_for(requests.size(), config_.concurrency, [&](std::size_t i) {
      try {
        out[i] = fetch(requests[i]);
      } catch (const std::exception& e) {
        out[i].status = FetchStatus::unavailable;
        out[i].message = e.what();
      }
    });
    return out;
  }

  const SviConfig& config() const { return config_; }

 private:
  static FetchResult decoded(std::vector<std::uint8_t> bytes, bool from_cache) {
    FetchResult r;
    r.from_cache = from_cache;
    r.image = png::decode_rgb(bytes);
    if (r.image) {
      r.status = FetchStatus::ok;
    } else {
      r.status = FetchStatus::corrupt;
      r.message = "image could not be decoded";
    }
    return r;
  }

  SviConfig config_;
  FetchMode mode_;
  RateLimiter limiter_;
  SleepFn sleep_;
};

}  // namespace streetair::svi

#endif  // STREETAIR_SVI_CLIENT_HPP
