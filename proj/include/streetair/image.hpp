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
#ifndef STREETAIR_IMAGE_HPP
#define STREETAIR_IMAGE_HPP

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streetair/common.hpp"

namespace streetair {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

// Row-major interleaved 8-bit RGB.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {})
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
    data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
      data_[i] = fill.r;
      data_[i + 1] = fill.g;
      data_[i + 2] = fill.b;
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  Rgb at(int x, int y) const {
    const std::size_t o = offset(x, y);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t o = offset(x, y);
    data_[o] = c.r;
    data_[o + 1] = c.g;
    data_[o + 2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Row-major class ids; 255 marks void pixels.
class LabelMap {
 public:
  static constexpr std::uint8_t kVoid = 255;

  LabelMap() = default;
  LabelMap(int width, int height, std::uint8_t fill = kVoid) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw Error("label map dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  LabelMap(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error("label map data does not match its dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  void set(int x, int y, std::uint8_t id) { data_[index(x, y)] = id; }
  std::span<const std::uint8_t> ids() const { return data_; }
  std::span<std::uint8_t> ids() { return data_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

namespace png {

namespace detail {

inline std::optional<std::vector<std::uint8_t>> decode(std::span<const std::uint8_t> bytes,
                                                       png_uint_32 format, int& w, int& h) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) return std::nullopt;
  img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    return std::nullopt;
  }
  w = static_cast<int>(img.width);
  h = static_cast<int>(img.height);
  if (w <= 0 || h <= 0) return std::nullopt;
  return buf;
}

inline std::vector<std::uint8_t> encode(std::span<const std::uint8_t> pixels, int w, int h,
                                        png_uint_32 format) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr))
    throw Error(std::string("PNG encode failed: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr))
    throw Error(std::string("PNG encode failed: ") + img.message);
  out.resize(size);
  return out;
}

}  // namespace detail

inline std::optional<std::vector<std::uint8_t>> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

inline std::optional<RgbImage> decode_rgb(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  auto buf = detail::decode(bytes, PNG_FORMAT_RGB, w, h);
  if (!buf) return std::nullopt;
  RgbImage img(w, h);
  std::copy(buf->begin(), buf->end(), img.bytes().begin());
  return img;
}

inline std::vector<std::uint8_t> encode_rgb(const RgbImage& img) {
  return detail::encode(img.bytes(), img.width(), img.height(), PNG_FORMAT_RGB);
}

inline std::optional<LabelMap> decode_labels(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  auto buf = detail::decode(bytes, PNG_FORMAT_GRAY, w, h);
  if (!buf) return std::nullopt;
  return LabelMap(w, h, std::move(*buf));
}

inline std::vector<std::uint8_t> encode_labels(const LabelMap& map) {
  return detail::encode(map.ids(), map.width(), map.height(), PNG_FORMAT_GRAY);
}

inline std::optional<RgbImage> load_rgb(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  if (!bytes) return std::nullopt;
  return decode_rgb(*bytes);
}

inline std::optional<LabelMap> load_labels(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  if (!bytes) return std::nullopt;
  return decode_labels(*bytes);
}

inline void save_rgb(const std::filesystem::path& path, const RgbImage& img) {
  write_file(path, encode_rgb(img));
}

inline void save_labels(const std::filesystem::path& path, const LabelMap& map) {
  write_file(path, encode_labels(map));
}

}  // namespace png

}  // namespace streetair

#endif  // STREETAIR_IMAGE_HPP
