// Copyright 2026 the msa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace msa {

/// 8-bit grayscale raster, row-major storage.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Fractional raster coordinate used for resampling.
struct SubpixelSample {
  double x = 0.0;
  double y = 0.0;
};

// Exact bilinear interpolation of the four surrounding pixels.
// Out-of-bounds coordinates are clamped to the image border, so the outer
// boundary of an extended segmentation may leave the frame without failing.
double bilinear_sample(const GrayImage& img, SubpixelSample p);

// ITU-R BT.601 luma, rounded to the nearest integer.
std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Readers/writers for PNG and binary PGM (P5). Color PNG input is converted
// to luma; PNG output is always 8-bit grayscale.
GrayImage load_image(const std::filesystem::path& path);
void save_png(const GrayImage& img, const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);
void save_image(const GrayImage& img, const std::filesystem::path& path);

// Byte-level codecs, exposed so callers can stay off the filesystem.
GrayImage decode_image(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

}  // namespace msa
