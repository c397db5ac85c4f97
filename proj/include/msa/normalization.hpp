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

#include <array>
#include <filesystem>
#include <vector>

#include "msa/image.hpp"
#include "msa/segmentation.hpp"

namespace msa {

/// Polar texture unwrapped from an annulus. Row 0 is the inner boundary, the
/// last row the outer boundary; column c corresponds to angle 2*pi*c/width.
/// Values stay real in [0,255] until export, so later feature extraction is
/// not fed compounded rounding.
struct NormalizedTexture {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major

  float at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  float& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Polar unwrapping between two concentric circles. Angle 0 points along +x
// and increases counter-clockwise (y up); radial positions interpolate
// linearly from the inner circle (row 0) to the outer circle (last row).
NormalizedTexture rubber_sheet(const GrayImage& img, const CircleParams& inner,
                               const CircleParams& outer, int width = 512,
                               int height = 64);
NormalizedTexture rubber_sheet(const GrayImage& img,
                               const ExtendedBoundaries& b, int width = 512,
                               int height = 64);

struct ClaheConfig {
  double clip_limit = 2.0;
  int tiles_x = 8;
  int tiles_y = 8;
};

// Contrast-limited adaptive histogram equalization: per-tile 256-bin
// histograms clipped at clip_limit * (tile pixels / 256) with the excess
// redistributed uniformly, then per-pixel bilinear blending of the four
// surrounding tile mappings.
NormalizedTexture clahe(const NormalizedTexture& tex, double clip_limit,
                        int tiles_x, int tiles_y);
NormalizedTexture clahe(const NormalizedTexture& tex,
                        const ClaheConfig& cfg = {});

// The clipped-and-equalized lookup tables, one 256-entry mapping per tile in
// row-major tile order. Each mapping is monotone non-decreasing into [0,255].
std::vector<std::array<double, 256>> clahe_mappings(
    const NormalizedTexture& tex, const ClaheConfig& cfg);

// Lossless binary dump: magic "MSATEXF1", u32le width, u32le height,
// row-major float32le grid.
void save_texture(const NormalizedTexture& tex,
                  const std::filesystem::path& path);
NormalizedTexture load_texture(const std::filesystem::path& path);

// Quantized 8-bit view for visual inspection.
GrayImage texture_to_image(const NormalizedTexture& tex);
void save_texture_pgm(const NormalizedTexture& tex,
                      const std::filesystem::path& path);

}  // namespace msa
