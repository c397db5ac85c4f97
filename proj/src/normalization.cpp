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

#include "msa/normalization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "msa/error.hpp"

namespace msa {

NormalizedTexture rubber_sheet(const GrayImage& img, const CircleParams& inner,
                               const CircleParams& outer, int width,
                               int height) {
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "normalized texture needs width >= 2 and height >= 2");
  }
  if (!(inner.r > 0.0) || !(inner.r < outer.r)) {
    throw Error(ErrorCode::InvalidArgument, "invalid annulus radii");
  }

  NormalizedTexture tex;
  tex.width = width;
  tex.height = height;
  tex.values.resize(static_cast<std::size_t>(width) * height);

  for (int c = 0; c < width; ++c) {
    const double theta = 2.0 * std::numbers::pi * c / width;
    const double dir_x = std::cos(theta);
    const double dir_y = -std::sin(theta);  // counter-clockwise with y down
    const double xi = inner.cx + inner.r * dir_x;
    const double yi = inner.cy + inner.r * dir_y;
    const double xo = outer.cx + outer.r * dir_x;
    const double yo = outer.cy + outer.r * dir_y;
    for (int r = 0; r < height; ++r) {
      const double t = static_cast<double>(r) / (height - 1);
      const SubpixelSample p{(1.0 - t) * xi + t * xo, (1.0 - t) * yi + t * yo};
      tex.at(c, r) = static_cast<float>(bilinear_sample(img, p));
    }
  }
  return tex;
}

NormalizedTexture rubber_sheet(const GrayImage& img,
                               const ExtendedBoundaries& b, int width,
                               int height) {
  return rubber_sheet(img, b.inner, b.outer, width, height);
}

namespace {

int quantize(float v) {
  return std::clamp(static_cast<int>(std::lround(v)), 0, 255);
}

// Tile boundaries via even division; edge tiles absorb the remainder.
std::vector<int> tile_bounds(int extent, int tiles) {
  std::vector<int> bounds(tiles + 1);
  for (int i = 0; i <= tiles; ++i) {
    bounds[i] = static_cast<int>(static_cast<long long>(i) * extent / tiles);
  }
  return bounds;
}

}  // namespace

std::vector<std::array<double, 256>> clahe_mappings(
    const NormalizedTexture& tex, const ClaheConfig& cfg) {
  const int tiles_x = cfg.tiles_x;
  const int tiles_y = cfg.tiles_y;
  if (cfg.clip_limit <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "clip limit must be positive");
  }
  if (tiles_x < 1 || tiles_y < 1 || tiles_x > tex.width ||
      tiles_y > tex.height) {
    throw Error(ErrorCode::InvalidArgument, "bad tile grid");
  }
  const auto xb = tile_bounds(tex.width, tiles_x);
  const auto yb = tile_bounds(tex.height, tiles_y);

  std::vector<std::array<double, 256>> mappings(
      static_cast<std::size_t>(tiles_x) * tiles_y);
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      std::array<double, 256> hist{};
      const int npix = (xb[tx + 1] - xb[tx]) * (yb[ty + 1] - yb[ty]);
      for (int y = yb[ty]; y < yb[ty + 1]; ++y) {
        for (int x = xb[tx]; x < xb[tx + 1]; ++x) {
          hist[quantize(tex.at(x, y))] += 1.0;
        }
      }
      // clip and redistribute the excess uniformly
      const double clip = cfg.clip_limit * npix / 256.0;
      double excess = 0.0;
      for (auto& h : hist) {
        if (h > clip) {
          excess += h - clip;
          h = clip;
        }
      }
      const double bonus = excess / 256.0;
      for (auto& h : hist) h += bonus;

      auto& map = mappings[static_cast<std::size_t>(ty) * tiles_x + tx];
      double cdf = 0.0;
      for (int v = 0; v < 256; ++v) {
        cdf += hist[v];
        map[v] = 255.0 * cdf / npix;
      }
    }
  }
  return mappings;
}

NormalizedTexture clahe(const NormalizedTexture& tex, double clip_limit,
                        int tiles_x, int tiles_y) {
  const auto mappings =
      clahe_mappings(tex, ClaheConfig{clip_limit, tiles_x, tiles_y});

  const auto xb = tile_bounds(tex.width, tiles_x);
  const auto yb = tile_bounds(tex.height, tiles_y);
  std::vector<double> centers_x(tiles_x), centers_y(tiles_y);
  for (int tx = 0; tx < tiles_x; ++tx) {
    centers_x[tx] = 0.5 * (xb[tx] + xb[tx + 1] - 1);
  }
  for (int ty = 0; ty < tiles_y; ++ty) {
    centers_y[ty] = 0.5 * (yb[ty] + yb[ty + 1] - 1);
  }

  NormalizedTexture out;
  out.width = tex.width;
  out.height = tex.height;
  out.values.resize(tex.values.size());

  const auto mapping_at = [&](int tx, int ty) -> const std::array<double, 256>& {
    return mappings[static_cast<std::size_t>(ty) * tiles_x + tx];
  };

  for (int y = 0; y < tex.height; ++y) {
    // bracketing tile rows and vertical blend weight
    int ty0 = 0;
    while (ty0 + 1 < tiles_y && centers_y[ty0 + 1] <= y) ++ty0;
    int ty1 = ty0;
    double fy = 0.0;
    if (y > centers_y[ty0] && ty0 + 1 < tiles_y) {
      ty1 = ty0 + 1;
      fy = (y - centers_y[ty0]) / (centers_y[ty1] - centers_y[ty0]);
    }
    for (int x = 0; x < tex.width; ++x) {
      int tx0 = 0;
      while (tx0 + 1 < tiles_x && centers_x[tx0 + 1] <= x) ++tx0;
      int tx1 = tx0;
      double fx = 0.0;
      if (x > centers_x[tx0] && tx0 + 1 < tiles_x) {
        tx1 = tx0 + 1;
        fx = (x - centers_x[tx0]) / (centers_x[tx1] - centers_x[tx0]);
      }
      const int q = quantize(tex.at(x, y));
      const double top = (1.0 - fx) * mapping_at(tx0, ty0)[q] +
                         fx * mapping_at(tx1, ty0)[q];
      const double bottom = (1.0 - fx) * mapping_at(tx0, ty1)[q] +
                            fx * mapping_at(tx1, ty1)[q];
      out.at(x, y) = static_cast<float>((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

NormalizedTexture clahe(const NormalizedTexture& tex, const ClaheConfig& cfg) {
  return clahe(tex, cfg.clip_limit, cfg.tiles_x, cfg.tiles_y);
}

namespace {
constexpr char kTextureMagic[8] = {'M', 'S', 'A', 'T', 'E', 'X', 'F', '1'};

void put_u32le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
               static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

std::uint32_t get_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void save_texture(const NormalizedTexture& tex,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kTextureMagic, sizeof(kTextureMagic));
  put_u32le(out, static_cast<std::uint32_t>(tex.width));
  put_u32le(out, static_cast<std::uint32_t>(tex.height));
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(tex.values.data()),
            static_cast<std::streamsize>(tex.values.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

NormalizedTexture load_texture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kTextureMagic, 8) != 0) {
    throw Error(ErrorCode::ParseError, "not a texture dump: " + path.string());
  }
  NormalizedTexture tex;
  tex.width = static_cast<int>(get_u32le(in));
  tex.height = static_cast<int>(get_u32le(in));
  if (!in || tex.width < 1 || tex.height < 1) {
    throw Error(ErrorCode::ParseError, "bad texture dimensions");
  }
  tex.values.resize(static_cast<std::size_t>(tex.width) * tex.height);
  in.read(reinterpret_cast<char*>(tex.values.data()),
          static_cast<std::streamsize>(tex.values.size() * sizeof(float)));
  if (!in) throw Error(ErrorCode::ParseError, "truncated texture dump");
  return tex;
}

GrayImage texture_to_image(const NormalizedTexture& tex) {
  GrayImage img(tex.width, tex.height);
  for (int y = 0; y < tex.height; ++y) {
    for (int x = 0; x < tex.width; ++x) {
      img.at(x, y) = static_cast<std::uint8_t>(quantize(tex.at(x, y)));
    }
  }
  return img;
}

void save_texture_pgm(const NormalizedTexture& tex,
                      const std::filesystem::path& path) {
  save_pgm(texture_to_image(tex), path);
}

}  // namespace msa
