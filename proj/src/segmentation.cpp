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

#include "msa/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

namespace msa {

void validate_segmentation(const Segmentation& seg) {
  if (!(seg.pupil.r > 0.0) || !(seg.iris.r > 0.0)) {
    throw Error(ErrorCode::MalformedSegmentation, "non-positive radius");
  }
  if (!(seg.pupil.r < seg.iris.r)) {
    throw Error(ErrorCode::MalformedSegmentation,
                "pupil radius must be smaller than iris radius");
  }
  const double dx = seg.pupil.cx - seg.iris.cx;
  const double dy = seg.pupil.cy - seg.iris.cy;
  if (std::hypot(dx, dy) > seg.iris.r) {
    throw Error(ErrorCode::MalformedSegmentation,
                "pupil center lies outside the iris circle");
  }
}

namespace {

struct EdgePixel {
  int x;
  int y;
  float dx;  // unit gradient direction
  float dy;
};

struct HoughPeak {
  CircleParams circle;
  double score = 0.0;
};

// Accumulates circle-center votes for all edge pixels and returns the best
// peak. Each edge pixel votes once per radius at the center predicted by its
// gradient direction (circles are darker inside, so the center lies against
// the gradient). Score is vote support in a 3x3x(+-1 radius) pocket divided
// by the circle circumference.
std::optional<HoughPeak> hough_best_circle(
    const std::vector<EdgePixel>& edges, int width, int height, double r_min,
    double r_max, const std::vector<std::uint8_t>& center_mask) {
  const int r0 = static_cast<int>(std::ceil(r_min));
  const int r1 = static_cast<int>(std::floor(r_max));
  if (r1 < r0) return std::nullopt;
  const int nr = r1 - r0 + 1;

  std::vector<std::uint32_t> acc(
      static_cast<std::size_t>(width) * height * nr, 0);
  const auto idx = [&](int x, int y, int ri) {
    return (static_cast<std::size_t>(y) * width + x) * nr + ri;
  };

  for (const auto& e : edges) {
    for (int r = r0; r <= r1; ++r) {
      const int cx = static_cast<int>(std::lround(e.x - r * e.dx));
      const int cy = static_cast<int>(std::lround(e.y - r * e.dy));
      if (cx < 0 || cy < 0 || cx >= width || cy >= height) continue;
      if (!center_mask.empty() &&
          !center_mask[static_cast<std::size_t>(cy) * width + cx]) {
        continue;
      }
      ++acc[idx(cx, cy, r - r0)];
    }
  }

  // 3x3 spatial smoothing per radius layer
  std::vector<std::uint32_t> smooth(acc.size(), 0);
  for (int y = 1; y + 1 < height; ++y) {
    for (int x = 1; x + 1 < width; ++x) {
      for (int ri = 0; ri < nr; ++ri) {
        std::uint32_t s = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            s += acc[idx(x + dx, y + dy, ri)];
          }
        }
        smooth[idx(x, y, ri)] = s;
      }
    }
  }

  double best_score = -1.0;
  int best_x = 0, best_y = 0, best_ri = 0;
  for (int y = 1; y + 1 < height; ++y) {
    for (int x = 1; x + 1 < width; ++x) {
      for (int ri = 0; ri < nr; ++ri) {
        std::uint32_t support = smooth[idx(x, y, ri)];
        if (ri > 0) support += smooth[idx(x, y, ri - 1)];
        if (ri + 1 < nr) support += smooth[idx(x, y, ri + 1)];
        const double r = r0 + ri;
        const double score = support / (2.0 * std::numbers::pi * r);
        if (score > best_score) {
          best_score = score;
          best_x = x;
          best_y = y;
          best_ri = ri;
        }
      }
    }
  }
  if (best_score < 0.0) return std::nullopt;

  // vote-weighted centroid around the peak for sub-cell center and radius
  double wsum = 0.0, xsum = 0.0, ysum = 0.0, rsum = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dr = -1; dr <= 1; ++dr) {
        const int x = best_x + dx, y = best_y + dy, ri = best_ri + dr;
        if (x < 0 || y < 0 || x >= width || y >= height || ri < 0 || ri >= nr) {
          continue;
        }
        const double w = acc[idx(x, y, ri)];
        wsum += w;
        xsum += w * x;
        ysum += w * y;
        rsum += w * (r0 + ri);
      }
    }
  }
  HoughPeak peak;
  if (wsum > 0.0) {
    peak.circle = {xsum / wsum, ysum / wsum, rsum / wsum};
  } else {
    peak.circle = {static_cast<double>(best_x), static_cast<double>(best_y),
                   static_cast<double>(r0 + best_ri)};
  }
  peak.score = best_score;
  return peak;
}

std::uint8_t intensity_quantile(const GrayImage& img, double q) {
  std::vector<std::uint8_t> values(img.pixels());
  const std::size_t k = std::min(
      values.size() - 1,
      static_cast<std::size_t>(q * static_cast<double>(values.size())));
  std::nth_element(values.begin(), values.begin() + k, values.end());
  return values[k];
}

// Mean intensity of the disk just inside the circle minus the ring just
// outside it. Genuine pupil/iris boundaries are substantially darker inside.
double inside_outside_contrast(const GrayImage& img, const CircleParams& c) {
  double inside_sum = 0.0, outside_sum = 0.0;
  long inside_n = 0, outside_n = 0;
  const double r_in = 0.9 * c.r;
  const double r_out = 1.5 * c.r + 3.0;
  const int x0 = std::max(0, static_cast<int>(c.cx - r_out));
  const int x1 = std::min(img.width() - 1, static_cast<int>(c.cx + r_out));
  const int y0 = std::max(0, static_cast<int>(c.cy - r_out));
  const int y1 = std::min(img.height() - 1, static_cast<int>(c.cy + r_out));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - c.cx, y - c.cy);
      if (d <= r_in) {
        inside_sum += img.at(x, y);
        ++inside_n;
      } else if (d > c.r + 1.0 && d <= r_out) {
        outside_sum += img.at(x, y);
        ++outside_n;
      }
    }
  }
  if (inside_n == 0 || outside_n == 0) return 0.0;
  return outside_sum / outside_n - inside_sum / inside_n;
}

}  // namespace

Segmentation detect_circles(const GrayImage& img,
                            const DetectorConfig& config) {
  const int w = img.width();
  const int h = img.height();
  if (w < 8 || h < 8) {
    throw SegmentationError("image too small for circle search", std::nullopt,
                            std::nullopt);
  }

  // Sobel gradients on the interior
  std::vector<float> mags(static_cast<std::size_t>(w) * h, 0.0f);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const int gx = -img.at(x - 1, y - 1) + img.at(x + 1, y - 1) -
                     2 * img.at(x - 1, y) + 2 * img.at(x + 1, y) -
                     img.at(x - 1, y + 1) + img.at(x + 1, y + 1);
      const int gy = -img.at(x - 1, y - 1) - 2 * img.at(x, y - 1) -
                     img.at(x + 1, y - 1) + img.at(x - 1, y + 1) +
                     2 * img.at(x, y + 1) + img.at(x + 1, y + 1);
      const float m = std::hypot(static_cast<float>(gx),
                                 static_cast<float>(gy));
      mags[static_cast<std::size_t>(y) * w + x] = m;
    }
  }
  std::vector<float> sorted_mags(mags);
  const std::size_t k98 = static_cast<std::size_t>(0.98 * sorted_mags.size());
  std::nth_element(sorted_mags.begin(), sorted_mags.begin() + k98,
                   sorted_mags.end());
  const float threshold =
      std::max(static_cast<float>(config.edge_threshold), sorted_mags[k98]);

  std::vector<EdgePixel> edges;
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const float m = mags[static_cast<std::size_t>(y) * w + x];
      if (m < threshold || m <= 0.0f) continue;
      const int gx = -img.at(x - 1, y - 1) + img.at(x + 1, y - 1) -
                     2 * img.at(x - 1, y) + 2 * img.at(x + 1, y) -
                     img.at(x - 1, y + 1) + img.at(x + 1, y + 1);
      const int gy = -img.at(x - 1, y - 1) - 2 * img.at(x, y - 1) -
                     img.at(x + 1, y - 1) + img.at(x - 1, y + 1) +
                     2 * img.at(x, y + 1) + img.at(x + 1, y + 1);
      edges.push_back({x, y, gx / m, gy / m});
    }
  }
  if (edges.empty()) {
    throw SegmentationError("no edge response above threshold", std::nullopt,
                            std::nullopt);
  }

  // pupil: centers restricted to the dark region
  const std::uint8_t dark_cut =
      intensity_quantile(img, config.pupil_intensity_quantile);
  std::vector<std::uint8_t> dark_mask(static_cast<std::size_t>(w) * h, 0);
  for (std::size_t i = 0; i < dark_mask.size(); ++i) {
    dark_mask[i] = img.pixels()[i] <= dark_cut ? 1 : 0;
  }
  const auto pupil_peak =
      hough_best_circle(edges, w, h, config.pupil_r_min, config.pupil_r_max,
                        dark_mask);
  if (!pupil_peak || pupil_peak->score < config.accumulator_threshold) {
    throw SegmentationError(
        "pupil accumulator below threshold",
        pupil_peak ? std::optional<CircleParams>(pupil_peak->circle)
                   : std::nullopt,
        std::nullopt);
  }
  if (inside_outside_contrast(img, pupil_peak->circle) < config.min_contrast) {
    throw SegmentationError("pupil candidate lacks inside/outside contrast",
                            pupil_peak->circle, std::nullopt);
  }
  const CircleParams pupil = pupil_peak->circle;

  // iris: concentric search near the pupil center
  std::vector<std::uint8_t> near_mask(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = std::hypot(x - pupil.cx, y - pupil.cy);
      near_mask[static_cast<std::size_t>(y) * w + x] =
          d <= config.center_tolerance ? 1 : 0;
    }
  }
  const double iris_r_min = std::max(config.iris_r_min, pupil.r + 5.0);
  const auto iris_peak = hough_best_circle(edges, w, h, iris_r_min,
                                           config.iris_r_max, near_mask);
  if (!iris_peak || iris_peak->score < config.accumulator_threshold) {
    throw SegmentationError(
        "iris accumulator below threshold", pupil,
        iris_peak ? std::optional<CircleParams>(iris_peak->circle)
                  : std::nullopt);
  }
  if (inside_outside_contrast(img, iris_peak->circle) < config.min_contrast) {
    throw SegmentationError("iris candidate lacks inside/outside contrast",
                            pupil, iris_peak->circle);
  }

  Segmentation seg{pupil, iris_peak->circle};
  validate_segmentation(seg);
  return seg;
}

Segmentation load_segmentation(const std::filesystem::path& path, int index) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::string line;
  int data_line = 0;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (data_line++ != index) continue;

    std::istringstream fields(line);
    double v[6];
    for (int i = 0; i < 6; ++i) {
      if (!(fields >> v[i])) {
        throw Error(ErrorCode::ParseError,
                    "segmentation line needs six numeric fields: " + line);
      }
    }
    std::string rest;
    if (fields >> rest) {
      throw Error(ErrorCode::ParseError,
                  "trailing fields on segmentation line: " + line);
    }
    Segmentation seg{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
    validate_segmentation(seg);
    return seg;
  }
  throw Error(ErrorCode::ParseError,
              "segmentation line " + std::to_string(index) + " not found in " +
                  path.string());
}

void append_segmentation_line(std::ostream& out, const Segmentation& seg) {
  out << seg.pupil.cx << " " << seg.pupil.cy << " " << seg.pupil.r << " "
      << seg.iris.cx << " " << seg.iris.cy << " " << seg.iris.r << "\n";
}

ExtendedBoundaries extend_boundaries(const Segmentation& seg, double s1,
                                     double s2) {
  validate_segmentation(seg);
  if (!(s1 >= 0.0 && s1 < 1.0) || !(s2 >= 0.0 && s2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "extension ratios must lie in [0,1)");
  }
  const double spread = seg.iris.r - seg.pupil.r;
  const double inner_r = seg.iris.r - spread * s1;
  const double outer_r = seg.iris.r + spread * s2;
  if (!(inner_r > 0.0)) {
    throw Error(ErrorCode::DegenerateGeometry,
                "extended inner radius is not positive");
  }
  if (!(inner_r < outer_r)) {
    throw Error(ErrorCode::DegenerateGeometry,
                "extended annulus has no width");
  }
  ExtendedBoundaries b;
  b.inner = {seg.iris.cx, seg.iris.cy, inner_r};
  b.outer = {seg.iris.cx, seg.iris.cy, outer_r};
  b.s1 = s1;
  b.s2 = s2;
  return b;
}

}  // namespace msa
