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

// Brute-force reference computations used by the test suites. Everything
// here is written independently of the library code paths it checks:
// straight loops, per-threshold recounting, no shared helpers.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "msa/image.hpp"
#include "msa/metrics.hpp"
#include "msa/normalization.hpp"

namespace oracle {

inline double lerp(double a, double b, double f) { return a + (b - a) * f; }

// Straight-line interpolation: first along x on the two bracketing rows,
// then along y between those values. Coordinates clamp at the border.
inline double bilinear(const msa::GrayImage& img, double x, double y) {
  x = std::min(std::max(x, 0.0), static_cast<double>(img.width() - 1));
  y = std::min(std::max(y, 0.0), static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double row0 = lerp(img.at(x0, y0), img.at(x1, y0), x - x0);
  const double row1 = lerp(img.at(x0, y1), img.at(x1, y1), x - x0);
  return lerp(row0, row1, y - y0);
}

// Plain global histogram equalization of a texture with the standard
// cdf * 255 / N mapping over quantized values.
inline std::vector<double> global_equalization(const msa::NormalizedTexture& tex) {
  std::vector<long> hist(256, 0);
  for (float v : tex.values) {
    int q = static_cast<int>(std::lround(v));
    q = std::min(std::max(q, 0), 255);
    ++hist[q];
  }
  std::vector<double> map(256, 0.0);
  long cdf = 0;
  const double n = static_cast<double>(tex.values.size());
  for (int v = 0; v < 256; ++v) {
    cdf += hist[v];
    map[v] = 255.0 * cdf / n;
  }
  std::vector<double> out;
  out.reserve(tex.values.size());
  for (float v : tex.values) {
    int q = static_cast<int>(std::lround(v));
    q = std::min(std::max(q, 0), 255);
    out.push_back(map[q]);
  }
  return out;
}

inline double apcer_at(const std::vector<msa::ScoredSample>& samples, double t) {
  long attacks = 0, missed = 0;
  for (const auto& s : samples) {
    if (s.truth == msa::PadLabel::Attack) {
      ++attacks;
      if (!(s.score > t)) ++missed;
    }
  }
  return 100.0 * missed / attacks;
}

inline double bpcer_at(const std::vector<msa::ScoredSample>& samples, double t) {
  long bona_fides = 0, rejected = 0;
  for (const auto& s : samples) {
    if (s.truth == msa::PadLabel::BonaFide) {
      ++bona_fides;
      if (s.score > t) ++rejected;
    }
  }
  return 100.0 * rejected / bona_fides;
}

inline std::vector<double> sweep_thresholds(
    const std::vector<msa::ScoredSample>& samples) {
  std::vector<double> ts;
  ts.push_back(-std::numeric_limits<double>::infinity());
  for (const auto& s : samples) ts.push_back(s.score);
  ts.push_back(std::numeric_limits<double>::infinity());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

struct EerPoint {
  double eer = 0.0;
  double threshold = 0.0;
};

// Exhaustive sweep with per-threshold recounting; linear interpolation
// between the two operating points where apcer - bpcer flips sign, with the
// threshold clamped to the finite side when a sentinel is involved.
inline EerPoint eer_brute_force(const std::vector<msa::ScoredSample>& samples) {
  const auto ts = sweep_thresholds(samples);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double a = apcer_at(samples, ts[i]);
    const double b = bpcer_at(samples, ts[i]);
    if (a - b == 0.0) return {a, ts[i]};
    if (a - b > 0.0) {
      const double a0 = apcer_at(samples, ts[i - 1]);
      const double b0 = bpcer_at(samples, ts[i - 1]);
      const double gap0 = b0 - a0;
      const double gap1 = a - b;
      const double lambda = gap0 / (gap0 + gap1);
      EerPoint p;
      p.eer = a0 + lambda * (a - a0);
      if (std::isfinite(ts[i - 1]) && std::isfinite(ts[i])) {
        p.threshold = ts[i - 1] + lambda * (ts[i] - ts[i - 1]);
      } else {
        p.threshold = std::isfinite(ts[i - 1]) ? ts[i - 1] : ts[i];
      }
      return p;
    }
  }
  return {100.0, ts.back()};
}

inline double bpcer_at_apcer_brute_force(
    const std::vector<msa::ScoredSample>& samples, double target) {
  const auto ts = sweep_thresholds(samples);
  double best = bpcer_at(samples, ts.front());
  for (double t : ts) {
    if (apcer_at(samples, t) <= target) best = bpcer_at(samples, t);
  }
  return best;
}

// Direct vertical linear resampling of each column.
inline std::vector<float> resize_rows_reference(const msa::NormalizedTexture& tex,
                                                int new_height) {
  std::vector<float> out(static_cast<std::size_t>(tex.width) * new_height);
  for (int r = 0; r < new_height; ++r) {
    double src = new_height == 1 ? 0.5 * (tex.height - 1)
                                 : static_cast<double>(r) * (tex.height - 1) /
                                       (new_height - 1);
    const int y0 = static_cast<int>(std::floor(src));
    const int y1 = std::min(y0 + 1, tex.height - 1);
    for (int x = 0; x < tex.width; ++x) {
      out[static_cast<std::size_t>(r) * tex.width + x] = static_cast<float>(
          lerp(tex.at(x, y0), tex.at(x, y1), src - y0));
    }
  }
  return out;
}

// Rotates content by `angle` about (cx, cy) using the rubber-sheet angular
// convention, so content at angle t lands at angle t + angle and the
// unwrapped texture shifts toward higher column indices.
inline msa::GrayImage rotate_image(const msa::GrayImage& img, double cx,
                                   double cy, double angle) {
  msa::GrayImage out(img.width(), img.height());
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double vx = x - cx;
      const double vy = y - cy;
      // inverse rotation of the query point
      const double sx = cx + vx * c - vy * s;
      const double sy = cy + vx * s + vy * c;
      const double value = bilinear(img, sx, sy);
      out.at(x, y) = static_cast<std::uint8_t>(
          std::min(std::max(std::lround(value), 0l), 255l));
    }
  }
  return out;
}

}  // namespace oracle
