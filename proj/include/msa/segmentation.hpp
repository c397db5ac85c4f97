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

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "msa/error.hpp"
#include "msa/image.hpp"

namespace msa {

struct CircleParams {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
};

/// Pupil and iris circles for one eye image.
struct Segmentation {
  CircleParams pupil;
  CircleParams iris;
};

// Throws MalformedSegmentation when radii are non-positive, the pupil is not
// smaller than the iris, or the pupil center lies outside the iris circle.
void validate_segmentation(const Segmentation& seg);

/// The annulus obtained by contracting/expanding the iris circle; both
/// circles share the iris center.
struct ExtendedBoundaries {
  CircleParams inner;
  CircleParams outer;
  double s1 = 0.0;
  double s2 = 0.0;
};

struct DetectorConfig {
  double pupil_r_min = 15.0;
  double pupil_r_max = 60.0;
  double iris_r_min = 50.0;
  double iris_r_max = 140.0;
  // iris center is searched within this distance of the pupil center
  double center_tolerance = 15.0;
  // Sobel magnitude floor for edge pixels; the effective threshold is the
  // larger of this and the 98th magnitude percentile
  double edge_threshold = 25.0;
  // pupil centers are restricted to pixels at or below this intensity quantile
  double pupil_intensity_quantile = 0.2;
  // minimal circumference-support score for an accepted circle; clean circles
  // land around 0.3+, degenerate searches stay well under 0.1
  double accumulator_threshold = 0.15;
  // accepted circles must be at least this much darker inside than in the
  // surrounding ring; rejects accumulator flukes inside flat regions
  double min_contrast = 10.0;
};

// Thrown when no circle clears the accumulator threshold. Carries whatever
// partial result the accumulator produced so callers can inspect near misses.
class SegmentationError : public Error {
 public:
  SegmentationError(const std::string& message,
                    std::optional<CircleParams> best_pupil,
                    std::optional<CircleParams> best_iris)
      : Error(ErrorCode::SegmentationFailed, message),
        best_pupil_(best_pupil),
        best_iris_(best_iris) {}

  const std::optional<CircleParams>& best_pupil() const { return best_pupil_; }
  const std::optional<CircleParams>& best_iris() const { return best_iris_; }

 private:
  std::optional<CircleParams> best_pupil_;
  std::optional<CircleParams> best_iris_;
};

// Circular-edge Hough detector over a Sobel edge map. The pupil is located
// first inside the low-intensity region, then the iris is searched
// concentrically within the configured center tolerance. Both circles must
// be darker inside than outside.
Segmentation detect_circles(const GrayImage& img,
                            const DetectorConfig& config = {});

// Reads line `index` (zero-based, counting non-comment lines) of a
// segmentation text file: `pupil_cx pupil_cy pupil_r iris_cx iris_cy iris_r`.
Segmentation load_segmentation(const std::filesystem::path& path,
                               int index = 0);

void append_segmentation_line(std::ostream& out, const Segmentation& seg);

// Boundary extension: inner = r_iris - (r_iris - r_pupil)*s1,
// outer = r_iris + (r_iris - r_pupil)*s2, both centered at the iris center.
ExtendedBoundaries extend_boundaries(const Segmentation& seg, double s1,
                                     double s2);

}  // namespace msa
