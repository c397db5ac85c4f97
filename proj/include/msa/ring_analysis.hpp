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
#include <vector>

#include "msa/classifier.hpp"
#include "msa/manifest.hpp"
#include "msa/pipeline.hpp"
#include "msa/segmentation.hpp"

namespace msa {

/// One of n equal-width concentric rings partitioning an extended annulus.
struct RingSpec {
  int index = 0;
  CircleParams inner;
  CircleParams outer;
};

// Ring i spans [inner.r + i*w, inner.r + (i+1)*w] with
// w = (outer.r - inner.r)/n; all circles share the annulus center.
std::vector<RingSpec> ring_boundaries(const ExtendedBoundaries& b, int n);

/// Per-ring test EERs plus the min-max normalized profile used for heatmaps.
struct RingProfile {
  std::vector<double> eers;        // percentages
  std::vector<double> normalized;  // (eer-min)/(max-min), all 0 if degenerate
};

RingProfile normalize_profile(const std::vector<double>& eers);

struct RingAnalysisConfig {
  int n_rings = 10;
  int ring_texture_height = 16;
  int texture_width = 512;
  double s1 = 0.4;
  double s2 = 0.4;
  int cells_x = 16;
  int cells_y = 2;
  DetectorConfig detector;
  TrainConfig train;
};

// For each ring: rubber-sheet that ring alone to
// (texture_width x ring_texture_height), train a fresh classifier on the
// train split (dev split for early stopping), then compute the test EER from
// single-texture scores. Per-ring seeds derive from (train.seed, ring index).
RingProfile per_ring_eer(const std::vector<ManifestRecord>& records,
                         const std::filesystem::path& base_dir,
                         const RingAnalysisConfig& cfg);

void save_ring_profile_csv(const RingProfile& profile,
                           const std::filesystem::path& path);

}  // namespace msa
