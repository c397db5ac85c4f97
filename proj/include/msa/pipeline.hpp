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

#include <optional>

#include "msa/manifest.hpp"
#include "msa/normalization.hpp"
#include "msa/segmentation.hpp"

namespace msa {

/// Preprocessing knobs shared by the experiment runner and the CLI.
struct PipelineConfig {
  double s1 = 0.4;  // boundary extension ratios
  double s2 = 0.4;
  int texture_width = 512;
  int texture_height = 64;
  ClaheConfig clahe;
  int stripe_height = 32;
  int stride = 4;
  int cells_x = 16;
  int cells_y = 2;
  std::optional<int> sample_k;  // odd random stripe subset; empty = all
  double stripe_threshold = 0.5;
  DetectorConfig detector;
};

struct EyeInput {
  GrayImage image;
  ExtendedBoundaries bounds;
};

// Loads a record's image and produces extended boundaries, either from its
// segmentation reference or by running the circle detector.
EyeInput load_eye(const ManifestRecord& record,
                  const std::filesystem::path& base_dir, double s1, double s2,
                  const DetectorConfig& detector);

// segment -> extend -> rubber sheet -> CLAHE
NormalizedTexture preprocess_texture(const EyeInput& eye,
                                     const PipelineConfig& cfg);

}  // namespace msa
