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
#include <string>
#include <vector>

#include "msa/image.hpp"
#include "msa/manifest.hpp"
#include "msa/segmentation.hpp"

namespace msa {

enum class ArtifactType { BorderRing, DotPrint };

const char* artifact_type_name(ArtifactType t);
ArtifactType artifact_type_from_string(const std::string& s);

/// Synthetic eye dataset parameters. Bona fide images are a dark pupil disk
/// inside a band-limited-noise iris annulus inside a bright sclera. Attack
/// images add the configured artifact: a contrast ring straddling the
/// iris/sclera border (lens edge) or a regular dot grid (printout). The
/// optional soft-lens class renders the border ring at a fraction of the
/// attack contrast but stays labeled bona fide.
struct SynthParams {
  int image_size = 256;
  double pupil_r_min = 25.0;
  double pupil_r_max = 35.0;
  double iris_r_min = 70.0;
  double iris_r_max = 85.0;
  double center_jitter = 5.0;

  // band-limited iris texture: random cosine modes
  int noise_modes = 24;
  double noise_k_min = 0.06;  // spatial frequency bounds, radians per pixel
  double noise_k_max = 0.5;
  double noise_amplitude = 15.0;
  // sclera texture amplitude as a fraction of the iris amplitude
  double sclera_noise_ratio = 0.66;

  ArtifactType artifact = ArtifactType::BorderRing;
  // ring placement in units of (iris radius - pupil radius) beyond the iris
  double artifact_offset = 0.15;
  double artifact_half_width = 0.10;
  double artifact_contrast = 40.0;
  double dot_spacing = 12.0;
  double dot_radius = 1.8;

  int n_bona_fide = 200;
  int n_attack = 200;
  int n_soft = 0;
  double soft_contrast_ratio = 0.25;

  std::uint64_t seed = 1;
};

/// Ground truth and appearance for one rendered eye.
struct EyeSpec {
  CircleParams pupil;
  CircleParams iris;
  double pupil_intensity = 20.0;
  double iris_base = 120.0;
  double sclera_intensity = 220.0;
  int noise_modes = 24;
  double noise_k_min = 0.06;
  double noise_k_max = 0.5;
  double noise_amplitude = 15.0;
  double sclera_noise_amplitude = 10.0;
  ArtifactType artifact = ArtifactType::BorderRing;
  double artifact_center_r = 0.0;  // absolute radius; contrast 0 disables
  double artifact_half_width = 0.0;
  double artifact_contrast = 0.0;
  double dot_spacing = 12.0;
  double dot_radius = 1.8;
  std::uint64_t seed = 0;
};

GrayImage render_eye(const EyeSpec& spec, int size);

// Deterministically draws an EyeSpec for image `index` of a dataset.
EyeSpec draw_eye_spec(const SynthParams& params, int index,
                      double contrast_scale);

struct SynthOutput {
  std::filesystem::path manifest_path;
  std::filesystem::path segmentation_path;
  std::vector<ManifestRecord> records;
};

// Writes images/, manifest.csv and segmentation.txt under out_dir. Splits
// default to 60/20/20 train/dev/test per class. Byte-identical for a fixed
// seed.
SynthOutput synth_generate(const SynthParams& params,
                           const std::filesystem::path& out_dir);

}  // namespace msa
