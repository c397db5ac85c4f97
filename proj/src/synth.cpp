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

#include "msa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <fstream>
#include <iomanip>

#include "msa/error.hpp"
#include "msa/rng.hpp"

namespace msa {

const char* artifact_type_name(ArtifactType t) {
  return t == ArtifactType::BorderRing ? "border_ring" : "dot_print";
}

ArtifactType artifact_type_from_string(const std::string& s) {
  if (s == "border_ring") return ArtifactType::BorderRing;
  if (s == "dot_print") return ArtifactType::DotPrint;
  throw Error(ErrorCode::ParseError, "unknown artifact type: " + s);
}

namespace {

// One random cosine mode of the band-limited texture, evaluated separably:
// cos(kx*x + ky*y + phi) = cos(kx*x)*cos(ky*y + phi) - sin(kx*x)*sin(ky*y + phi)
struct NoiseMode {
  double kx, ky, phi, amplitude;
};

std::vector<NoiseMode> draw_noise_modes(Rng& rng, int count, double k_min,
                                        double k_max, double amplitude) {
  std::vector<NoiseMode> modes(count);
  // per-mode amplitude chosen so the summed field has RMS ~= amplitude
  const double mode_amp = amplitude * std::sqrt(2.0 / std::max(count, 1));
  for (auto& m : modes) {
    const double k = rng.uniform(k_min, k_max);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    m.kx = k * std::cos(angle);
    m.ky = k * std::sin(angle);
    m.phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    m.amplitude = mode_amp;
  }
  return modes;
}

}  // namespace

GrayImage render_eye(const EyeSpec& spec, int size) {
  if (size < 16) {
    throw Error(ErrorCode::InvalidArgument, "image size too small");
  }
  Rng rng(spec.seed);
  const auto modes = draw_noise_modes(rng, spec.noise_modes, spec.noise_k_min,
                                      spec.noise_k_max, spec.noise_amplitude);

  // separable per-mode tables
  std::vector<std::vector<double>> cos_x(modes.size()), sin_x(modes.size());
  std::vector<std::vector<double>> cos_y(modes.size()), sin_y(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    cos_x[m].resize(size);
    sin_x[m].resize(size);
    cos_y[m].resize(size);
    sin_y[m].resize(size);
    for (int i = 0; i < size; ++i) {
      cos_x[m][i] = std::cos(modes[m].kx * i);
      sin_x[m][i] = std::sin(modes[m].kx * i);
      cos_y[m][i] = std::cos(modes[m].ky * i + modes[m].phi);
      sin_y[m][i] = std::sin(modes[m].ky * i + modes[m].phi);
    }
  }

  const double sigma = spec.artifact_half_width > 0.0
                           ? spec.artifact_half_width / std::sqrt(std::log(2.0))
                           : 1.0;

  GrayImage img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d_pupil = std::hypot(x - spec.pupil.cx, y - spec.pupil.cy);
      const double d_iris = std::hypot(x - spec.iris.cx, y - spec.iris.cy);

      double value;
      if (d_pupil <= spec.pupil.r) {
        value = spec.pupil_intensity;
      } else {
        double noise = 0.0;
        for (std::size_t m = 0; m < modes.size(); ++m) {
          noise += modes[m].amplitude *
                   (cos_x[m][x] * cos_y[m][y] - sin_x[m][x] * sin_y[m][y]);
        }
        if (d_iris <= spec.iris.r) {
          value = spec.iris_base + noise;
        } else {
          const double scale = spec.noise_amplitude > 0.0
                                   ? spec.sclera_noise_amplitude /
                                         spec.noise_amplitude
                                   : 0.0;
          value = spec.sclera_intensity + noise * scale;
        }
      }

      if (spec.artifact_contrast != 0.0) {
        if (spec.artifact == ArtifactType::BorderRing) {
          const double dr = (d_iris - spec.artifact_center_r) / sigma;
          value += spec.artifact_contrast * std::exp(-dr * dr);
        } else if (d_pupil > spec.pupil.r) {
          // dot grid everywhere outside the pupil, like a printed image
          const double fx = x - spec.dot_spacing * std::floor(x / spec.dot_spacing);
          const double fy = y - spec.dot_spacing * std::floor(y / spec.dot_spacing);
          const double half = spec.dot_spacing / 2.0;
          const double dd =
              std::hypot(fx - half, fy - half) / spec.dot_radius;
          value -= spec.artifact_contrast * std::exp(-dd * dd);
        }
      }
      img.at(x, y) =
          static_cast<std::uint8_t>(std::clamp(std::lround(value), 0l, 255l));
    }
  }
  return img;
}

EyeSpec draw_eye_spec(const SynthParams& params, int index,
                      double contrast_scale) {
  Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(index)));
  EyeSpec spec;
  const double half = params.image_size / 2.0;
  const double jx = rng.uniform(-params.center_jitter, params.center_jitter);
  const double jy = rng.uniform(-params.center_jitter, params.center_jitter);
  spec.iris.cx = half + jx;
  spec.iris.cy = half + jy;
  spec.iris.r = rng.uniform(params.iris_r_min, params.iris_r_max);
  // small pupil offset, kept well inside the iris
  spec.pupil.cx = spec.iris.cx + rng.uniform(-2.0, 2.0);
  spec.pupil.cy = spec.iris.cy + rng.uniform(-2.0, 2.0);
  spec.pupil.r = rng.uniform(params.pupil_r_min, params.pupil_r_max);

  spec.noise_modes = params.noise_modes;
  spec.noise_k_min = params.noise_k_min;
  spec.noise_k_max = params.noise_k_max;
  spec.noise_amplitude = params.noise_amplitude;
  spec.sclera_noise_amplitude =
      params.noise_amplitude * params.sclera_noise_ratio;

  const double spread = spec.iris.r - spec.pupil.r;
  spec.artifact = params.artifact;
  spec.artifact_center_r = spec.iris.r + params.artifact_offset * spread;
  spec.artifact_half_width = params.artifact_half_width * spread;
  spec.artifact_contrast = params.artifact_contrast * contrast_scale;
  spec.dot_spacing = params.dot_spacing;
  spec.dot_radius = params.dot_radius;
  spec.seed = mix_seed(params.seed, 0x10000ull + static_cast<std::uint64_t>(index));
  return spec;
}

namespace {

Split split_for_index(int index, int count) {
  const int n_train = static_cast<int>(std::floor(count * 0.6));
  const int n_dev = static_cast<int>(std::floor(count * 0.2));
  if (index < n_train) return Split::Train;
  if (index < n_train + n_dev) return Split::Dev;
  return Split::Test;
}

}  // namespace

SynthOutput synth_generate(const SynthParams& params,
                           const std::filesystem::path& out_dir) {
  if (params.n_bona_fide < 1 || params.n_attack < 1 || params.n_soft < 0) {
    throw Error(ErrorCode::InvalidArgument, "class counts must be >= 1");
  }
  if (!(params.pupil_r_max < params.iris_r_min)) {
    throw Error(ErrorCode::InvalidArgument,
                "pupil radius range must stay below the iris range");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                "cannot create output directory " + out_dir.string());
  }

  SynthOutput out;
  out.manifest_path = out_dir / "manifest.csv";
  out.segmentation_path = out_dir / "segmentation.txt";

  std::ofstream seg(out.segmentation_path, std::ios::trunc);
  if (!seg) {
    throw Error(ErrorCode::IoError,
                "cannot write " + out.segmentation_path.string());
  }
  seg << "# format_version: 1\n";
  seg << "# pupil_cx pupil_cy pupil_r iris_cx iris_cy iris_r\n";
  seg.precision(17);

  struct ClassPlan {
    const char* prefix;
    int count;
    LensType lens;
    double contrast_scale;
  };
  const std::vector<ClassPlan> plans = {
      {"bf", params.n_bona_fide, LensType::None, 0.0},
      {"at", params.n_attack,
       params.artifact == ArtifactType::BorderRing ? LensType::Textured
                                                   : LensType::Printout,
       1.0},
      {"sl", params.n_soft, LensType::Soft, params.soft_contrast_ratio},
  };

  int global_index = 0;
  int seg_line = 0;
  for (const auto& plan : plans) {
    for (int i = 0; i < plan.count; ++i, ++global_index) {
      const EyeSpec spec = draw_eye_spec(params, global_index,
                                         plan.contrast_scale);
      const GrayImage img = render_eye(spec, params.image_size);

      std::ostringstream id;
      id << plan.prefix << "_" << std::setw(4) << std::setfill('0') << i;
      const std::string rel_path = "images/" + id.str() + ".png";
      save_png(img, out_dir / rel_path);

      append_segmentation_line(seg, Segmentation{spec.pupil, spec.iris});

      ManifestRecord r;
      r.image_id = id.str();
      r.path = rel_path;
      r.split = split_for_index(i, plan.count);
      r.lens_type = plan.lens;
      r.truth = implied_truth(plan.lens);
      r.segmentation_ref = "segmentation.txt:" + std::to_string(seg_line++);
      out.records.push_back(std::move(r));
    }
  }
  seg.flush();
  if (!seg) {
    throw Error(ErrorCode::IoError,
                "write failure on " + out.segmentation_path.string());
  }

  save_manifest(out.records, out.manifest_path);
  return out;
}

}  // namespace msa
