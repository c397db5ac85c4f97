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

#include "msa/pipeline.hpp"

namespace msa {

EyeInput load_eye(const ManifestRecord& record,
                  const std::filesystem::path& base_dir, double s1, double s2,
                  const DetectorConfig& detector) {
  std::filesystem::path img_path(record.path);
  if (img_path.is_relative()) img_path = base_dir / img_path;
  EyeInput eye{load_image(img_path), {}};
  const Segmentation seg =
      record.segmentation_ref.empty()
          ? detect_circles(eye.image, detector)
          : resolve_segmentation_ref(record.segmentation_ref, base_dir);
  eye.bounds = extend_boundaries(seg, s1, s2);
  return eye;
}

NormalizedTexture preprocess_texture(const EyeInput& eye,
                                     const PipelineConfig& cfg) {
  const NormalizedTexture raw = rubber_sheet(eye.image, eye.bounds,
                                             cfg.texture_width,
                                             cfg.texture_height);
  return clahe(raw, cfg.clahe);
}

}  // namespace msa
