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

#include "msa/ring_analysis.hpp"

#include <algorithm>
#include <fstream>

#include "msa/error.hpp"
#include "msa/metrics.hpp"
#include "msa/rng.hpp"

namespace msa {

std::vector<RingSpec> ring_boundaries(const ExtendedBoundaries& b, int n) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "ring count must be >= 2");
  }
  const double width = (b.outer.r - b.inner.r) / n;
  std::vector<RingSpec> rings(n);
  for (int i = 0; i < n; ++i) {
    rings[i].index = i;
    rings[i].inner = {b.inner.cx, b.inner.cy, b.inner.r + i * width};
    rings[i].outer = {b.inner.cx, b.inner.cy, b.inner.r + (i + 1) * width};
  }
  return rings;
}

RingProfile normalize_profile(const std::vector<double>& eers) {
  RingProfile profile;
  profile.eers = eers;
  profile.normalized.assign(eers.size(), 0.0);
  if (eers.empty()) return profile;
  const auto [lo, hi] = std::minmax_element(eers.begin(), eers.end());
  if (*hi > *lo) {
    for (std::size_t i = 0; i < eers.size(); ++i) {
      profile.normalized[i] = (eers[i] - *lo) / (*hi - *lo);
    }
  }
  return profile;
}

RingProfile per_ring_eer(const std::vector<ManifestRecord>& records,
                         const std::filesystem::path& base_dir,
                         const RingAnalysisConfig& cfg) {
  struct Entry {
    std::string image_id;
    PadLabel truth;
    Split split;
    EyeInput eye;
  };
  std::vector<Entry> entries;
  bool has_train_attack = false, has_train_bona_fide = false;
  bool has_test = false;
  for (const auto& r : records) {
    entries.push_back({r.image_id, r.truth, r.split,
                       load_eye(r, base_dir, cfg.s1, cfg.s2, cfg.detector)});
    if (r.split == Split::Train) {
      (r.truth == PadLabel::Attack ? has_train_attack : has_train_bona_fide) =
          true;
    }
    if (r.split == Split::Test) has_test = true;
  }
  if (!has_train_attack || !has_train_bona_fide || !has_test) {
    throw Error(ErrorCode::ProtocolError,
                "ring analysis needs both classes in train and a test split");
  }

  const FeatureConfig feature_config{cfg.cells_x, cfg.cells_y,
                                     cfg.texture_width,
                                     cfg.ring_texture_height};
  std::vector<double> eers(cfg.n_rings, 0.0);
  for (int ring = 0; ring < cfg.n_rings; ++ring) {
    std::vector<FeatureVector> train_f, dev_f;
    std::vector<PadLabel> train_y, dev_y;
    std::vector<ScoredSample> test_samples;
    std::vector<std::size_t> test_entries;

    std::vector<FeatureVector> test_f;
    for (const auto& e : entries) {
      const auto rings = ring_boundaries(e.eye.bounds, cfg.n_rings);
      const NormalizedTexture tex =
          rubber_sheet(e.eye.image, rings[ring].inner, rings[ring].outer,
                       cfg.texture_width, cfg.ring_texture_height);
      MicroStripe stripe;
      stripe.row_offset = 0;
      stripe.height = tex.height;
      stripe.width = tex.width;
      stripe.values = tex.values;
      FeatureVector fv = lbp_features(stripe, cfg.cells_x, cfg.cells_y);
      switch (e.split) {
        case Split::Train:
          train_f.push_back(std::move(fv));
          train_y.push_back(e.truth);
          break;
        case Split::Dev:
          dev_f.push_back(std::move(fv));
          dev_y.push_back(e.truth);
          break;
        case Split::Test:
          test_f.push_back(std::move(fv));
          test_samples.push_back({e.image_id, e.truth, 0.0, std::nullopt});
          break;
      }
    }

    TrainConfig ring_train = cfg.train;
    ring_train.seed = mix_seed(cfg.train.seed, static_cast<std::uint64_t>(ring));
    const ClassifierModel model =
        train(train_f, train_y, dev_f, dev_y, ring_train, feature_config);
    for (std::size_t i = 0; i < test_f.size(); ++i) {
      test_samples[i].score = predict(model, test_f[i]);
    }
    eers[ring] = eer(test_samples).eer;
  }
  return normalize_profile(eers);
}

void save_ring_profile_csv(const RingProfile& profile,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# format_version: 1\n";
  out << "ring_index,eer,normalized\n";
  out.precision(17);
  for (std::size_t i = 0; i < profile.eers.size(); ++i) {
    out << i << "," << profile.eers[i] << "," << profile.normalized[i] << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

}  // namespace msa
