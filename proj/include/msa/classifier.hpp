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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "msa/pad_label.hpp"
#include "msa/stripes.hpp"

namespace msa {

/// Per-stripe attack probability.
struct StripeScore {
  double p_attack = 0.0;
  int stripe_offset = 0;
};

/// Feature extraction parameters; the hash binds vectors to one configuration.
struct FeatureConfig {
  int cells_x = 16;
  int cells_y = 2;
  int stripe_width = 512;
  int stripe_height = 32;

  int feature_length() const { return cells_x * cells_y * 59; }
  std::string hash() const;
};

struct FeatureVector {
  std::vector<double> values;
  std::string config_hash;
};

// LBP code of the pixel at (x, y): 8 neighbors at radius 1 compared against
// the center after quantization to 8 bits; neighbor >= center sets the bit.
int lbp_code_at(const MicroStripe& stripe, int x, int y);

// Histogram bin for a code: the 58 uniform patterns (at most two circular
// bit transitions) in increasing byte order, then one catch-all bin.
int uniform_lbp_bin(int code);

// Uniform LBP histograms per cell, L1-normalized per cell and concatenated
// in row-major cell order. Codes come from the stripe's interior pixels.
FeatureVector lbp_features(const MicroStripe& stripe, int cells_x,
                           int cells_y);

struct TrainConfig {
  int max_epochs = 25;
  int early_stop_patience = 5;
  double learning_rate = 0.001;
  int batch_size = 16;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs_run = 0;
  double final_train_loss = 0.0;
  double best_dev_loss = 0.0;
};

struct ClassifierModel {
  std::vector<double> weights;
  double bias = 0.0;
  FeatureConfig feature_config;
  TrainingMeta training_meta;
};

// Logistic regression minimizing cross-entropy with mini-batch RMS-scaled
// gradient updates (decay 0.9, epsilon 1e-8) and seeded shuffling. Early
// stopping watches dev loss with the configured patience and restores the
// best-dev weights. Fully deterministic for a fixed seed.
ClassifierModel train(const std::vector<FeatureVector>& features,
                      const std::vector<PadLabel>& labels,
                      const std::vector<FeatureVector>& dev_features,
                      const std::vector<PadLabel>& dev_labels,
                      const TrainConfig& cfg,
                      const FeatureConfig& feature_config);

// p_attack for a raw feature vector; lenient about provenance, strict about
// dimensionality.
double predict(const ClassifierModel& model, const FeatureVector& features);

// Extracts features per the model's configuration and applies the logistic.
StripeScore score_stripe(const ClassifierModel& model,
                         const MicroStripe& stripe);

void save_model(const ClassifierModel& model,
                const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

// Score CSV: header `image_id,stripe_offset,p_attack`.
using ScoreKey = std::pair<std::string, int>;
std::map<ScoreKey, StripeScore> import_scores(
    const std::filesystem::path& path);
void export_scores(const std::vector<std::pair<std::string, StripeScore>>& rows,
                   const std::filesystem::path& path);

}  // namespace msa
