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

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/classifier.hpp"
#include "msa/fusion.hpp"
#include "msa/manifest.hpp"
#include "msa/metrics.hpp"
#include "msa/pipeline.hpp"
#include "msa/ring_analysis.hpp"

namespace msa {

enum class Protocol {
  Standard,
  SoftLens1,      // soft lenses in train and test, labeled bona fide
  SoftLens2,      // soft lenses excluded from train/dev, present in test
  SoftLens3,      // soft lenses excluded everywhere
  StripeAblation, // one run per stripe height
  FusionCompare,  // majority vote vs mean score vs resize baseline
  RingAnalysis,   // per-ring EER profile
};

const char* protocol_name(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct ExperimentConfig {
  Protocol protocol = Protocol::Standard;
  PipelineConfig pipeline;
  TrainConfig train;
  FusionStrategy fusion = FusionStrategy::MajorityVote;
  // Baseline-mode option: pick the per-image decision threshold at the dev
  // EER point instead of 0.5. Only valid for the score-level strategies
  // (mean_score, resize_baseline); the stripe-vote path always decides at
  // the fixed per-stripe threshold.
  bool tune_threshold_on_dev = false;
  std::uint64_t base_seed = 1;
  int repeat_count = 5;  // per-repeat seeds are base_seed + repeat index
  int ring_count = 10;
  int ring_texture_height = 16;
  std::vector<int> ablation_heights = {24, 32, 48, 64};
};

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct VariantResult {
  EvalReport averaged;  // metric means; eer_threshold left empty
  std::vector<EvalReport> per_repeat;
  // dev-chosen decision thresholds, one per repeat; empty unless tuning ran
  std::vector<double> decision_thresholds;
};

struct ExperimentResult {
  ExperimentConfig config;
  // keyed by variant: "standard", "soft_lens_2", "h=32",
  // "majority_vote", ...
  std::map<std::string, VariantResult> variants;
  std::vector<RingProfile> ring_profiles;  // RingAnalysis protocol only
  nlohmann::json provenance;
};

// Element-wise mean of the per-repeat metrics. hter is recomputed from the
// averaged apcer/bpcer so its identity holds exactly; thresholds are not
// averaged (they stay in the per-repeat reports).
EvalReport average_reports(const std::vector<EvalReport>& reports);

// Runs the configured protocol: preprocess once, then repeat_count seeded
// train/evaluate rounds. When out_dir is non-empty, writes report.json and
// the per-repeat model files under it.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::vector<ManifestRecord>& records,
                                const std::filesystem::path& base_dir,
                                const std::filesystem::path& out_dir = {});

nlohmann::json experiment_to_json(const ExperimentResult& result);

}  // namespace msa
