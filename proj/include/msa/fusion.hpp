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
#include <string>
#include <vector>

#include "msa/classifier.hpp"
#include "msa/normalization.hpp"
#include "msa/pad_label.hpp"

namespace msa {

enum class FusionStrategy { MajorityVote, MeanScore, ResizeBaseline };

const char* fusion_strategy_name(FusionStrategy s);
FusionStrategy fusion_strategy_from_string(const std::string& s);

/// Fused per-image decision. A stripe (or the fused score) counts as Attack
/// only when strictly above the threshold; ties go to BonaFide.
struct PadDecision {
  PadLabel label = PadLabel::BonaFide;
  double fused_score = 0.0;  // in [0,1]
  FusionStrategy strategy = FusionStrategy::MajorityVote;
  int votes_attack = 0;
  int votes_total = 0;
};

// Decision-level fusion over an odd score list; fused_score is the attack
// vote fraction so score-based metrics stay available.
PadDecision majority_vote(const std::vector<StripeScore>& scores,
                          double threshold = 0.5);

// Score-level fusion: arithmetic mean of p_attack.
PadDecision mean_score(const std::vector<StripeScore>& scores,
                       double threshold = 0.5);

// Vertical bilinear resampling of a texture to a new row count.
NormalizedTexture resize_texture_rows(const NormalizedTexture& tex,
                                      int new_height);

// Baseline: the full texture resized to the model's stripe height and scored
// once.
PadDecision resize_baseline(const NormalizedTexture& tex,
                            const ClassifierModel& model, int stripe_height,
                            double threshold = 0.5);

struct DecisionRecord {
  std::string image_id;
  FusionStrategy strategy = FusionStrategy::MajorityVote;
  double fused_score = 0.0;
  PadLabel label = PadLabel::BonaFide;
};

// Decision CSV: header `image_id,strategy,fused_score,label`.
void export_decisions(const std::vector<DecisionRecord>& rows,
                      const std::filesystem::path& path);
std::vector<DecisionRecord> import_decisions(const std::filesystem::path& path);

}  // namespace msa
