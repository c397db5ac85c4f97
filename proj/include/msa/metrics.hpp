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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/pad_label.hpp"

namespace msa {

/// One evaluated presentation: ground truth, fused score, and (optionally)
/// the hard decision used for decision-level rates.
struct ScoredSample {
  std::string image_id;
  PadLabel truth = PadLabel::BonaFide;
  double score = 0.0;  // in [0,1]
  std::optional<PadLabel> decision;
};

struct DecisionRates {
  double ccr = 0.0;    // all values are percentages
  double apcer = 0.0;  // attacks classified bona fide / attacks
  double bpcer = 0.0;  // bona fides classified attack / bona fides
  double hter = 0.0;   // (apcer + bpcer) / 2
};

// Decision-level rates; denominators are per-class counts, never the total.
DecisionRates rates_at_decisions(const std::vector<ScoredSample>& samples);

/// One point of the threshold sweep, decision rule: Attack iff score > t.
struct RocPoint {
  double threshold = 0.0;
  double apcer = 0.0;
  double bpcer = 0.0;
};

// Operating points at -inf, every distinct score, and +inf, in threshold
// order. apcer is non-decreasing and bpcer non-increasing along the sweep.
std::vector<RocPoint> roc_points(const std::vector<ScoredSample>& samples);

struct EerResult {
  double eer = 0.0;  // percentage
  double threshold = 0.0;
};

// Equal error rate with linear interpolation between the two adjacent sweep
// points where apcer - bpcer changes sign. The reported threshold is the
// interpolated crossing (clamped to the finite side when a sentinel is hit).
EerResult eer(const std::vector<ScoredSample>& samples);

// BPCER at the most permissive threshold whose APCER does not exceed the
// target percentage (the reject-all-attacks extreme always qualifies).
double bpcer_at_apcer(const std::vector<ScoredSample>& samples,
                      double target_apcer);

// Rewrites every decision as Attack iff score > threshold; used when an
// operating threshold is chosen on a development split.
std::vector<ScoredSample> with_decisions_at(std::vector<ScoredSample> samples,
                                            double threshold);

/// All metrics for one run.
struct EvalReport {
  double ccr = 0.0;
  double apcer = 0.0;
  double bpcer = 0.0;
  double hter = 0.0;
  double eer = 0.0;
  std::optional<double> eer_threshold;  // empty on averaged reports
  std::map<std::string, double> bpcer_at;  // keys "0.1" and "1"
  long n_bona_fide = 0;
  long n_attack = 0;
};

EvalReport evaluate(const std::vector<ScoredSample>& samples);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
std::string report_table(const EvalReport& report);

}  // namespace msa
