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

#include "msa/fusion.hpp"

#include <fstream>
#include <sstream>

#include "msa/error.hpp"

namespace msa {

const char* fusion_strategy_name(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::MajorityVote: return "majority_vote";
    case FusionStrategy::MeanScore: return "mean_score";
    case FusionStrategy::ResizeBaseline: return "resize_baseline";
  }
  return "unknown";
}

FusionStrategy fusion_strategy_from_string(const std::string& s) {
  if (s == "majority_vote") return FusionStrategy::MajorityVote;
  if (s == "mean_score") return FusionStrategy::MeanScore;
  if (s == "resize_baseline") return FusionStrategy::ResizeBaseline;
  throw Error(ErrorCode::ParseError, "unknown fusion strategy: " + s);
}

PadDecision majority_vote(const std::vector<StripeScore>& scores,
                          double threshold) {
  if (scores.empty() || scores.size() % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "majority vote needs an odd, non-empty score list");
  }
  PadDecision d;
  d.strategy = FusionStrategy::MajorityVote;
  d.votes_total = static_cast<int>(scores.size());
  for (const auto& s : scores) {
    if (s.p_attack > threshold) ++d.votes_attack;
  }
  d.fused_score = static_cast<double>(d.votes_attack) / d.votes_total;
  d.label = 2 * d.votes_attack > d.votes_total ? PadLabel::Attack
                                               : PadLabel::BonaFide;
  return d;
}

PadDecision mean_score(const std::vector<StripeScore>& scores,
                       double threshold) {
  if (scores.empty()) {
    throw Error(ErrorCode::InvalidArgument, "mean fusion needs scores");
  }
  PadDecision d;
  d.strategy = FusionStrategy::MeanScore;
  d.votes_total = static_cast<int>(scores.size());
  double sum = 0.0;
  for (const auto& s : scores) {
    sum += s.p_attack;
    if (s.p_attack > threshold) ++d.votes_attack;
  }
  d.fused_score = sum / d.votes_total;
  d.label = d.fused_score > threshold ? PadLabel::Attack : PadLabel::BonaFide;
  return d;
}

NormalizedTexture resize_texture_rows(const NormalizedTexture& tex,
                                      int new_height) {
  if (new_height < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad target height");
  }
  NormalizedTexture out;
  out.width = tex.width;
  out.height = new_height;
  out.values.resize(static_cast<std::size_t>(tex.width) * new_height);
  for (int r = 0; r < new_height; ++r) {
    const double src =
        new_height == 1
            ? 0.5 * (tex.height - 1)
            : static_cast<double>(r) * (tex.height - 1) / (new_height - 1);
    const int y0 = static_cast<int>(src);
    const int y1 = std::min(y0 + 1, tex.height - 1);
    const double f = src - y0;
    for (int x = 0; x < tex.width; ++x) {
      out.at(x, r) =
          static_cast<float>((1.0 - f) * tex.at(x, y0) + f * tex.at(x, y1));
    }
  }
  return out;
}

PadDecision resize_baseline(const NormalizedTexture& tex,
                            const ClassifierModel& model, int stripe_height,
                            double threshold) {
  if (model.feature_config.stripe_height != stripe_height) {
    throw Error(ErrorCode::FeatureMismatch,
                "model was not trained for this stripe height");
  }
  const NormalizedTexture resized = resize_texture_rows(tex, stripe_height);
  MicroStripe stripe;
  stripe.row_offset = 0;
  stripe.height = resized.height;
  stripe.width = resized.width;
  stripe.values = resized.values;
  const StripeScore score = score_stripe(model, stripe);

  PadDecision d;
  d.strategy = FusionStrategy::ResizeBaseline;
  d.fused_score = score.p_attack;
  d.votes_total = 1;
  d.votes_attack = score.p_attack > threshold ? 1 : 0;
  d.label = score.p_attack > threshold ? PadLabel::Attack : PadLabel::BonaFide;
  return d;
}

void export_decisions(const std::vector<DecisionRecord>& rows,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "image_id,strategy,fused_score,label\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.image_id << "," << fusion_strategy_name(r.strategy) << ","
        << r.fused_score << "," << pad_label_name(r.label) << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

std::vector<DecisionRecord> import_decisions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<DecisionRecord> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "image_id,strategy,fused_score,label") {
        throw Error(ErrorCode::ParseError,
                    "unexpected decision csv header at line " +
                        std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string id, strategy, score_str, label;
    if (!std::getline(ss, id, ',') || !std::getline(ss, strategy, ',') ||
        !std::getline(ss, score_str, ',') || !std::getline(ss, label)) {
      throw Error(ErrorCode::ParseError,
                  "bad decision row at line " + std::to_string(line_no));
    }
    DecisionRecord r;
    r.image_id = id;
    r.strategy = fusion_strategy_from_string(strategy);
    try {
      std::size_t used = 0;
      r.fused_score = std::stod(score_str, &used);
      if (used != score_str.size()) throw std::invalid_argument("score");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError,
                  "non-numeric fused score at line " + std::to_string(line_no));
    }
    if (!(r.fused_score >= 0.0 && r.fused_score <= 1.0)) {
      throw Error(ErrorCode::RangeError,
                  "fused score outside [0,1] at line " +
                      std::to_string(line_no));
    }
    r.label = pad_label_from_string(label);
    rows.push_back(std::move(r));
  }
  if (!header_seen) {
    throw Error(ErrorCode::ParseError, "empty decision csv: " + path.string());
  }
  return rows;
}

}  // namespace msa
