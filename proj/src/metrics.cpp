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

#include "msa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msa/error.hpp"

namespace msa {

namespace {

void require_both_classes(const std::vector<ScoredSample>& samples) {
  long attacks = 0, bona_fides = 0;
  for (const auto& s : samples) {
    (s.truth == PadLabel::Attack ? attacks : bona_fides)++;
  }
  if (attacks == 0 || bona_fides == 0) {
    throw Error(ErrorCode::MissingClass,
                "metrics need at least one attack and one bona fide sample");
  }
}

}  // namespace

DecisionRates rates_at_decisions(const std::vector<ScoredSample>& samples) {
  require_both_classes(samples);
  long attacks = 0, bona_fides = 0;
  long attacks_missed = 0, bona_fides_missed = 0, correct = 0;
  for (const auto& s : samples) {
    if (!s.decision) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample lacks a decision: " + s.image_id);
    }
    if (s.truth == PadLabel::Attack) {
      ++attacks;
      if (*s.decision == PadLabel::BonaFide) ++attacks_missed;
    } else {
      ++bona_fides;
      if (*s.decision == PadLabel::Attack) ++bona_fides_missed;
    }
    if (*s.decision == s.truth) ++correct;
  }
  DecisionRates r;
  r.apcer = 100.0 * attacks_missed / attacks;
  r.bpcer = 100.0 * bona_fides_missed / bona_fides;
  r.ccr = 100.0 * correct / (attacks + bona_fides);
  r.hter = (r.apcer + r.bpcer) / 2.0;
  return r;
}

std::vector<RocPoint> roc_points(const std::vector<ScoredSample>& samples) {
  require_both_classes(samples);
  std::vector<double> attack_scores, bona_fide_scores;
  for (const auto& s : samples) {
    (s.truth == PadLabel::Attack ? attack_scores : bona_fide_scores)
        .push_back(s.score);
  }
  std::sort(attack_scores.begin(), attack_scores.end());
  std::sort(bona_fide_scores.begin(), bona_fide_scores.end());

  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  for (const auto& s : samples) thresholds.push_back(s.score);
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double n_attacks = static_cast<double>(attack_scores.size());
  const double n_bona_fides = static_cast<double>(bona_fide_scores.size());
  std::vector<RocPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    // Attack iff score > t, so attacks with score <= t are missed and bona
    // fides with score > t are rejected.
    const auto attacks_missed = static_cast<double>(
        std::upper_bound(attack_scores.begin(), attack_scores.end(), t) -
        attack_scores.begin());
    const auto bona_fides_kept = static_cast<double>(
        std::upper_bound(bona_fide_scores.begin(), bona_fide_scores.end(), t) -
        bona_fide_scores.begin());
    RocPoint p;
    p.threshold = t;
    p.apcer = 100.0 * attacks_missed / n_attacks;
    p.bpcer = 100.0 * (n_bona_fides - bona_fides_kept) / n_bona_fides;
    points.push_back(p);
  }
  return points;
}

EerResult eer(const std::vector<ScoredSample>& samples) {
  const auto points = roc_points(samples);
  // apcer - bpcer runs from -100 at -inf to +100 at +inf; find the flip.
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double diff = points[i].apcer - points[i].bpcer;
    if (diff == 0.0) {
      return EerResult{points[i].apcer, points[i].threshold};
    }
    if (diff > 0.0) {
      const auto& lo = points[i - 1];  // diff < 0 here, i >= 1 by the -inf point
      const auto& hi = points[i];
      const double gap_lo = lo.bpcer - lo.apcer;
      const double gap_hi = hi.apcer - hi.bpcer;
      const double lambda = gap_lo / (gap_lo + gap_hi);
      EerResult r;
      r.eer = lo.apcer + lambda * (hi.apcer - lo.apcer);
      if (std::isfinite(lo.threshold) && std::isfinite(hi.threshold)) {
        r.threshold = lo.threshold + lambda * (hi.threshold - lo.threshold);
      } else {
        r.threshold =
            std::isfinite(lo.threshold) ? lo.threshold : hi.threshold;
      }
      return r;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "threshold sweep had no crossing");
}

double bpcer_at_apcer(const std::vector<ScoredSample>& samples,
                      double target_apcer) {
  if (!(target_apcer >= 0.0 && target_apcer <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "target apcer must be in [0,100]");
  }
  const auto points = roc_points(samples);
  // apcer is non-decreasing in the threshold; keep the last admissible point.
  double best_bpcer = points.front().bpcer;
  for (const auto& p : points) {
    if (p.apcer <= target_apcer) best_bpcer = p.bpcer;
  }
  return best_bpcer;
}

std::vector<ScoredSample> with_decisions_at(std::vector<ScoredSample> samples,
                                            double threshold) {
  for (auto& s : samples) {
    s.decision = s.score > threshold ? PadLabel::Attack : PadLabel::BonaFide;
  }
  return samples;
}

EvalReport evaluate(const std::vector<ScoredSample>& samples) {
  EvalReport report;
  const DecisionRates rates = rates_at_decisions(samples);
  report.ccr = rates.ccr;
  report.apcer = rates.apcer;
  report.bpcer = rates.bpcer;
  report.hter = rates.hter;
  const EerResult e = eer(samples);
  report.eer = e.eer;
  report.eer_threshold = e.threshold;
  report.bpcer_at["0.1"] = bpcer_at_apcer(samples, 0.1);
  report.bpcer_at["1"] = bpcer_at_apcer(samples, 1.0);
  for (const auto& s : samples) {
    (s.truth == PadLabel::Attack ? report.n_attack : report.n_bona_fide)++;
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["ccr"] = report.ccr;
  j["apcer"] = report.apcer;
  j["bpcer"] = report.bpcer;
  j["hter"] = report.hter;
  j["eer"] = report.eer;
  if (report.eer_threshold) {
    j["eer_threshold"] = *report.eer_threshold;
  } else {
    j["eer_threshold"] = nullptr;
  }
  j["bpcer_at_apcer"] = report.bpcer_at;
  j["counts"] = {{"bona_fide", report.n_bona_fide},
                 {"attack", report.n_attack}};
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.ccr = j.at("ccr").get<double>();
    r.apcer = j.at("apcer").get<double>();
    r.bpcer = j.at("bpcer").get<double>();
    r.hter = j.at("hter").get<double>();
    r.eer = j.at("eer").get<double>();
    if (!j.at("eer_threshold").is_null()) {
      r.eer_threshold = j.at("eer_threshold").get<double>();
    }
    r.bpcer_at = j.at("bpcer_at_apcer").get<std::map<std::string, double>>();
    r.n_bona_fide = j.at("counts").at("bona_fide").get<long>();
    r.n_attack = j.at("counts").at("attack").get<long>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("bad report json: ") + e.what());
  }
  return r;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  const auto row = [&](const char* name, double value) {
    out << name;
    for (std::size_t i = std::string(name).size(); i < 18; ++i) out << ' ';
    out << value << "\n";
  };
  row("CCR (%)", report.ccr);
  row("APCER (%)", report.apcer);
  row("BPCER (%)", report.bpcer);
  row("HTER (%)", report.hter);
  row("EER (%)", report.eer);
  if (report.eer_threshold) row("EER threshold", *report.eer_threshold);
  for (const auto& [target, value] : report.bpcer_at) {
    row(("BPCER@APCER=" + target + "%").c_str(), value);
  }
  out << "bona fide samples  " << report.n_bona_fide << "\n";
  out << "attack samples     " << report.n_attack << "\n";
  return out.str();
}

}  // namespace msa
