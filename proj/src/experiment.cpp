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

#include "msa/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "msa/error.hpp"
#include "msa/rng.hpp"
#include "msa/version.hpp"

namespace msa {

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Standard: return "standard";
    case Protocol::SoftLens1: return "soft_lens_1";
    case Protocol::SoftLens2: return "soft_lens_2";
    case Protocol::SoftLens3: return "soft_lens_3";
    case Protocol::StripeAblation: return "stripe_ablation";
    case Protocol::FusionCompare: return "fusion_compare";
    case Protocol::RingAnalysis: return "ring_analysis";
  }
  return "unknown";
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "standard") return Protocol::Standard;
  if (s == "soft_lens_1") return Protocol::SoftLens1;
  if (s == "soft_lens_2") return Protocol::SoftLens2;
  if (s == "soft_lens_3") return Protocol::SoftLens3;
  if (s == "stripe_ablation") return Protocol::StripeAblation;
  if (s == "fusion_compare") return Protocol::FusionCompare;
  if (s == "ring_analysis") return Protocol::RingAnalysis;
  throw Error(ErrorCode::ParseError, "unknown protocol: " + s);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["protocol"] = protocol_name(cfg.protocol);
  j["pipeline"] = {
      {"s1", cfg.pipeline.s1},
      {"s2", cfg.pipeline.s2},
      {"texture_width", cfg.pipeline.texture_width},
      {"texture_height", cfg.pipeline.texture_height},
      {"clahe", {{"clip_limit", cfg.pipeline.clahe.clip_limit},
                 {"tiles_x", cfg.pipeline.clahe.tiles_x},
                 {"tiles_y", cfg.pipeline.clahe.tiles_y}}},
      {"stripe_height", cfg.pipeline.stripe_height},
      {"stride", cfg.pipeline.stride},
      {"cells_x", cfg.pipeline.cells_x},
      {"cells_y", cfg.pipeline.cells_y},
      {"stripe_threshold", cfg.pipeline.stripe_threshold}};
  if (cfg.pipeline.sample_k) {
    j["pipeline"]["sample_k"] = *cfg.pipeline.sample_k;
  } else {
    j["pipeline"]["sample_k"] = nullptr;
  }
  j["train"] = {{"max_epochs", cfg.train.max_epochs},
                {"early_stop_patience", cfg.train.early_stop_patience},
                {"learning_rate", cfg.train.learning_rate},
                {"batch_size", cfg.train.batch_size},
                {"rms_decay", cfg.train.rms_decay},
                {"rms_epsilon", cfg.train.rms_epsilon}};
  j["fusion"] = fusion_strategy_name(cfg.fusion);
  j["tune_threshold_on_dev"] = cfg.tune_threshold_on_dev;
  j["base_seed"] = cfg.base_seed;
  j["repeat_count"] = cfg.repeat_count;
  j["ring_count"] = cfg.ring_count;
  j["ring_texture_height"] = cfg.ring_texture_height;
  j["ablation_heights"] = cfg.ablation_heights;
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("protocol")) {
      cfg.protocol = protocol_from_string(j["protocol"].get<std::string>());
    }
    if (j.contains("pipeline")) {
      const auto& p = j["pipeline"];
      cfg.pipeline.s1 = p.value("s1", cfg.pipeline.s1);
      cfg.pipeline.s2 = p.value("s2", cfg.pipeline.s2);
      cfg.pipeline.texture_width =
          p.value("texture_width", cfg.pipeline.texture_width);
      cfg.pipeline.texture_height =
          p.value("texture_height", cfg.pipeline.texture_height);
      if (p.contains("clahe")) {
        const auto& c = p["clahe"];
        cfg.pipeline.clahe.clip_limit =
            c.value("clip_limit", cfg.pipeline.clahe.clip_limit);
        cfg.pipeline.clahe.tiles_x = c.value("tiles_x", cfg.pipeline.clahe.tiles_x);
        cfg.pipeline.clahe.tiles_y = c.value("tiles_y", cfg.pipeline.clahe.tiles_y);
      }
      cfg.pipeline.stripe_height =
          p.value("stripe_height", cfg.pipeline.stripe_height);
      cfg.pipeline.stride = p.value("stride", cfg.pipeline.stride);
      cfg.pipeline.cells_x = p.value("cells_x", cfg.pipeline.cells_x);
      cfg.pipeline.cells_y = p.value("cells_y", cfg.pipeline.cells_y);
      cfg.pipeline.stripe_threshold =
          p.value("stripe_threshold", cfg.pipeline.stripe_threshold);
      if (p.contains("sample_k") && !p["sample_k"].is_null()) {
        cfg.pipeline.sample_k = p["sample_k"].get<int>();
      }
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
      cfg.train.early_stop_patience =
          t.value("early_stop_patience", cfg.train.early_stop_patience);
      cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      cfg.train.rms_decay = t.value("rms_decay", cfg.train.rms_decay);
      cfg.train.rms_epsilon = t.value("rms_epsilon", cfg.train.rms_epsilon);
    }
    if (j.contains("fusion")) {
      cfg.fusion = fusion_strategy_from_string(j["fusion"].get<std::string>());
    }
    cfg.tune_threshold_on_dev =
        j.value("tune_threshold_on_dev", cfg.tune_threshold_on_dev);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.repeat_count = j.value("repeat_count", cfg.repeat_count);
    cfg.ring_count = j.value("ring_count", cfg.ring_count);
    cfg.ring_texture_height =
        j.value("ring_texture_height", cfg.ring_texture_height);
    if (j.contains("ablation_heights")) {
      cfg.ablation_heights = j["ablation_heights"].get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("bad experiment config: ") + e.what());
  }
  return cfg;
}

EvalReport average_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no reports to average");
  }
  EvalReport avg;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    avg.ccr += r.ccr / n;
    avg.apcer += r.apcer / n;
    avg.bpcer += r.bpcer / n;
    avg.eer += r.eer / n;
    for (const auto& [key, value] : r.bpcer_at) avg.bpcer_at[key] += value / n;
  }
  avg.hter = (avg.apcer + avg.bpcer) / 2.0;
  avg.n_bona_fide = reports.front().n_bona_fide;
  avg.n_attack = reports.front().n_attack;
  avg.eer_threshold.reset();
  return avg;
}

namespace {

struct PreppedImage {
  std::string image_id;
  PadLabel truth = PadLabel::BonaFide;
  LensType lens_type = LensType::None;
  Split split = Split::Train;
  NormalizedTexture texture;
};

struct ImageFeatures {
  std::vector<int> offsets;
  std::vector<FeatureVector> stripe_features;
  FeatureVector resized_feature;  // for the resize baseline
};

std::vector<PreppedImage> preprocess_all(
    const std::vector<ManifestRecord>& records,
    const std::filesystem::path& base_dir, const PipelineConfig& cfg) {
  std::vector<PreppedImage> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const EyeInput eye = load_eye(r, base_dir, cfg.s1, cfg.s2, cfg.detector);
    out.push_back({r.image_id, r.truth, r.lens_type, r.split,
                   preprocess_texture(eye, cfg)});
  }
  return out;
}

std::vector<ImageFeatures> compute_features(
    const std::vector<PreppedImage>& images, const PipelineConfig& cfg,
    int stripe_height) {
  std::vector<ImageFeatures> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    ImageFeatures feats;
    const StripeSet set =
        extract_stripes(img.texture, stripe_height, cfg.stride, img.image_id);
    for (const auto& stripe : set.stripes) {
      feats.offsets.push_back(stripe.row_offset);
      feats.stripe_features.push_back(
          lbp_features(stripe, cfg.cells_x, cfg.cells_y));
    }
    const NormalizedTexture resized =
        resize_texture_rows(img.texture, stripe_height);
    MicroStripe whole;
    whole.row_offset = 0;
    whole.height = resized.height;
    whole.width = resized.width;
    whole.values = resized.values;
    feats.resized_feature = lbp_features(whole, cfg.cells_x, cfg.cells_y);
    out.push_back(std::move(feats));
  }
  return out;
}

// Records excluded from training for the given protocol (soft lenses only;
// filters change inclusion, never labels).
bool train_excluded(Protocol protocol, LensType lens) {
  return (protocol == Protocol::SoftLens2 || protocol == Protocol::SoftLens3) &&
         lens == LensType::Soft;
}

bool test_excluded(Protocol protocol, LensType lens) {
  return protocol == Protocol::SoftLens3 && lens == LensType::Soft;
}

void check_protocol(Protocol protocol,
                    const std::vector<ManifestRecord>& records) {
  long soft_total = 0, soft_test = 0;
  long train_attack = 0, train_bona_fide = 0, test_any = 0;
  for (const auto& r : records) {
    if (r.lens_type == LensType::Soft) {
      ++soft_total;
      if (r.split == Split::Test) ++soft_test;
    }
    if (r.split == Split::Train && !train_excluded(protocol, r.lens_type)) {
      (r.truth == PadLabel::Attack ? train_attack : train_bona_fide)++;
    }
    if (r.split == Split::Test && !test_excluded(protocol, r.lens_type)) {
      ++test_any;
    }
  }
  const bool soft_protocol = protocol == Protocol::SoftLens1 ||
                             protocol == Protocol::SoftLens2 ||
                             protocol == Protocol::SoftLens3;
  if (soft_protocol && soft_total == 0) {
    throw Error(ErrorCode::ProtocolError,
                "soft lens protocol needs soft-lens records in the manifest");
  }
  if (protocol == Protocol::SoftLens2 && soft_test == 0) {
    throw Error(ErrorCode::ProtocolError,
                "soft_lens_2 needs soft-lens records in the test split");
  }
  if (train_attack == 0 || train_bona_fide == 0 || test_any == 0) {
    throw Error(ErrorCode::ProtocolError,
                "manifest lacks a usable train/test composition");
  }
}

ClassifierModel train_repeat(const std::vector<PreppedImage>& images,
                             const std::vector<ImageFeatures>& features,
                             Protocol protocol, const TrainConfig& train_cfg,
                             const FeatureConfig& feature_config) {
  std::vector<FeatureVector> train_f, dev_f;
  std::vector<PadLabel> train_y, dev_y;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (train_excluded(protocol, images[i].lens_type)) continue;
    if (images[i].split == Split::Test) continue;
    auto& dst_f = images[i].split == Split::Train ? train_f : dev_f;
    auto& dst_y = images[i].split == Split::Train ? train_y : dev_y;
    for (const auto& fv : features[i].stripe_features) {
      dst_f.push_back(fv);
      dst_y.push_back(images[i].truth);
    }
  }
  return train(train_f, train_y, dev_f, dev_y, train_cfg, feature_config);
}

std::vector<ScoredSample> evaluate_repeat(
    const std::vector<PreppedImage>& images,
    const std::vector<ImageFeatures>& features, const ClassifierModel& model,
    Protocol protocol, FusionStrategy strategy, const PipelineConfig& cfg,
    std::uint64_t repeat_seed, Split split = Split::Test) {
  std::vector<ScoredSample> samples;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].split != split) continue;
    // dev follows the training-phase filter, test the evaluation filter
    if (split == Split::Test
            ? test_excluded(protocol, images[i].lens_type)
            : train_excluded(protocol, images[i].lens_type)) {
      continue;
    }

    PadDecision decision;
    if (strategy == FusionStrategy::ResizeBaseline) {
      const double p = predict(model, features[i].resized_feature);
      decision.strategy = FusionStrategy::ResizeBaseline;
      decision.fused_score = p;
      decision.votes_total = 1;
      decision.votes_attack = p > cfg.stripe_threshold ? 1 : 0;
      decision.label = p > cfg.stripe_threshold ? PadLabel::Attack
                                                : PadLabel::BonaFide;
    } else {
      std::vector<StripeScore> scores;
      const std::size_t n = features[i].stripe_features.size();
      std::vector<std::size_t> chosen(n);
      std::iota(chosen.begin(), chosen.end(), 0);
      if (cfg.sample_k) {
        if (*cfg.sample_k < 1 || *cfg.sample_k % 2 == 0 ||
            static_cast<std::size_t>(*cfg.sample_k) > n) {
          throw Error(ErrorCode::InvalidArgument,
                      "sample_k must be odd and within the stripe count");
        }
        Rng rng(mix_seed(repeat_seed, static_cast<std::uint64_t>(i)));
        for (int k = 0; k < *cfg.sample_k; ++k) {
          const std::size_t j = k + rng.below(n - k);
          std::swap(chosen[k], chosen[j]);
        }
        chosen.resize(static_cast<std::size_t>(*cfg.sample_k));
        std::sort(chosen.begin(), chosen.end());
      }
      for (std::size_t j : chosen) {
        scores.push_back(StripeScore{
            predict(model, features[i].stripe_features[j]),
            features[i].offsets[j]});
      }
      decision = strategy == FusionStrategy::MajorityVote
                     ? majority_vote(scores, cfg.stripe_threshold)
                     : mean_score(scores, cfg.stripe_threshold);
    }
    samples.push_back({images[i].image_id, images[i].truth,
                       decision.fused_score, decision.label});
  }
  return samples;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::vector<ManifestRecord>& manifest,
                                const std::filesystem::path& base_dir,
                                const std::filesystem::path& out_dir) {
  if (cfg.repeat_count < 1) {
    throw Error(ErrorCode::InvalidArgument, "repeat_count must be >= 1");
  }
  if (cfg.tune_threshold_on_dev &&
      (cfg.fusion == FusionStrategy::MajorityVote ||
       cfg.protocol == Protocol::FusionCompare ||
       cfg.protocol == Protocol::RingAnalysis)) {
    throw Error(ErrorCode::InvalidArgument,
                "dev-threshold tuning is only available for the score-level "
                "baseline strategies (mean_score, resize_baseline)");
  }
  const std::vector<ManifestRecord> records = ensure_dev_split(manifest);
  check_protocol(cfg.protocol, records);

  const bool write_outputs = !out_dir.empty();
  if (write_outputs) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "models", ec);
    if (ec) {
      throw Error(ErrorCode::IoError,
                  "cannot create output directory " + out_dir.string());
    }
  }

  ExperimentResult result;
  result.config = cfg;

  if (cfg.protocol == Protocol::RingAnalysis) {
    RingAnalysisConfig ring_cfg;
    ring_cfg.n_rings = cfg.ring_count;
    ring_cfg.ring_texture_height = cfg.ring_texture_height;
    ring_cfg.texture_width = cfg.pipeline.texture_width;
    ring_cfg.s1 = cfg.pipeline.s1;
    ring_cfg.s2 = cfg.pipeline.s2;
    ring_cfg.cells_x = cfg.pipeline.cells_x;
    ring_cfg.cells_y = cfg.pipeline.cells_y;
    ring_cfg.detector = cfg.pipeline.detector;
    ring_cfg.train = cfg.train;
    for (int rep = 0; rep < cfg.repeat_count; ++rep) {
      ring_cfg.train.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
      result.ring_profiles.push_back(
          per_ring_eer(records, base_dir, ring_cfg));
    }
  } else {
    const std::vector<PreppedImage> images =
        preprocess_all(records, base_dir, cfg.pipeline);

    std::vector<int> heights = {cfg.pipeline.stripe_height};
    if (cfg.protocol == Protocol::StripeAblation) heights = cfg.ablation_heights;

    for (int height : heights) {
      const std::vector<ImageFeatures> features =
          compute_features(images, cfg.pipeline, height);
      const FeatureConfig feature_config{cfg.pipeline.cells_x,
                                         cfg.pipeline.cells_y,
                                         cfg.pipeline.texture_width, height};

      std::vector<FusionStrategy> strategies = {cfg.fusion};
      if (cfg.protocol == Protocol::FusionCompare) {
        strategies = {FusionStrategy::MajorityVote, FusionStrategy::MeanScore,
                      FusionStrategy::ResizeBaseline};
      }

      std::map<std::string, std::vector<EvalReport>> per_repeat;
      std::map<std::string, std::vector<double>> tuned_thresholds;
      for (int rep = 0; rep < cfg.repeat_count; ++rep) {
        TrainConfig train_cfg = cfg.train;
        train_cfg.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
        const ClassifierModel model = train_repeat(
            images, features, cfg.protocol, train_cfg, feature_config);
        if (write_outputs) {
          std::string stem = protocol_name(cfg.protocol);
          if (cfg.protocol == Protocol::StripeAblation) {
            stem += "_h" + std::to_string(height);
          }
          save_model(model, out_dir / "models" /
                                (stem + "_rep" + std::to_string(rep) + ".json"));
        }
        for (FusionStrategy strategy : strategies) {
          auto samples =
              evaluate_repeat(images, features, model, cfg.protocol, strategy,
                              cfg.pipeline, train_cfg.seed);
          std::string key;
          if (cfg.protocol == Protocol::FusionCompare) {
            key = fusion_strategy_name(strategy);
          } else if (cfg.protocol == Protocol::StripeAblation) {
            key = "h=" + std::to_string(height);
          } else {
            key = protocol_name(cfg.protocol);
          }
          if (cfg.tune_threshold_on_dev) {
            const auto dev_samples =
                evaluate_repeat(images, features, model, cfg.protocol,
                                strategy, cfg.pipeline, train_cfg.seed,
                                Split::Dev);
            const double tuned = eer(dev_samples).threshold;
            samples = with_decisions_at(std::move(samples), tuned);
            tuned_thresholds[key].push_back(tuned);
          }
          per_repeat[key].push_back(evaluate(samples));
        }
      }
      for (auto& [key, reports] : per_repeat) {
        result.variants[key] = VariantResult{average_reports(reports),
                                             std::move(reports),
                                             std::move(tuned_thresholds[key])};
      }
    }
  }

  result.provenance["format_version"] = 1;
  result.provenance["toolkit_version"] = kToolkitVersion;
  result.provenance["config"] = experiment_config_to_json(cfg);
  result.provenance["base_dir"] = base_dir.string();
  std::map<std::string, long> split_counts, lens_counts;
  for (const auto& r : records) {
    ++split_counts[split_name(r.split)];
    ++lens_counts[lens_type_name(r.lens_type)];
  }
  result.provenance["record_counts"] = {{"by_split", split_counts},
                                        {"by_lens_type", lens_counts}};

  if (write_outputs) {
    std::ofstream out(out_dir / "report.json", std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError,
                  "cannot write " + (out_dir / "report.json").string());
    }
    out << experiment_to_json(result).dump(2) << "\n";
    if (!out) {
      throw Error(ErrorCode::IoError,
                  "write failure on " + (out_dir / "report.json").string());
    }
  }
  return result;
}

nlohmann::json experiment_to_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["protocol"] = protocol_name(result.config.protocol);
  j["provenance"] = result.provenance;
  nlohmann::json variants = nlohmann::json::object();
  for (const auto& [key, variant] : result.variants) {
    nlohmann::json v;
    v["averaged"] = report_to_json(variant.averaged);
    v["per_repeat"] = nlohmann::json::array();
    for (const auto& r : variant.per_repeat) {
      v["per_repeat"].push_back(report_to_json(r));
    }
    if (!variant.decision_thresholds.empty()) {
      v["decision_thresholds"] = variant.decision_thresholds;
    }
    variants[key] = std::move(v);
  }
  j["variants"] = std::move(variants);
  if (!result.ring_profiles.empty()) {
    nlohmann::json profiles = nlohmann::json::array();
    for (const auto& p : result.ring_profiles) {
      profiles.push_back(
          {{"eers", p.eers}, {"normalized", p.normalized}});
    }
    j["ring_profiles"] = std::move(profiles);
  }
  return j;
}

}  // namespace msa
