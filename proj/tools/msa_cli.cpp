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

// Command-line front end for the iris PAD toolkit. Subcommands cover the
// whole pipeline: synth, segment, normalize, stripes, train, score, fuse,
// eval, rings, experiment.
//
// exit codes: 0 success, 1 runtime failure (one machine-parsable
// `error: <code>: <message>` line on stderr), 2 usage error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "msa/classifier.hpp"
#include "msa/error.hpp"
#include "msa/experiment.hpp"
#include "msa/fusion.hpp"
#include "msa/manifest.hpp"
#include "msa/metrics.hpp"
#include "msa/normalization.hpp"
#include "msa/pipeline.hpp"
#include "msa/ring_analysis.hpp"
#include "msa/rng.hpp"
#include "msa/segmentation.hpp"
#include "msa/stripes.hpp"
#include "msa/synth.hpp"
#include "msa/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw msa::Error(msa::ErrorCode::IoError, "cannot open " + path);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw msa::Error(msa::ErrorCode::ParseError,
                     "bad json in " + path + ": " + e.what());
  }
}

// --config JSON merged under any explicitly passed flags
msa::ExperimentConfig resolve_experiment_config(const std::string& config_path) {
  msa::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = msa::experiment_config_from_json(load_json_file(config_path));
  }
  return cfg;
}

struct PipelineFlags {
  double s1 = 0.4, s2 = 0.4;
  int width = 512, height = 64;
  double clahe_clip = 2.0;
  int clahe_tiles_x = 8, clahe_tiles_y = 8;
  int stripe_height = 32, stride = 4;
  int cells_x = 16, cells_y = 2;
  double threshold = 0.5;
  int sample_k = 0;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--s1", f.s1, "inner boundary extension ratio");
  cmd->add_option("--s2", f.s2, "outer boundary extension ratio");
  cmd->add_option("--texture-width", f.width, "normalized texture width");
  cmd->add_option("--texture-height", f.height, "normalized texture height");
  cmd->add_option("--clahe-clip", f.clahe_clip, "CLAHE clip limit");
  cmd->add_option("--clahe-tiles-x", f.clahe_tiles_x, "CLAHE tile columns");
  cmd->add_option("--clahe-tiles-y", f.clahe_tiles_y, "CLAHE tile rows");
  cmd->add_option("--stripe-height", f.stripe_height, "micro-stripe height");
  cmd->add_option("--stride", f.stride, "micro-stripe stride");
  cmd->add_option("--cells-x", f.cells_x, "LBP cell columns");
  cmd->add_option("--cells-y", f.cells_y, "LBP cell rows");
  cmd->add_option("--threshold", f.threshold, "per-stripe decision threshold");
  cmd->add_option("--sample-k", f.sample_k,
                  "evaluate on a random odd stripe subset of this size");
}

void apply_pipeline_flags(const CLI::App* cmd, const PipelineFlags& f,
                          msa::PipelineConfig& cfg) {
  if (cmd->count("--s1")) cfg.s1 = f.s1;
  if (cmd->count("--s2")) cfg.s2 = f.s2;
  if (cmd->count("--texture-width")) cfg.texture_width = f.width;
  if (cmd->count("--texture-height")) cfg.texture_height = f.height;
  if (cmd->count("--clahe-clip")) cfg.clahe.clip_limit = f.clahe_clip;
  if (cmd->count("--clahe-tiles-x")) cfg.clahe.tiles_x = f.clahe_tiles_x;
  if (cmd->count("--clahe-tiles-y")) cfg.clahe.tiles_y = f.clahe_tiles_y;
  if (cmd->count("--stripe-height")) cfg.stripe_height = f.stripe_height;
  if (cmd->count("--stride")) cfg.stride = f.stride;
  if (cmd->count("--cells-x")) cfg.cells_x = f.cells_x;
  if (cmd->count("--cells-y")) cfg.cells_y = f.cells_y;
  if (cmd->count("--threshold")) cfg.stripe_threshold = f.threshold;
  if (cmd->count("--sample-k")) cfg.sample_k = f.sample_k;
}

msa::SynthParams synth_params_from_json(const json& j) {
  msa::SynthParams p;
  p.image_size = j.value("image_size", p.image_size);
  p.pupil_r_min = j.value("pupil_r_min", p.pupil_r_min);
  p.pupil_r_max = j.value("pupil_r_max", p.pupil_r_max);
  p.iris_r_min = j.value("iris_r_min", p.iris_r_min);
  p.iris_r_max = j.value("iris_r_max", p.iris_r_max);
  p.center_jitter = j.value("center_jitter", p.center_jitter);
  p.noise_modes = j.value("noise_modes", p.noise_modes);
  p.noise_k_min = j.value("noise_k_min", p.noise_k_min);
  p.noise_k_max = j.value("noise_k_max", p.noise_k_max);
  p.noise_amplitude = j.value("noise_amplitude", p.noise_amplitude);
  p.sclera_noise_ratio = j.value("sclera_noise_ratio", p.sclera_noise_ratio);
  if (j.contains("artifact")) {
    p.artifact = msa::artifact_type_from_string(j["artifact"].get<std::string>());
  }
  p.artifact_offset = j.value("artifact_offset", p.artifact_offset);
  p.artifact_half_width = j.value("artifact_half_width", p.artifact_half_width);
  p.artifact_contrast = j.value("artifact_contrast", p.artifact_contrast);
  p.dot_spacing = j.value("dot_spacing", p.dot_spacing);
  p.dot_radius = j.value("dot_radius", p.dot_radius);
  p.n_bona_fide = j.value("n_bona_fide", p.n_bona_fide);
  p.n_attack = j.value("n_attack", p.n_attack);
  p.n_soft = j.value("n_soft", p.n_soft);
  p.soft_contrast_ratio = j.value("soft_contrast_ratio", p.soft_contrast_ratio);
  p.seed = j.value("seed", p.seed);
  return p;
}

std::vector<msa::ManifestRecord> records_for_split(
    const std::vector<msa::ManifestRecord>& records, const std::string& split) {
  if (split == "all") return records;
  const msa::Split wanted = msa::split_from_string(split);
  std::vector<msa::ManifestRecord> out;
  for (const auto& r : records) {
    if (r.split == wanted) out.push_back(r);
  }
  return out;
}

msa::Segmentation segmentation_from_ref_string(const std::string& ref) {
  return msa::resolve_segmentation_ref(ref, fs::current_path());
}

// ---------------------------------------------------------------------------
// subcommand bodies

int run_synth(const CLI::App* cmd, const std::string& out_dir,
              const std::string& config_path, const msa::SynthParams& flags) {
  msa::SynthParams params;
  if (!config_path.empty()) {
    params = synth_params_from_json(load_json_file(config_path));
  }
  if (cmd->count("--bona-fide")) params.n_bona_fide = flags.n_bona_fide;
  if (cmd->count("--attack")) params.n_attack = flags.n_attack;
  if (cmd->count("--soft")) params.n_soft = flags.n_soft;
  if (cmd->count("--artifact")) params.artifact = flags.artifact;
  if (cmd->count("--contrast")) params.artifact_contrast = flags.artifact_contrast;
  if (cmd->count("--image-size")) params.image_size = flags.image_size;
  if (cmd->count("--seed")) params.seed = flags.seed;

  const msa::SynthOutput out = msa::synth_generate(params, out_dir);
  std::cout << "wrote " << out.records.size() << " images under " << out_dir
            << "\nmanifest: " << out.manifest_path.string()
            << "\nsegmentation: " << out.segmentation_path.string() << "\n";
  return 0;
}

int run_segment(const std::string& image_path, const std::string& manifest_path,
                const std::string& images_root, const std::string& out_path,
                const std::string& out_manifest,
                const msa::DetectorConfig& detector) {
  if (image_path.empty() == manifest_path.empty()) {
    throw msa::Error(msa::ErrorCode::InvalidArgument,
                     "pass exactly one of --image or --manifest");
  }
  if (!image_path.empty()) {
    const msa::Segmentation seg =
        msa::detect_circles(msa::load_image(image_path), detector);
    if (out_path.empty()) {
      std::cout.precision(12);
      msa::append_segmentation_line(std::cout, seg);
    } else {
      std::ofstream out(out_path, std::ios::trunc);
      if (!out) {
        throw msa::Error(msa::ErrorCode::IoError, "cannot write " + out_path);
      }
      out << "# format_version: 1\n";
      out.precision(12);
      msa::append_segmentation_line(out, seg);
    }
    return 0;
  }

  auto records = msa::load_manifest(manifest_path);
  const fs::path root =
      images_root.empty() ? fs::path(manifest_path).parent_path()
                          : fs::path(images_root);
  if (out_path.empty()) {
    throw msa::Error(msa::ErrorCode::InvalidArgument,
                     "--out is required with --manifest");
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    throw msa::Error(msa::ErrorCode::IoError, "cannot write " + out_path);
  }
  out << "# format_version: 1\n";
  out.precision(12);
  int line = 0;
  for (auto& r : records) {
    fs::path img_path(r.path);
    if (img_path.is_relative()) img_path = root / img_path;
    const msa::Segmentation seg =
        msa::detect_circles(msa::load_image(img_path), detector);
    msa::append_segmentation_line(out, seg);
    r.segmentation_ref =
        fs::path(out_path).filename().string() + ":" + std::to_string(line++);
  }
  std::cout << "segmented " << line << " images into " << out_path << "\n";
  if (!out_manifest.empty()) {
    msa::save_manifest(records, out_manifest);
    std::cout << "manifest with references: " << out_manifest << "\n";
  }
  return 0;
}

int run_normalize(const CLI::App* cmd, const std::string& image_path,
                  const std::string& seg_ref, const std::string& config_path,
                  const PipelineFlags& flags, bool no_clahe,
                  const std::string& out_path, const std::string& out_pgm) {
  msa::PipelineConfig cfg = resolve_experiment_config(config_path).pipeline;
  apply_pipeline_flags(cmd, flags, cfg);
  const msa::GrayImage img = msa::load_image(image_path);
  const msa::Segmentation seg =
      seg_ref.empty() ? msa::detect_circles(img, cfg.detector)
                      : segmentation_from_ref_string(seg_ref);
  const msa::ExtendedBoundaries b = msa::extend_boundaries(seg, cfg.s1, cfg.s2);
  msa::NormalizedTexture tex =
      msa::rubber_sheet(img, b, cfg.texture_width, cfg.texture_height);
  if (!no_clahe) {
    tex = msa::clahe(tex, cfg.clahe);
  }
  if (!out_path.empty()) msa::save_texture(tex, out_path);
  if (!out_pgm.empty()) msa::save_texture_pgm(tex, out_pgm);
  if (out_path.empty() && out_pgm.empty()) {
    throw msa::Error(msa::ErrorCode::InvalidArgument,
                     "pass --out and/or --out-pgm");
  }
  return 0;
}

int run_stripes(const std::string& texture_path, int height, int stride,
                const std::string& out_dir) {
  const msa::NormalizedTexture tex = msa::load_texture(texture_path);
  const msa::StripeSet set = msa::extract_stripes(tex, height, stride);
  std::cout << set.stripes.size() << " stripes (height " << height
            << ", stride " << stride << ")\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (const auto& stripe : set.stripes) {
      msa::NormalizedTexture one;
      one.width = stripe.width;
      one.height = stripe.height;
      one.values = stripe.values;
      msa::save_texture(one, fs::path(out_dir) /
                                 ("stripe_" + std::to_string(stripe.row_offset) +
                                  ".bin"));
    }
  }
  return 0;
}

struct PreppedEye {
  msa::ManifestRecord record;
  msa::NormalizedTexture texture;
};

std::vector<PreppedEye> preprocess_manifest(
    const std::vector<msa::ManifestRecord>& records, const fs::path& root,
    const msa::PipelineConfig& cfg) {
  std::vector<PreppedEye> out;
  for (const auto& r : records) {
    const msa::EyeInput eye =
        msa::load_eye(r, root, cfg.s1, cfg.s2, cfg.detector);
    out.push_back({r, msa::preprocess_texture(eye, cfg)});
  }
  return out;
}

int run_train(const CLI::App* cmd, const std::string& manifest_path,
              const std::string& images_root, const std::string& out_path,
              const std::string& config_path, const PipelineFlags& flags,
              const msa::TrainConfig& train_flags) {
  const msa::ExperimentConfig base = resolve_experiment_config(config_path);
  msa::PipelineConfig cfg = base.pipeline;
  apply_pipeline_flags(cmd, flags, cfg);
  msa::TrainConfig train_cfg = base.train;
  if (cmd->count("--seed")) train_cfg.seed = train_flags.seed;
  if (cmd->count("--max-epochs")) train_cfg.max_epochs = train_flags.max_epochs;
  if (cmd->count("--patience")) {
    train_cfg.early_stop_patience = train_flags.early_stop_patience;
  }
  if (cmd->count("--learning-rate")) {
    train_cfg.learning_rate = train_flags.learning_rate;
  }
  if (cmd->count("--batch-size")) train_cfg.batch_size = train_flags.batch_size;

  const auto all_records =
      msa::ensure_dev_split(msa::load_manifest(manifest_path));
  std::vector<msa::ManifestRecord> records;
  for (const auto& r : all_records) {
    if (r.split != msa::Split::Test) records.push_back(r);
  }
  const fs::path root = images_root.empty()
                            ? fs::path(manifest_path).parent_path()
                            : fs::path(images_root);

  std::vector<msa::FeatureVector> train_f, dev_f;
  std::vector<msa::PadLabel> train_y, dev_y;
  for (const auto& eye : preprocess_manifest(records, root, cfg)) {
    const msa::StripeSet set = msa::extract_stripes(
        eye.texture, cfg.stripe_height, cfg.stride, eye.record.image_id);
    for (const auto& stripe : set.stripes) {
      auto& dst_f = eye.record.split == msa::Split::Train ? train_f : dev_f;
      auto& dst_y = eye.record.split == msa::Split::Train ? train_y : dev_y;
      dst_f.push_back(msa::lbp_features(stripe, cfg.cells_x, cfg.cells_y));
      dst_y.push_back(eye.record.truth);
    }
  }
  const msa::FeatureConfig feature_config{cfg.cells_x, cfg.cells_y,
                                          cfg.texture_width, cfg.stripe_height};
  const msa::ClassifierModel model =
      msa::train(train_f, train_y, dev_f, dev_y, train_cfg, feature_config);
  msa::save_model(model, out_path);
  std::cout << "trained on " << train_f.size() << " stripes ("
            << model.training_meta.epochs_run
            << " epochs, best dev loss " << model.training_meta.best_dev_loss
            << "); model: " << out_path << "\n";
  return 0;
}

int run_score(const CLI::App* cmd, const std::string& model_path,
              const std::string& manifest_path, const std::string& images_root,
              const std::string& out_path, const std::string& split,
              const std::string& config_path, const PipelineFlags& flags) {
  msa::PipelineConfig cfg = resolve_experiment_config(config_path).pipeline;
  apply_pipeline_flags(cmd, flags, cfg);
  const msa::ClassifierModel model = msa::load_model(model_path);
  cfg.stripe_height = model.feature_config.stripe_height;
  cfg.texture_width = model.feature_config.stripe_width;
  cfg.cells_x = model.feature_config.cells_x;
  cfg.cells_y = model.feature_config.cells_y;

  const auto records = records_for_split(
      msa::ensure_dev_split(msa::load_manifest(manifest_path)), split);
  if (records.empty()) {
    throw msa::Error(msa::ErrorCode::InvalidArgument,
                     "no manifest records in split " + split);
  }
  const fs::path root = images_root.empty()
                            ? fs::path(manifest_path).parent_path()
                            : fs::path(images_root);

  std::vector<std::pair<std::string, msa::StripeScore>> rows;
  for (const auto& eye : preprocess_manifest(records, root, cfg)) {
    const msa::StripeSet set = msa::extract_stripes(
        eye.texture, cfg.stripe_height, cfg.stride, eye.record.image_id);
    for (const auto& stripe : set.stripes) {
      rows.push_back({eye.record.image_id, msa::score_stripe(model, stripe)});
    }
  }
  msa::export_scores(rows, out_path);
  std::cout << "wrote " << rows.size() << " stripe scores to " << out_path
            << "\n";
  return 0;
}

int run_fuse(const std::string& scores_path, const std::string& out_path,
             const std::string& strategy_name, double threshold, int sample_k,
             std::uint64_t seed) {
  const msa::FusionStrategy strategy =
      msa::fusion_strategy_from_string(strategy_name);
  if (strategy == msa::FusionStrategy::ResizeBaseline) {
    throw msa::Error(msa::ErrorCode::InvalidArgument,
                     "resize_baseline needs textures; use `experiment "
                     "--protocol fusion_compare`");
  }
  const auto scores = msa::import_scores(scores_path);

  std::map<std::string, std::vector<msa::StripeScore>> by_image;
  for (const auto& [key, score] : scores) by_image[key.first].push_back(score);

  std::vector<msa::DecisionRecord> decisions;
  std::size_t image_index = 0;
  for (auto& [image_id, stripe_scores] : by_image) {
    std::sort(stripe_scores.begin(), stripe_scores.end(),
              [](const msa::StripeScore& a, const msa::StripeScore& b) {
                return a.stripe_offset < b.stripe_offset;
              });
    std::vector<msa::StripeScore> chosen = stripe_scores;
    if (sample_k > 0 && static_cast<std::size_t>(sample_k) != chosen.size()) {
      if (sample_k % 2 == 0 ||
          static_cast<std::size_t>(sample_k) > chosen.size()) {
        throw msa::Error(msa::ErrorCode::InvalidArgument,
                         "--sample-k must be odd and within the stripe count");
      }
      msa::Rng rng(msa::mix_seed(seed, image_index));
      std::vector<std::size_t> indices(chosen.size());
      for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
      for (int k = 0; k < sample_k; ++k) {
        const std::size_t j = k + rng.below(indices.size() - k);
        std::swap(indices[k], indices[j]);
      }
      indices.resize(sample_k);
      std::sort(indices.begin(), indices.end());
      std::vector<msa::StripeScore> subset;
      for (std::size_t i : indices) subset.push_back(chosen[i]);
      chosen = std::move(subset);
    }
    const msa::PadDecision d = strategy == msa::FusionStrategy::MajorityVote
                                   ? msa::majority_vote(chosen, threshold)
                                   : msa::mean_score(chosen, threshold);
    decisions.push_back({image_id, strategy, d.fused_score, d.label});
    ++image_index;
  }
  msa::export_decisions(decisions, out_path);
  std::cout << "fused " << decisions.size() << " images into " << out_path
            << "\n";
  return 0;
}

int run_eval(const std::string& decisions_path, const std::string& manifest_path,
             const std::string& split, const std::string& out_path,
             bool print_table, const std::string& roc_path) {
  const auto decisions = msa::import_decisions(decisions_path);
  const auto records = records_for_split(
      msa::load_manifest(manifest_path), split);
  std::map<std::string, msa::PadLabel> truth;
  for (const auto& r : records) truth[r.image_id] = r.truth;

  std::vector<msa::ScoredSample> samples;
  for (const auto& d : decisions) {
    const auto it = truth.find(d.image_id);
    if (it == truth.end()) continue;  // decision outside the requested split
    samples.push_back({d.image_id, it->second, d.fused_score, d.label});
  }
  if (samples.empty()) {
    throw msa::Error(msa::ErrorCode::InvalidArgument,
                     "no decisions match manifest records in split " + split);
  }
  const msa::EvalReport report = msa::evaluate(samples);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
      throw msa::Error(msa::ErrorCode::IoError, "cannot write " + out_path);
    }
    out << msa::report_to_json(report).dump(2) << "\n";
  }
  if (print_table || out_path.empty()) {
    std::cout << msa::report_table(report);
  }
  if (!roc_path.empty()) {
    std::ofstream roc(roc_path, std::ios::trunc);
    if (!roc) {
      throw msa::Error(msa::ErrorCode::IoError, "cannot write " + roc_path);
    }
    roc << "# format_version: 1\nthreshold,apcer,bpcer\n";
    roc.precision(17);
    for (const auto& p : msa::roc_points(samples)) {
      roc << p.threshold << "," << p.apcer << "," << p.bpcer << "\n";
    }
  }
  return 0;
}

int run_rings(const CLI::App* cmd, const std::string& manifest_path,
              const std::string& images_root, int n_rings, int ring_height,
              std::uint64_t seed, const std::string& out_csv,
              const std::string& out_json, const std::string& config_path,
              const PipelineFlags& flags) {
  const msa::ExperimentConfig base = resolve_experiment_config(config_path);
  msa::RingAnalysisConfig cfg;
  cfg.n_rings = base.ring_count;
  cfg.ring_texture_height = base.ring_texture_height;
  cfg.texture_width = base.pipeline.texture_width;
  cfg.s1 = base.pipeline.s1;
  cfg.s2 = base.pipeline.s2;
  cfg.cells_x = base.pipeline.cells_x;
  cfg.cells_y = base.pipeline.cells_y;
  cfg.detector = base.pipeline.detector;
  cfg.train = base.train;
  if (cmd->count("--n")) cfg.n_rings = n_rings;
  if (cmd->count("--ring-height")) cfg.ring_texture_height = ring_height;
  if (cmd->count("--s1")) cfg.s1 = flags.s1;
  if (cmd->count("--s2")) cfg.s2 = flags.s2;
  if (cmd->count("--texture-width")) cfg.texture_width = flags.width;
  if (cmd->count("--cells-x")) cfg.cells_x = flags.cells_x;
  if (cmd->count("--cells-y")) cfg.cells_y = flags.cells_y;
  if (cmd->count("--seed")) cfg.train.seed = seed;

  const auto records =
      msa::ensure_dev_split(msa::load_manifest(manifest_path));
  const fs::path root = images_root.empty()
                            ? fs::path(manifest_path).parent_path()
                            : fs::path(images_root);
  const msa::RingProfile profile = msa::per_ring_eer(records, root, cfg);
  if (!out_csv.empty()) msa::save_ring_profile_csv(profile, out_csv);
  if (!out_json.empty()) {
    json j;
    j["format_version"] = 1;
    j["toolkit_version"] = msa::kToolkitVersion;
    j["config"] = {{"n_rings", cfg.n_rings},
                   {"ring_texture_height", cfg.ring_texture_height},
                   {"texture_width", cfg.texture_width},
                   {"s1", cfg.s1},
                   {"s2", cfg.s2},
                   {"seed", seed}};
    j["eers"] = profile.eers;
    j["normalized"] = profile.normalized;
    std::ofstream out(out_json, std::ios::trunc);
    if (!out) {
      throw msa::Error(msa::ErrorCode::IoError, "cannot write " + out_json);
    }
    out << j.dump(2) << "\n";
  }
  for (std::size_t i = 0; i < profile.eers.size(); ++i) {
    std::cout << "ring " << i << ": eer " << profile.eers[i]
              << "% (normalized " << profile.normalized[i] << ")\n";
  }
  return 0;
}

int run_protocol(const CLI::App* cmd, const std::string& protocol,
                 const std::string& manifest_path,
                 const std::string& images_root, const std::string& out_dir,
                 const std::string& config_path, std::uint64_t seed,
                 int repeats, const std::string& fusion, bool tune_threshold,
                 const PipelineFlags& flags) {
  msa::ExperimentConfig cfg = resolve_experiment_config(config_path);
  if (cmd->count("--protocol")) {
    cfg.protocol = msa::protocol_from_string(protocol);
  }
  if (cmd->count("--seed")) cfg.base_seed = seed;
  if (cmd->count("--repeats")) cfg.repeat_count = repeats;
  if (cmd->count("--fusion")) {
    cfg.fusion = msa::fusion_strategy_from_string(fusion);
  }
  if (tune_threshold) cfg.tune_threshold_on_dev = true;
  apply_pipeline_flags(cmd, flags, cfg.pipeline);

  const auto records = msa::load_manifest(manifest_path);
  const fs::path root = images_root.empty()
                            ? fs::path(manifest_path).parent_path()
                            : fs::path(images_root);
  const msa::ExperimentResult result =
      msa::run_experiment(cfg, records, root, out_dir);

  for (const auto& [name, variant] : result.variants) {
    std::cout << "== " << name << " (averaged over "
              << variant.per_repeat.size() << " repeats) ==\n"
              << msa::report_table(variant.averaged);
  }
  for (std::size_t rep = 0; rep < result.ring_profiles.size(); ++rep) {
    std::cout << "== ring profile, repeat " << rep << " ==\n";
    const auto& p = result.ring_profiles[rep];
    for (std::size_t i = 0; i < p.eers.size(); ++i) {
      std::cout << "ring " << i << ": eer " << p.eers[i] << "% (normalized "
                << p.normalized[i] << ")\n";
    }
  }
  if (!out_dir.empty()) {
    std::cout << "report: " << (fs::path(out_dir) / "report.json").string()
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"micro-stripe iris presentation-attack-detection toolkit"};
  app.set_version_flag("--version", msa::kToolkitVersion);
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_out, synth_config;
  msa::SynthParams synth_flags;
  std::string synth_artifact = "border_ring";
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--config", synth_config, "generator config json");
  synth->add_option("--bona-fide", synth_flags.n_bona_fide, "bona fide count");
  synth->add_option("--attack", synth_flags.n_attack, "attack count");
  synth->add_option("--soft", synth_flags.n_soft, "soft-lens count");
  synth->add_option("--artifact", synth_artifact,
                    "attack artifact: border_ring or dot_print");
  synth->add_option("--contrast", synth_flags.artifact_contrast,
                    "artifact contrast");
  synth->add_option("--image-size", synth_flags.image_size, "image edge length");
  synth->add_option("--seed", synth_flags.seed, "generator seed");

  // segment ----------------------------------------------------------------
  auto* segment = app.add_subcommand("segment", "detect pupil/iris circles");
  std::string seg_image, seg_manifest, seg_root, seg_out, seg_out_manifest,
      seg_config;
  segment->add_option("--image", seg_image, "single image to segment");
  segment->add_option("--manifest", seg_manifest, "manifest to segment");
  segment->add_option("--images-root", seg_root,
                      "base directory for manifest paths");
  segment->add_option("--out", seg_out, "segmentation file to write");
  segment->add_option("--out-manifest", seg_out_manifest,
                      "manifest copy with segmentation references");
  segment->add_option("--config", seg_config, "detector config json");

  // normalize ---------------------------------------------------------------
  auto* normalize = app.add_subcommand(
      "normalize", "unwrap one image into a normalized texture");
  std::string norm_image, norm_seg, norm_out, norm_out_pgm, norm_config;
  bool norm_no_clahe = false;
  PipelineFlags norm_flags;
  normalize->add_option("--image", norm_image, "input image")->required();
  normalize->add_option("--segmentation", norm_seg,
                        "segmentation file reference `file[:line]`; "
                        "auto-detects when omitted");
  normalize->add_option("--out", norm_out, "texture dump to write");
  normalize->add_option("--out-pgm", norm_out_pgm, "8-bit preview to write");
  normalize->add_flag("--no-clahe", norm_no_clahe, "skip contrast enhancement");
  normalize->add_option("--config", norm_config, "pipeline config json");
  add_pipeline_flags(normalize, norm_flags);

  // stripes ------------------------------------------------------------------
  auto* stripes = app.add_subcommand("stripes",
                                     "slice a texture into micro-stripes");
  std::string stripes_texture, stripes_out_dir;
  int stripes_height = 32, stripes_stride = 4;
  stripes->add_option("--texture", stripes_texture, "texture dump")->required();
  stripes->add_option("--height", stripes_height, "stripe height");
  stripes->add_option("--stride", stripes_stride, "stripe stride");
  stripes->add_option("--out-dir", stripes_out_dir, "write stripe dumps here");

  // train ---------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train the stripe classifier");
  std::string train_manifest, train_root, train_out, train_config;
  PipelineFlags train_flags;
  msa::TrainConfig train_cfg;
  train_cmd->add_option("--manifest", train_manifest, "dataset manifest")
      ->required();
  train_cmd->add_option("--config", train_config,
                        "pipeline/training config json");
  train_cmd->add_option("--images-root", train_root,
                        "base directory for manifest paths");
  train_cmd->add_option("--out", train_out, "model file to write")->required();
  train_cmd->add_option("--seed", train_cfg.seed, "training seed");
  train_cmd->add_option("--max-epochs", train_cfg.max_epochs, "epoch cap");
  train_cmd->add_option("--patience", train_cfg.early_stop_patience,
                        "early stopping patience");
  train_cmd->add_option("--learning-rate", train_cfg.learning_rate,
                        "learning rate");
  train_cmd->add_option("--batch-size", train_cfg.batch_size, "batch size");
  add_pipeline_flags(train_cmd, train_flags);

  // score ----------------------------------------------------------------------
  auto* score = app.add_subcommand("score", "score stripes with a model");
  std::string score_model, score_manifest, score_root, score_out,
      score_split = "test", score_config;
  PipelineFlags score_flags;
  score->add_option("--config", score_config, "pipeline config json");
  score->add_option("--model", score_model, "model file")->required();
  score->add_option("--manifest", score_manifest, "dataset manifest")
      ->required();
  score->add_option("--images-root", score_root,
                    "base directory for manifest paths");
  score->add_option("--out", score_out, "score csv to write")->required();
  score->add_option("--split", score_split, "train, dev, test or all");
  add_pipeline_flags(score, score_flags);

  // fuse ------------------------------------------------------------------------
  auto* fuse = app.add_subcommand("fuse", "fuse stripe scores per image");
  std::string fuse_scores, fuse_out, fuse_strategy = "majority_vote";
  double fuse_threshold = 0.5;
  int fuse_sample_k = 0;
  std::uint64_t fuse_seed = 0;
  fuse->add_option("--scores", fuse_scores, "score csv")->required();
  fuse->add_option("--out", fuse_out, "decision csv to write")->required();
  fuse->add_option("--strategy", fuse_strategy,
                   "majority_vote or mean_score");
  fuse->add_option("--threshold", fuse_threshold, "per-stripe threshold");
  fuse->add_option("--sample-k", fuse_sample_k,
                   "fuse a random odd subset of this size");
  fuse->add_option("--seed", fuse_seed, "sampling seed");

  // eval -------------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "compute metrics from decisions");
  std::string eval_decisions, eval_manifest, eval_split = "test", eval_out,
      eval_roc;
  bool eval_table = false;
  eval->add_option("--decisions", eval_decisions, "decision csv")->required();
  eval->add_option("--manifest", eval_manifest, "manifest with ground truth")
      ->required();
  eval->add_option("--split", eval_split, "train, dev, test or all");
  eval->add_option("--out", eval_out, "report json to write");
  eval->add_flag("--table", eval_table, "print the aligned text table");
  eval->add_option("--roc", eval_roc,
                   "write (threshold, apcer, bpcer) sweep csv");

  // rings -------------------------------------------------------------------------
  auto* rings = app.add_subcommand("rings", "per-ring EER profile");
  std::string rings_manifest, rings_root, rings_csv, rings_json, rings_config;
  int rings_n = 10, rings_height = 16;
  std::uint64_t rings_seed = 0;
  PipelineFlags rings_flags;
  rings->add_option("--config", rings_config, "ring analysis config json");
  rings->add_option("--manifest", rings_manifest, "dataset manifest")
      ->required();
  rings->add_option("--images-root", rings_root,
                    "base directory for manifest paths");
  rings->add_option("--n", rings_n, "number of rings");
  rings->add_option("--ring-height", rings_height, "per-ring texture height");
  rings->add_option("--seed", rings_seed, "training seed");
  rings->add_option("--out", rings_csv, "profile csv to write");
  rings->add_option("--out-json", rings_json, "profile json to write");
  add_pipeline_flags(rings, rings_flags);

  // experiment ----------------------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment",
                                        "run a full evaluation protocol");
  std::string exp_protocol = "standard", exp_manifest, exp_root, exp_out,
      exp_config, exp_fusion = "majority_vote";
  std::uint64_t exp_seed = 1;
  int exp_repeats = 5;
  PipelineFlags exp_flags;
  experiment->add_option("--protocol", exp_protocol,
                         "standard, soft_lens_1..3, stripe_ablation, "
                         "fusion_compare or ring_analysis");
  experiment->add_option("--manifest", exp_manifest, "dataset manifest")
      ->required();
  experiment->add_option("--images-root", exp_root,
                         "base directory for manifest paths");
  experiment->add_option("--out", exp_out, "output directory");
  experiment->add_option("--config", exp_config, "experiment config json");
  experiment->add_option("--seed", exp_seed, "base seed");
  experiment->add_option("--repeats", exp_repeats, "repeat count");
  experiment->add_option("--fusion", exp_fusion, "fusion strategy");
  bool exp_tune = false;
  experiment->add_flag("--tune-threshold", exp_tune,
                       "pick the decision threshold at the dev EER point "
                       "(score-level strategies only)");
  add_pipeline_flags(experiment, exp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      synth_flags.artifact = msa::artifact_type_from_string(synth_artifact);
      return run_synth(synth, synth_out, synth_config, synth_flags);
    }
    if (*segment) {
      msa::DetectorConfig detector;
      if (!seg_config.empty()) {
        const json j = load_json_file(seg_config);
        detector.pupil_r_min = j.value("pupil_r_min", detector.pupil_r_min);
        detector.pupil_r_max = j.value("pupil_r_max", detector.pupil_r_max);
        detector.iris_r_min = j.value("iris_r_min", detector.iris_r_min);
        detector.iris_r_max = j.value("iris_r_max", detector.iris_r_max);
        detector.center_tolerance =
            j.value("center_tolerance", detector.center_tolerance);
        detector.edge_threshold =
            j.value("edge_threshold", detector.edge_threshold);
        detector.pupil_intensity_quantile = j.value(
            "pupil_intensity_quantile", detector.pupil_intensity_quantile);
        detector.accumulator_threshold = j.value(
            "accumulator_threshold", detector.accumulator_threshold);
      }
      return run_segment(seg_image, seg_manifest, seg_root, seg_out,
                         seg_out_manifest, detector);
    }
    if (*normalize) {
      return run_normalize(normalize, norm_image, norm_seg, norm_config,
                           norm_flags, norm_no_clahe, norm_out, norm_out_pgm);
    }
    if (*stripes) {
      return run_stripes(stripes_texture, stripes_height, stripes_stride,
                         stripes_out_dir);
    }
    if (*train_cmd) {
      return run_train(train_cmd, train_manifest, train_root, train_out,
                       train_config, train_flags, train_cfg);
    }
    if (*score) {
      return run_score(score, score_model, score_manifest, score_root,
                       score_out, score_split, score_config, score_flags);
    }
    if (*fuse) {
      return run_fuse(fuse_scores, fuse_out, fuse_strategy, fuse_threshold,
                      fuse_sample_k, fuse_seed);
    }
    if (*eval) {
      return run_eval(eval_decisions, eval_manifest, eval_split, eval_out,
                      eval_table, eval_roc);
    }
    if (*rings) {
      return run_rings(rings, rings_manifest, rings_root, rings_n,
                       rings_height, rings_seed, rings_csv, rings_json,
                       rings_config, rings_flags);
    }
    if (*experiment) {
      return run_protocol(experiment, exp_protocol, exp_manifest, exp_root,
                          exp_out, exp_config, exp_seed, exp_repeats,
                          exp_fusion, exp_tune, exp_flags);
    }
  } catch (const msa::Error& e) {
    // what() already leads with the machine-readable code name
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
