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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "msa/error.hpp"
#include "msa/experiment.hpp"
#include "msa/manifest.hpp"
#include "msa/synth.hpp"

using namespace msa;

namespace {

std::filesystem::path tests_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "msa_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_manifest(const std::string& name,
                                     const std::string& body) {
  const auto path = tests_dir() / name;
  std::ofstream out(path, std::ios::trunc);
  out << "# format_version: 1\n";
  out << "image_id,path,split,truth,lens_type,segmentation_ref\n";
  out << body;
  return path;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

SynthParams tiny_params(std::uint64_t seed) {
  SynthParams params;
  params.n_bona_fide = 15;
  params.n_attack = 15;
  params.seed = seed;
  params.image_size = 192;
  params.pupil_r_min = 20;
  params.pupil_r_max = 26;
  params.iris_r_min = 52;
  params.iris_r_max = 62;
  return params;
}

ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg;
  cfg.protocol = Protocol::Standard;
  cfg.pipeline.texture_width = 128;
  cfg.pipeline.texture_height = 32;
  cfg.pipeline.stripe_height = 16;
  cfg.pipeline.stride = 4;
  cfg.pipeline.cells_x = 8;
  cfg.pipeline.cells_y = 2;
  cfg.pipeline.clahe.tiles_x = 4;
  cfg.pipeline.clahe.tiles_y = 4;
  cfg.train.max_epochs = 6;
  cfg.repeat_count = 1;
  cfg.base_seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("manifest parsing") {
  SUBCASE("valid rows map directly") {
    const auto path = write_manifest(
        "m_ok.csv",
        "a1,imgs/a1.png,train,attack,textured,\n"
        "b1,imgs/b1.png,test,bona_fide,none,seg.txt:3\n"
        "s1,imgs/s1.png,dev,bona_fide,soft,\n");
    const auto records = load_manifest(path);
    REQUIRE(records.size() == 3);
    CHECK(records[0].image_id == "a1");
    CHECK(records[0].truth == PadLabel::Attack);
    CHECK(records[0].lens_type == LensType::Textured);
    CHECK(records[0].segmentation_ref.empty());
    CHECK(records[1].split == Split::Test);
    CHECK(records[1].segmentation_ref == "seg.txt:3");
    CHECK(records[2].lens_type == LensType::Soft);
    CHECK(records[2].truth == PadLabel::BonaFide);
  }
  SUBCASE("bona fide with a textured lens is inconsistent") {
    const auto path = write_manifest(
        "m_bad.csv", "a1,imgs/a1.png,train,bona_fide,textured,\n");
    try {
      load_manifest(path);
      FAIL("expected consistency error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConsistencyError);
    }
  }
  SUBCASE("duplicate image ids are rejected") {
    const auto path = write_manifest("m_dup.csv",
                                     "a1,x.png,train,attack,textured,\n"
                                     "a1,y.png,test,attack,textured,\n");
    try {
      load_manifest(path);
      FAIL("expected duplicate key error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DuplicateKey);
    }
  }
  SUBCASE("field count is enforced") {
    const auto path =
        write_manifest("m_arity.csv", "a1,x.png,train,attack\n");
    CHECK_THROWS_AS(load_manifest(path), Error);
  }
  SUBCASE("soft lenses labeled attack are inconsistent") {
    const auto path =
        write_manifest("m_soft.csv", "s1,x.png,train,attack,soft,\n");
    CHECK_THROWS_AS(load_manifest(path), Error);
  }
}

TEST_CASE("dev split carving") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 16; ++i) {
    ManifestRecord r;
    r.image_id = "a" + std::to_string(i);
    r.path = r.image_id + ".png";
    r.split = i < 12 ? Split::Train : Split::Test;
    r.truth = i % 2 ? PadLabel::Attack : PadLabel::BonaFide;
    r.lens_type = i % 2 ? LensType::Textured : LensType::None;
    records.push_back(r);
  }
  const auto out = ensure_dev_split(records);
  int train = 0, dev = 0, test = 0;
  for (const auto& r : out) {
    if (r.split == Split::Train) ++train;
    if (r.split == Split::Dev) ++dev;
    if (r.split == Split::Test) ++test;
  }
  CHECK(train == 10);  // one of each class's 6 moved per 4
  CHECK(dev == 2);
  CHECK(test == 4);

  SUBCASE("manifests that already have a dev split are untouched") {
    auto with_dev = records;
    with_dev[0].split = Split::Dev;
    const auto kept = ensure_dev_split(with_dev);
    int dev_count = 0;
    for (const auto& r : kept) dev_count += r.split == Split::Dev;
    CHECK(dev_count == 1);
  }
}

TEST_CASE("synthetic dataset generation") {
  const auto dir = tests_dir() / "synth_a";
  SynthParams params = tiny_params(77);
  params.n_soft = 5;
  const SynthOutput out = synth_generate(params, dir);

  SUBCASE("manifest has the right shape") {
    REQUIRE(out.records.size() == 35);
    const auto records = load_manifest(out.manifest_path);
    REQUIRE(records.size() == 35);
    int train = 0, dev = 0, test = 0, soft = 0;
    for (const auto& r : records) {
      if (r.split == Split::Train) ++train;
      if (r.split == Split::Dev) ++dev;
      if (r.split == Split::Test) ++test;
      if (r.lens_type == LensType::Soft) {
        ++soft;
        CHECK(r.truth == PadLabel::BonaFide);
      }
    }
    CHECK(soft == 5);
    CHECK(train == 9 + 9 + 3);  // floor(0.6 n) per class
    CHECK(dev == 3 + 3 + 1);
    CHECK(test == 35 - train - dev);
  }
  SUBCASE("segmentation references resolve to valid circles") {
    const auto records = load_manifest(out.manifest_path);
    for (const auto& r : records) {
      const Segmentation seg = resolve_segmentation_ref(r.segmentation_ref, dir);
      CHECK(seg.pupil.r > 0.0);
      CHECK(seg.pupil.r < seg.iris.r);
    }
  }
  SUBCASE("images decode and have the configured size") {
    const auto records = load_manifest(out.manifest_path);
    const GrayImage img = load_image(dir / records.front().path);
    CHECK(img.width() == params.image_size);
    CHECK(img.height() == params.image_size);
  }
  SUBCASE("generation is byte identical for a fixed seed") {
    const auto dir_b = tests_dir() / "synth_b";
    const auto dir_c = tests_dir() / "synth_c";
    synth_generate(params, dir_b);
    synth_generate(params, dir_c);
    CHECK(file_bytes(dir_b / "images" / "bf_0000.png") ==
          file_bytes(dir_c / "images" / "bf_0000.png"));
    CHECK(file_bytes(dir_b / "images" / "at_0007.png") ==
          file_bytes(dir_c / "images" / "at_0007.png"));
    CHECK(file_bytes(dir_b / "manifest.csv") ==
          file_bytes(dir_c / "manifest.csv"));
    CHECK(file_bytes(dir_b / "segmentation.txt") ==
          file_bytes(dir_c / "segmentation.txt"));
  }
}

TEST_CASE("experiment runner") {
  const auto dir = tests_dir() / "exp_ds";
  const SynthOutput ds = synth_generate(tiny_params(31), dir);
  const ExperimentConfig cfg = tiny_experiment();

  SUBCASE("standard protocol produces a standard variant") {
    const ExperimentResult result = run_experiment(cfg, ds.records, dir);
    REQUIRE(result.variants.count("standard") == 1);
    const VariantResult& v = result.variants.at("standard");
    REQUIRE(v.per_repeat.size() == 1);
    CHECK(v.averaged.ccr == v.per_repeat[0].ccr);
    CHECK(v.averaged.hter == (v.averaged.apcer + v.averaged.bpcer) / 2.0);
    CHECK(!v.averaged.eer_threshold.has_value());
    CHECK(v.per_repeat[0].eer_threshold.has_value());
    CHECK(v.per_repeat[0].n_attack > 0);
  }
  SUBCASE("experiment is deterministic end to end") {
    const auto a = experiment_to_json(run_experiment(cfg, ds.records, dir));
    const auto b = experiment_to_json(run_experiment(cfg, ds.records, dir));
    CHECK(a.dump() == b.dump());
  }
  SUBCASE("averaging is the arithmetic mean of per-repeat reports") {
    ExperimentConfig two = cfg;
    two.repeat_count = 2;
    const ExperimentResult result = run_experiment(two, ds.records, dir);
    const VariantResult& v = result.variants.at("standard");
    REQUIRE(v.per_repeat.size() == 2);
    CHECK(v.averaged.ccr ==
          doctest::Approx((v.per_repeat[0].ccr + v.per_repeat[1].ccr) / 2.0));
    CHECK(v.averaged.eer ==
          doctest::Approx((v.per_repeat[0].eer + v.per_repeat[1].eer) / 2.0));
  }
  SUBCASE("soft-lens protocols demand soft records") {
    ExperimentConfig soft_cfg = cfg;
    soft_cfg.protocol = Protocol::SoftLens2;
    try {
      run_experiment(soft_cfg, ds.records, dir);
      FAIL("expected protocol error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ProtocolError);
    }
  }
  SUBCASE("fusion compare evaluates all three strategies") {
    ExperimentConfig fc = cfg;
    fc.protocol = Protocol::FusionCompare;
    const ExperimentResult result = run_experiment(fc, ds.records, dir);
    CHECK(result.variants.count("majority_vote") == 1);
    CHECK(result.variants.count("mean_score") == 1);
    CHECK(result.variants.count("resize_baseline") == 1);
  }
  SUBCASE("stripe ablation trains one variant per height") {
    ExperimentConfig ab = cfg;
    ab.protocol = Protocol::StripeAblation;
    ab.ablation_heights = {8, 16};
    const ExperimentResult result = run_experiment(ab, ds.records, dir);
    REQUIRE(result.variants.count("h=8") == 1);
    REQUIRE(result.variants.count("h=16") == 1);
    CHECK(result.variants.at("h=8").per_repeat.size() == 1);
  }
  SUBCASE("odd random stripe subsets flow through evaluation") {
    ExperimentConfig sampled = cfg;
    sampled.pipeline.sample_k = 3;
    const ExperimentResult result = run_experiment(sampled, ds.records, dir);
    CHECK(result.variants.at("standard").per_repeat[0].n_attack > 0);
  }
  SUBCASE("dev-tuned threshold runs record one threshold per repeat") {
    ExperimentConfig tuned = cfg;
    tuned.fusion = FusionStrategy::MeanScore;
    tuned.tune_threshold_on_dev = true;
    tuned.repeat_count = 2;
    const ExperimentResult result = run_experiment(tuned, ds.records, dir);
    const VariantResult& v = result.variants.at("standard");
    REQUIRE(v.decision_thresholds.size() == 2);
    for (double t : v.decision_thresholds) CHECK(std::isfinite(t));
    CHECK(experiment_to_json(result)["variants"]["standard"]
              .contains("decision_thresholds"));
  }
  SUBCASE("threshold tuning rejects vote-level fusion") {
    ExperimentConfig bad = cfg;
    bad.tune_threshold_on_dev = true;  // majority vote stays fixed at 0.5
    CHECK_THROWS_AS(run_experiment(bad, ds.records, dir), Error);
  }
  SUBCASE("report files land in the output directory") {
    const auto out_dir = tests_dir() / "exp_out";
    std::filesystem::remove_all(out_dir);
    run_experiment(cfg, ds.records, dir, out_dir);
    CHECK(std::filesystem::exists(out_dir / "report.json"));
    CHECK(std::filesystem::exists(out_dir / "models" / "standard_rep0.json"));
  }
}

TEST_CASE("soft-lens protocol filtering keeps labels intact") {
  const auto dir = tests_dir() / "exp_soft_ds";
  SynthParams params = tiny_params(41);
  params.n_soft = 10;
  const SynthOutput ds = synth_generate(params, dir);

  ExperimentConfig cfg = tiny_experiment();
  cfg.protocol = Protocol::SoftLens2;
  const ExperimentResult result = run_experiment(cfg, ds.records, dir);
  const VariantResult& v = result.variants.at("soft_lens_2");
  // test split: 3 bona fide + 2 soft (both bona fide) + 3 attacks
  CHECK(v.per_repeat[0].n_bona_fide == 5);
  CHECK(v.per_repeat[0].n_attack == 3);

  cfg.protocol = Protocol::SoftLens3;
  const ExperimentResult r3 = run_experiment(cfg, ds.records, dir);
  CHECK(r3.variants.at("soft_lens_3").per_repeat[0].n_bona_fide == 3);
}

TEST_CASE("dot print artifact darkens a regular grid") {
  EyeSpec spec;
  spec.pupil = {96, 96, 22};
  spec.iris = {96, 96, 55};
  spec.seed = 9;
  spec.artifact = ArtifactType::DotPrint;
  const GrayImage plain = render_eye(spec, 192);
  spec.artifact_contrast = 40.0;
  const GrayImage dotted = render_eye(spec, 192);

  long plain_sum = 0, dotted_sum = 0;
  int max_drop = 0;
  for (int y = 0; y < 192; ++y) {
    for (int x = 0; x < 192; ++x) {
      plain_sum += plain.at(x, y);
      dotted_sum += dotted.at(x, y);
      max_drop = std::max(max_drop, plain.at(x, y) - dotted.at(x, y));
    }
  }
  CHECK(dotted_sum < plain_sum);
  CHECK(max_drop >= 25);
  // the pupil disk is untouched
  CHECK(dotted.at(96, 96) == plain.at(96, 96));
}

TEST_CASE("experiment config json round trip") {
  ExperimentConfig cfg = tiny_experiment();
  cfg.protocol = Protocol::StripeAblation;
  cfg.pipeline.sample_k = 5;
  cfg.ablation_heights = {8, 16};
  const nlohmann::json j = experiment_config_to_json(cfg);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(back.protocol == Protocol::StripeAblation);
  CHECK(back.pipeline.sample_k == 5);
  CHECK(back.pipeline.texture_width == cfg.pipeline.texture_width);
  CHECK(back.ablation_heights == cfg.ablation_heights);
  CHECK(back.train.max_epochs == cfg.train.max_epochs);

  // defaults survive a minimal config
  const ExperimentConfig defaults = experiment_config_from_json(
      nlohmann::json::parse(R"({"protocol":"standard"})"));
  CHECK(defaults.pipeline.stripe_height == 32);
  CHECK(defaults.pipeline.stride == 4);
  CHECK(defaults.repeat_count == 5);
  CHECK(defaults.train.max_epochs == 25);
  CHECK(defaults.train.batch_size == 16);
  CHECK(defaults.train.learning_rate == 0.001);
  CHECK(defaults.train.early_stop_patience == 5);
}
