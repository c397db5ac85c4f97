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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "msa/classifier.hpp"
#include "msa/error.hpp"

using namespace msa;

namespace {

MicroStripe stripe_from(const std::vector<std::vector<float>>& rows) {
  MicroStripe s;
  s.height = static_cast<int>(rows.size());
  s.width = static_cast<int>(rows[0].size());
  for (const auto& row : rows) {
    s.values.insert(s.values.end(), row.begin(), row.end());
  }
  return s;
}

MicroStripe random_stripe(int w, int h, std::uint32_t seed, int lo = 0,
                          int hi = 100) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> value(lo, hi);
  MicroStripe s;
  s.width = w;
  s.height = h;
  s.values.resize(static_cast<std::size_t>(w) * h);
  for (auto& v : s.values) v = static_cast<float>(value(rng));
  return s;
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "msa_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// 59-dim toy vectors so the dimensionality matches a 1x1-cell config.
FeatureVector toy_vector(double a, double b) {
  FeatureVector fv;
  fv.values.assign(59, 0.0);
  fv.values[0] = a;
  fv.values[1] = b;
  fv.config_hash = "toy";
  return fv;
}

}  // namespace

TEST_CASE("lbp code of the worked 3x3 patch is 255") {
  const MicroStripe s = stripe_from({{9, 9, 9}, {9, 5, 9}, {9, 9, 9}});
  CHECK(lbp_code_at(s, 1, 1) == 255);
}

TEST_CASE("uniform lbp binning") {
  // 0 and 255 have zero circular transitions; 0b01010101 has eight
  CHECK(uniform_lbp_bin(0) != 58);
  CHECK(uniform_lbp_bin(255) != 58);
  CHECK(uniform_lbp_bin(0b01010101) == 58);
  int uniform_bins = 0;
  bool used[59] = {};
  for (int code = 0; code < 256; ++code) {
    const int bin = uniform_lbp_bin(code);
    CHECK(bin >= 0);
    CHECK(bin <= 58);
    if (bin != 58) {
      CHECK(!used[bin]);  // uniform codes get distinct bins
      used[bin] = true;
      ++uniform_bins;
    }
  }
  CHECK(uniform_bins == 58);
}

TEST_CASE("lbp features") {
  SUBCASE("constant stripe concentrates every cell on the all-ones pattern") {
    MicroStripe s;
    s.width = 32;
    s.height = 16;
    s.values.assign(32 * 16, 40.0f);
    const FeatureVector fv = lbp_features(s, 2, 2);
    REQUIRE(fv.values.size() == 4 * 59);
    const int expected_bin = uniform_lbp_bin(255);
    for (int cell = 0; cell < 4; ++cell) {
      for (int bin = 0; bin < 59; ++bin) {
        const double v = fv.values[cell * 59 + bin];
        CHECK(v == doctest::Approx(bin == expected_bin ? 1.0 : 0.0));
      }
    }
  }
  SUBCASE("each cell block sums to one") {
    const MicroStripe s = random_stripe(512, 32, 77, 0, 255);
    const FeatureVector fv = lbp_features(s, 16, 2);
    REQUIRE(fv.values.size() == 1888);
    for (int cell = 0; cell < 32; ++cell) {
      double total = 0.0;
      for (int bin = 0; bin < 59; ++bin) total += fv.values[cell * 59 + bin];
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("invariant to order-preserving affine intensity changes") {
    const MicroStripe s = random_stripe(64, 16, 13, 0, 100);
    MicroStripe mapped = s;
    for (auto& v : mapped.values) v = 2.0f * v + 10.0f;  // stays within 8 bits
    const FeatureVector a = lbp_features(s, 4, 2);
    const FeatureVector b = lbp_features(mapped, 4, 2);
    CHECK(a.values == b.values);
  }
  SUBCASE("cells smaller than 3x3 are rejected") {
    const MicroStripe s = random_stripe(16, 4, 1);
    CHECK_THROWS_AS(lbp_features(s, 1, 2), Error);  // 2-pixel cell rows
    CHECK_THROWS_AS(lbp_features(s, 8, 1), Error);  // 2-pixel cell columns
    CHECK_NOTHROW(lbp_features(s, 5, 1));
  }
  SUBCASE("config hash pins the extraction geometry") {
    const MicroStripe s = random_stripe(64, 16, 2);
    const FeatureVector fv = lbp_features(s, 4, 2);
    CHECK(fv.config_hash == FeatureConfig{4, 2, 64, 16}.hash());
  }
}

TEST_CASE("logistic trainer") {
  const FeatureConfig toy_config{1, 1, 8, 8};

  std::vector<FeatureVector> features;
  std::vector<PadLabel> labels;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (int i = 0; i < 60; ++i) {
    const bool attack = i % 2 == 0;
    features.push_back(toy_vector((attack ? 1.0 : -1.0) + jitter(rng),
                                  (attack ? -1.0 : 1.0) + jitter(rng)));
    labels.push_back(attack ? PadLabel::Attack : PadLabel::BonaFide);
  }
  const std::vector<FeatureVector> dev(features.begin(), features.begin() + 10);
  const std::vector<PadLabel> dev_labels(labels.begin(), labels.begin() + 10);

  SUBCASE("separable toy data reaches 100 percent training accuracy") {
    TrainConfig cfg;
    cfg.seed = 9;
    const ClassifierModel model =
        train(features, labels, dev, dev_labels, cfg, toy_config);
    int correct = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const PadLabel predicted = predict(model, features[i]) > 0.5
                                     ? PadLabel::Attack
                                     : PadLabel::BonaFide;
      correct += predicted == labels[i];
    }
    CHECK(correct == static_cast<int>(features.size()));
    CHECK(model.training_meta.epochs_run <= cfg.max_epochs);
    CHECK(std::isfinite(model.training_meta.final_train_loss));
  }
  SUBCASE("same seed twice gives bit-identical weights") {
    TrainConfig cfg;
    cfg.seed = 21;
    const ClassifierModel a =
        train(features, labels, dev, dev_labels, cfg, toy_config);
    const ClassifierModel b =
        train(features, labels, dev, dev_labels, cfg, toy_config);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
  }
  SUBCASE("single-class training is rejected") {
    std::vector<PadLabel> all_bona_fide(labels.size(), PadLabel::BonaFide);
    try {
      train(features, all_bona_fide, dev, dev_labels, {}, toy_config);
      FAIL("expected single-class error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingleClass);
    }
  }
  SUBCASE("non-finite features surface as training divergence") {
    auto poisoned = features;
    poisoned[3].values[0] = std::nan("");
    try {
      train(poisoned, labels, dev, dev_labels, {}, toy_config);
      FAIL("expected divergence error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TrainingDiverged);
    }
  }
  SUBCASE("early stopping halts on a hostile dev set") {
    // dev labels flipped: dev loss rises as the model fits train
    std::vector<PadLabel> flipped(dev_labels);
    for (auto& l : flipped) {
      l = l == PadLabel::Attack ? PadLabel::BonaFide : PadLabel::Attack;
    }
    TrainConfig cfg;
    cfg.seed = 4;
    const ClassifierModel model =
        train(features, labels, dev, flipped, cfg, toy_config);
    CHECK(model.training_meta.epochs_run < cfg.max_epochs);
  }
  SUBCASE("inconsistent feature lengths are rejected") {
    auto broken = features;
    broken[1].values.resize(13);
    CHECK_THROWS_AS(train(broken, labels, dev, dev_labels, {}, toy_config),
                    Error);
  }
}

TEST_CASE("scoring") {
  SUBCASE("zero model scores one half") {
    ClassifierModel model;
    model.feature_config = FeatureConfig{2, 2, 32, 16};
    model.weights.assign(model.feature_config.feature_length(), 0.0);
    model.bias = 0.0;
    const MicroStripe s = random_stripe(32, 16, 3);
    const StripeScore score = score_stripe(model, s);
    CHECK(score.p_attack == doctest::Approx(0.5));
    CHECK(score.stripe_offset == s.row_offset);
  }
  SUBCASE("large positive bias saturates") {
    ClassifierModel model;
    model.feature_config = FeatureConfig{2, 2, 32, 16};
    model.weights.assign(model.feature_config.feature_length(), 0.0);
    model.bias = 10.0;
    const StripeScore score = score_stripe(model, random_stripe(32, 16, 4));
    CHECK(score.p_attack > 0.9999);
  }
  SUBCASE("hand-built weights match the logistic") {
    ClassifierModel model;
    model.weights = {1.0, -1.0};
    model.bias = 0.0;
    FeatureVector fv;
    fv.values = {0.3, 0.1};
    const double p = predict(model, fv);
    CHECK(p == doctest::Approx(1.0 / (1.0 + std::exp(-0.2))));
    CHECK(p == doctest::Approx(0.5498).epsilon(1e-4));
  }
  SUBCASE("dimension mismatches are feature errors") {
    ClassifierModel model;
    model.feature_config = FeatureConfig{2, 2, 32, 16};
    model.weights.assign(model.feature_config.feature_length(), 0.0);
    try {
      score_stripe(model, random_stripe(64, 16, 5));
      FAIL("expected feature mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::FeatureMismatch);
    }
    FeatureVector fv;
    fv.values = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(predict(model, fv), Error);
  }
}

TEST_CASE("model files round trip") {
  ClassifierModel model;
  model.feature_config = FeatureConfig{4, 2, 128, 24};
  model.weights.assign(model.feature_config.feature_length(), 0.0);
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    model.weights[i] = std::sin(static_cast<double>(i)) * 0.37;
  }
  model.bias = -0.125;
  model.training_meta = {99, 17, 0.0123456789, 0.0234567891};

  const auto path = temp_path("model.json");
  save_model(model, path);
  const ClassifierModel back = load_model(path);
  CHECK(back.weights == model.weights);
  CHECK(back.bias == model.bias);
  CHECK(back.feature_config.cells_x == 4);
  CHECK(back.feature_config.stripe_height == 24);
  CHECK(back.training_meta.seed == 99);
  CHECK(back.training_meta.epochs_run == 17);

  SUBCASE("corrupt json is a parse error") {
    std::ofstream out(temp_path("broken.json"), std::ios::trunc);
    out << "{\"weights\": [1,2,";
    out.close();
    CHECK_THROWS_AS(load_model(temp_path("broken.json")), Error);
  }
}

TEST_CASE("score csv import") {
  const auto path = temp_path("scores.csv");

  SUBCASE("well-formed file maps keys to scores") {
    std::ofstream out(path, std::ios::trunc);
    out << "image_id,stripe_offset,p_attack\n";
    out << "img007,8,0.93\n";
    out << "img007,12,0.21\n";
    out << "img008,8,0.5\n";
    out.close();
    const auto scores = import_scores(path);
    REQUIRE(scores.size() == 3);
    CHECK(scores.at({"img007", 8}).p_attack == doctest::Approx(0.93));
    CHECK(scores.at({"img007", 12}).p_attack == doctest::Approx(0.21));
  }
  SUBCASE("out-of-range probability") {
    std::ofstream out(path, std::ios::trunc);
    out << "image_id,stripe_offset,p_attack\nimg,0,1.7\n";
    out.close();
    try {
      import_scores(path);
      FAIL("expected range error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RangeError);
    }
  }
  SUBCASE("duplicate keys") {
    std::ofstream out(path, std::ios::trunc);
    out << "image_id,stripe_offset,p_attack\nimg,0,0.5\nimg,0,0.6\n";
    out.close();
    try {
      import_scores(path);
      FAIL("expected duplicate key error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DuplicateKey);
    }
  }
  SUBCASE("malformed rows") {
    std::ofstream out(path, std::ios::trunc);
    out << "image_id,stripe_offset,p_attack\nimg,zero,0.5\n";
    out.close();
    CHECK_THROWS_AS(import_scores(path), Error);
  }
  SUBCASE("export then import round trips") {
    std::vector<std::pair<std::string, StripeScore>> rows = {
        {"a", {0.25, 0}}, {"a", {0.75, 4}}, {"b", {0.125, 0}}};
    export_scores(rows, path);
    const auto scores = import_scores(path);
    CHECK(scores.at({"a", 0}).p_attack == 0.25);
    CHECK(scores.at({"a", 4}).p_attack == 0.75);
    CHECK(scores.at({"b", 0}).p_attack == 0.125);
  }
}
