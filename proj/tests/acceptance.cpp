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

// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the process exits nonzero if any criterion fails.
//
// usage: acceptance [--work-dir DIR] [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msa/experiment.hpp"
#include "msa/manifest.hpp"
#include "msa/metrics.hpp"
#include "msa/normalization.hpp"
#include "msa/segmentation.hpp"
#include "msa/stripes.hpp"
#include "msa/synth.hpp"
#include "oracles.hpp"

using namespace msa;
namespace fs = std::filesystem;

namespace {

fs::path g_work_dir = "acceptance_work";

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::vector<std::uint8_t> file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

// Datasets are generated once per process and shared across criteria.
struct Dataset {
  fs::path dir;
  std::vector<ManifestRecord> records;
};

Dataset make_dataset(const std::string& name, const SynthParams& params) {
  Dataset ds;
  ds.dir = g_work_dir / name;
  fs::remove_all(ds.dir);
  ds.records = synth_generate(params, ds.dir).records;
  return ds;
}

const Dataset& ring_dataset() {
  static const Dataset ds = [] {
    SynthParams params;  // border_ring artifact, 200/200 by default
    params.seed = 7001;
    return make_dataset("border_ring", params);
  }();
  return ds;
}

const Dataset& null_dataset() {
  static const Dataset ds = [] {
    SynthParams params;
    params.seed = 7002;
    params.artifact_contrast = 0.0;  // null artifact
    return make_dataset("null_artifact", params);
  }();
  return ds;
}

const Dataset& soft_dataset() {
  static const Dataset ds = [] {
    SynthParams params;
    params.seed = 7003;
    params.n_bona_fide = 150;
    params.n_attack = 150;
    params.n_soft = 100;
    return make_dataset("soft_lens", params);
  }();
  return ds;
}

ExperimentConfig default_experiment(Protocol protocol, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.protocol = protocol;
  cfg.base_seed = seed;
  return cfg;  // everything else stays at spec defaults
}

// ---------------------------------------------------------------------------

bool criterion_1(std::string& detail) {
  // published (APCER, BPCER) pairs must reproduce the published HTERs
  const auto build = [](long attacks, long attacks_missed, long bona_fides,
                        long bona_fides_missed) {
    std::vector<ScoredSample> samples;
    for (long i = 0; i < attacks; ++i) {
      samples.push_back({"a" + std::to_string(i), PadLabel::Attack, 0.9,
                         i < attacks_missed ? PadLabel::BonaFide
                                            : PadLabel::Attack});
    }
    for (long i = 0; i < bona_fides; ++i) {
      samples.push_back({"b" + std::to_string(i), PadLabel::BonaFide, 0.1,
                         i < bona_fides_missed ? PadLabel::Attack
                                               : PadLabel::BonaFide});
    }
    return samples;
  };

  const DecisionRates first = rates_at_decisions(build(10000, 231, 10000, 1994));
  const DecisionRates second = rates_at_decisions(build(10000, 18, 10000, 0));
  std::ostringstream d;
  d << "(" << round2(first.apcer) << ", " << round2(first.bpcer) << ") -> "
    << round2(first.hter) << "; (" << round2(second.apcer) << ", "
    << round2(second.bpcer) << ") -> " << round2(second.hter);
  detail = d.str();
  return round2(first.apcer) == 2.31 && round2(first.bpcer) == 19.94 &&
         round2(first.hter) == 11.13 && round2(second.apcer) == 0.18 &&
         round2(second.bpcer) == 0.00 && round2(second.hter) == 0.09;
}

bool criterion_2(std::string& detail) {
  NormalizedTexture tex;
  tex.width = 512;
  tex.height = 64;
  tex.values.assign(static_cast<std::size_t>(512) * 64, 0.0f);
  const std::vector<std::pair<int, int>> cases = {
      {32, 9}, {24, 11}, {48, 5}, {64, 1}};
  std::ostringstream d;
  bool ok = true;
  for (const auto& [height, expected] : cases) {
    const int got = static_cast<int>(extract_stripes(tex, height, 4).stripes.size());
    ok = ok && got == expected && stripe_count(64, height, 4) == expected;
    d << "(" << height << ",4)->" << got << " ";
  }
  detail = d.str();
  return ok;
}

bool criterion_3(std::string& detail) {
  const double s = 2.0 / 5.0;
  const Segmentation worked{{0, 0, 30.0}, {0, 0, 80.0}};
  const ExtendedBoundaries wb = extend_boundaries(worked, s, s);
  if (wb.inner.r != 60.0 || wb.outer.r != 100.0) {
    detail = "worked example mismatch";
    return false;
  }

  std::mt19937 rng(555);
  std::uniform_real_distribution<double> pupil_dist(5.0, 100.0);
  std::uniform_real_distribution<double> gap_dist(1.0, 200.0);
  std::uniform_real_distribution<double> k_dist(0.1, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double rp = pupil_dist(rng);
    const double ri = rp + gap_dist(rng);
    const double k = k_dist(rng);
    const ExtendedBoundaries a =
        extend_boundaries(Segmentation{{0, 0, rp}, {0, 0, ri}}, s, s);
    const ExtendedBoundaries b = extend_boundaries(
        Segmentation{{0, 0, k * rp}, {0, 0, k * ri}}, s, s);
    worst = std::max(worst,
                     std::abs(b.inner.r - k * a.inner.r) / (k * a.inner.r));
    worst = std::max(worst,
                     std::abs(b.outer.r - k * a.outer.r) / (k * a.outer.r));
  }
  std::ostringstream d;
  d << "worked example exact, worst relative error " << worst;
  detail = d.str();
  return worst <= 1e-9;
}

bool criterion_4(std::string& detail) {
  // radial step: area-coverage raster of intensity 0 inside radius 80,
  // 255 outside; annulus 60..100 maps the step to row 31.5
  GrayImage step(256, 256);
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      const double dist = std::hypot(x - 128.0, y - 128.0);
      const double coverage = std::clamp(dist - 80.0 + 0.5, 0.0, 1.0);
      step.at(x, y) = static_cast<std::uint8_t>(std::lround(255.0 * coverage));
    }
  }
  const ExtendedBoundaries annulus{{128, 128, 60}, {128, 128, 100}, 0.4, 0.4};
  const NormalizedTexture tex = rubber_sheet(step, annulus, 512, 64);
  for (int c = 0; c < 512; ++c) {
    int transition = -1;
    for (int r = 0; r < 64; ++r) {
      if (tex.at(c, r) >= 128.0f) {
        transition = r;
        break;
      }
    }
    if (transition < 31 || transition > 32) {
      detail = "column " + std::to_string(c) + " transitions at row " +
               std::to_string(transition);
      return false;
    }
  }

  // rotation equivariance over seeded generator images
  SynthParams params;
  params.seed = 7100;
  std::mt19937 rng(7101);
  double worst_mad = 0.0;
  for (int i = 0; i < 20; ++i) {
    const EyeSpec spec = draw_eye_spec(params, i, 1.0);
    const GrayImage img = render_eye(spec, params.image_size);
    const ExtendedBoundaries b = extend_boundaries(
        Segmentation{spec.pupil, spec.iris}, 0.4, 0.4);
    const int k = 1 + static_cast<int>(rng() % 511);
    const double angle = 2.0 * std::numbers::pi * k / 512.0;
    const GrayImage rotated =
        oracle::rotate_image(img, b.inner.cx, b.inner.cy, angle);

    const NormalizedTexture base = rubber_sheet(img, b, 512, 64);
    const NormalizedTexture turned = rubber_sheet(rotated, b, 512, 64);
    double mad = 0.0;
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 512; ++c) {
        mad += std::abs(turned.at(c, r) - base.at((c - k + 512) % 512, r));
      }
    }
    mad /= 512.0 * 64.0;
    worst_mad = std::max(worst_mad, mad);
  }
  std::ostringstream d;
  d << "step rows in {31,32}; worst rotation MAD " << worst_mad
    << " over 20 images";
  detail = d.str();
  return worst_mad <= 2.0;
}

bool criterion_5(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> size_dist(10, 50);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 20);

  for (int trial = 0; trial < 200; ++trial) {
    const int n = size_dist(rng);
    std::vector<ScoredSample> samples;
    for (int i = 0; i < n; ++i) {
      ScoredSample s;
      s.image_id = "s" + std::to_string(i);
      s.score = (rng() & 1) ? score(rng) : grid(rng) / 20.0;
      s.truth = (rng() & 1) ? PadLabel::Attack : PadLabel::BonaFide;
      samples.push_back(s);
    }
    samples[0].truth = PadLabel::Attack;
    samples[1].truth = PadLabel::BonaFide;

    const EerResult got = eer(samples);
    const oracle::EerPoint want = oracle::eer_brute_force(samples);
    if (got.eer != want.eer || got.threshold != want.threshold) {
      detail = "eer mismatch on trial " + std::to_string(trial);
      return false;
    }
    for (double target : {0.1, 1.0}) {
      if (bpcer_at_apcer(samples, target) !=
          oracle::bpcer_at_apcer_brute_force(samples, target)) {
        detail = "bpcer@apcer mismatch on trial " + std::to_string(trial);
        return false;
      }
    }
  }
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  std::ostringstream d;
  d << "200 sample sets, exact match, " << elapsed << " s";
  detail = d.str();
  return elapsed < 10.0;
}

bool criterion_6(std::string& detail) {
  const Dataset& ds = ring_dataset();
  const ExperimentResult result = run_experiment(
      default_experiment(Protocol::Standard, 9001), ds.records, ds.dir);
  const double hter = result.variants.at("standard").averaged.hter;

  const Dataset& null_ds = null_dataset();
  const ExperimentResult null_result = run_experiment(
      default_experiment(Protocol::Standard, 9002), null_ds.records,
      null_ds.dir);
  const double null_eer = null_result.variants.at("standard").averaged.eer;

  std::ostringstream d;
  d << "mean HTER " << hter << "% (<= 2), null-artifact mean EER " << null_eer
    << "% (in [40,60])";
  detail = d.str();
  return hter <= 2.0 && null_eer >= 40.0 && null_eer <= 60.0;
}

bool criterion_7(std::string& detail) {
  const Dataset& ds = ring_dataset();
  const ExperimentResult result = run_experiment(
      default_experiment(Protocol::FusionCompare, 9003), ds.records, ds.dir);
  const double mv = result.variants.at("majority_vote").averaged.hter;
  const double mean = result.variants.at("mean_score").averaged.hter;
  const double resize = result.variants.at("resize_baseline").averaged.hter;
  std::ostringstream d;
  d << "mean HTER: majority_vote " << mv << "%, mean_score " << mean
    << "%, resize_baseline " << resize << "%";
  detail = d.str();
  return mv <= resize;
}

bool criterion_8(std::string& detail) {
  const Dataset& ds = ring_dataset();
  ExperimentConfig cfg = default_experiment(Protocol::RingAnalysis, 9004);
  const ExperimentResult result = run_experiment(cfg, ds.records, ds.dir);

  int good_repeats = 0;
  std::ostringstream d;
  for (const RingProfile& profile : result.ring_profiles) {
    const auto min_it =
        std::min_element(profile.eers.begin(), profile.eers.end());
    const int min_ring = static_cast<int>(min_it - profile.eers.begin());
    const bool ok = min_ring >= 5 && min_ring <= 8 &&
                    profile.eers[0] > *min_it;
    good_repeats += ok;
    d << "[min ring " << min_ring << ", eer0 " << profile.eers[0] << "% vs "
      << *min_it << "%] ";
  }
  detail = d.str() + "-> " + std::to_string(good_repeats) + "/5 repeats";
  return good_repeats >= 4;
}

bool criterion_9(std::string& detail) {
  const Dataset& ds = soft_dataset();
  const ExperimentResult r1 = run_experiment(
      default_experiment(Protocol::SoftLens1, 9005), ds.records, ds.dir);
  const ExperimentResult r2 = run_experiment(
      default_experiment(Protocol::SoftLens2, 9005), ds.records, ds.dir);
  const double h1 = r1.variants.at("soft_lens_1").averaged.hter;
  const double h2 = r2.variants.at("soft_lens_2").averaged.hter;
  std::ostringstream d;
  d << "mean HTER soft_lens_1 " << h1 << "%, soft_lens_2 " << h2
    << "%, |diff| " << std::abs(h2 - h1) << " pp";
  detail = d.str();
  return std::abs(h2 - h1) <= 2.0;
}

bool criterion_10(std::string& detail) {
  SynthParams params;
  params.seed = 7010;
  params.n_bona_fide = 40;
  params.n_attack = 40;
  const Dataset ds = make_dataset("determinism", params);

  ExperimentConfig cfg = default_experiment(Protocol::Standard, 9006);
  cfg.repeat_count = 2;

  const fs::path out_a = g_work_dir / "rerun_a";
  const fs::path out_b = g_work_dir / "rerun_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  run_experiment(cfg, ds.records, ds.dir, out_a);
  run_experiment(cfg, ds.records, ds.dir, out_b);

  const std::vector<std::string> files = {"report.json",
                                          "models/standard_rep0.json",
                                          "models/standard_rep1.json"};
  for (const auto& f : files) {
    const auto a = file_bytes(out_a / f);
    const auto b = file_bytes(out_b / f);
    if (a.empty() || a != b) {
      detail = f + " differs between reruns";
      return false;
    }
  }
  detail = "report.json and model files byte-identical across reruns";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      g_work_dir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--work-dir DIR] [--only N]\n");
      return 2;
    }
  }
  fs::create_directories(g_work_dir);

  struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric arithmetic reproduces published HTER pairs", criterion_1},
      {2, "stripe count combinatorics", criterion_2},
      {3, "boundary extension scale equivariance", criterion_3},
      {4, "rubber-sheet geometry and rotation equivariance", criterion_4},
      {5, "EER and BPCER@APCER match the brute-force oracle", criterion_5},
      {6, "end-to-end synthetic detection", criterion_6},
      {7, "fusion strategy comparison", criterion_7},
      {8, "per-ring EER profile", criterion_8},
      {9, "soft-lens robustness", criterion_9},
      {10, "experiment determinism", criterion_10},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.number != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL",
                criterion.number, criterion.name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
  }
  return failures == 0 ? 0 : 1;
}
