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

#include "msa/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "msa/error.hpp"
#include "msa/rng.hpp"

namespace msa {

std::string FeatureConfig::hash() const {
  std::ostringstream s;
  s << "ulbp8r1-59:w" << stripe_width << ":h" << stripe_height << ":cx"
    << cells_x << ":cy" << cells_y;
  return s.str();
}

namespace {

int quantize(float v) {
  return std::clamp(static_cast<int>(std::lround(v)), 0, 255);
}

// circular neighborhood at radius 1, consecutive positions adjacent
constexpr int kNeighborDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kNeighborDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int circular_transitions(int code) {
  int transitions = 0;
  for (int i = 0; i < 8; ++i) {
    const int a = (code >> i) & 1;
    const int b = (code >> ((i + 1) % 8)) & 1;
    transitions += a != b;
  }
  return transitions;
}

const std::array<int, 256>& uniform_bin_table() {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    int next = 0;
    for (int code = 0; code < 256; ++code) {
      t[code] = circular_transitions(code) <= 2 ? next++ : -1;
    }
    for (int code = 0; code < 256; ++code) {
      if (t[code] < 0) t[code] = 58;  // catch-all for non-uniform codes
    }
    return t;
  }();
  return table;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot(const std::vector<double>& w, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

double cross_entropy(const std::vector<double>& w, double b,
                     const std::vector<FeatureVector>& features,
                     const std::vector<PadLabel>& labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double p =
        std::clamp(sigmoid(dot(w, features[i].values) + b), 1e-12, 1.0 - 1e-12);
    const double y = labels[i] == PadLabel::Attack ? 1.0 : 0.0;
    loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return loss / static_cast<double>(features.size());
}

}  // namespace

int uniform_lbp_bin(int code) { return uniform_bin_table()[code & 0xff]; }

int lbp_code_at(const MicroStripe& stripe, int x, int y) {
  if (x < 1 || y < 1 || x + 1 >= stripe.width || y + 1 >= stripe.height) {
    throw Error(ErrorCode::InvalidArgument,
                "lbp code requires an interior pixel");
  }
  const int center = quantize(stripe.at(x, y));
  int code = 0;
  for (int i = 0; i < 8; ++i) {
    const int neighbor =
        quantize(stripe.at(x + kNeighborDx[i], y + kNeighborDy[i]));
    if (neighbor >= center) code |= 1 << i;
  }
  return code;
}

FeatureVector lbp_features(const MicroStripe& stripe, int cells_x,
                           int cells_y) {
  if (cells_x < 1 || cells_y < 1 || stripe.width / cells_x < 3 ||
      stripe.height / cells_y < 3) {
    throw Error(ErrorCode::InvalidArgument,
                "stripe too small for the requested cell grid (cells need >= 3x3 pixels)");
  }

  // cell index lookups, consistent with even-division boundaries
  std::vector<int> cell_of_x(stripe.width), cell_of_y(stripe.height);
  for (int c = 0; c < cells_x; ++c) {
    const int x0 = static_cast<int>(static_cast<long long>(c) * stripe.width / cells_x);
    const int x1 = static_cast<int>(static_cast<long long>(c + 1) * stripe.width / cells_x);
    for (int x = x0; x < x1; ++x) cell_of_x[x] = c;
  }
  for (int c = 0; c < cells_y; ++c) {
    const int y0 = static_cast<int>(static_cast<long long>(c) * stripe.height / cells_y);
    const int y1 = static_cast<int>(static_cast<long long>(c + 1) * stripe.height / cells_y);
    for (int y = y0; y < y1; ++y) cell_of_y[y] = c;
  }

  const int n_cells = cells_x * cells_y;
  std::vector<double> hist(static_cast<std::size_t>(n_cells) * 59, 0.0);
  for (int y = 1; y + 1 < stripe.height; ++y) {
    for (int x = 1; x + 1 < stripe.width; ++x) {
      const int cell = cell_of_y[y] * cells_x + cell_of_x[x];
      const int bin = uniform_lbp_bin(lbp_code_at(stripe, x, y));
      hist[static_cast<std::size_t>(cell) * 59 + bin] += 1.0;
    }
  }
  for (int cell = 0; cell < n_cells; ++cell) {
    double total = 0.0;
    for (int b = 0; b < 59; ++b) total += hist[cell * 59 + b];
    if (total > 0.0) {
      for (int b = 0; b < 59; ++b) hist[cell * 59 + b] /= total;
    }
  }

  FeatureVector fv;
  fv.values = std::move(hist);
  FeatureConfig cfg{cells_x, cells_y, stripe.width, stripe.height};
  fv.config_hash = cfg.hash();
  return fv;
}

ClassifierModel train(const std::vector<FeatureVector>& features,
                      const std::vector<PadLabel>& labels,
                      const std::vector<FeatureVector>& dev_features,
                      const std::vector<PadLabel>& dev_labels,
                      const TrainConfig& cfg,
                      const FeatureConfig& feature_config) {
  if (features.empty() || features.size() != labels.size() ||
      dev_features.size() != dev_labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "inconsistent training inputs");
  }
  if (cfg.max_epochs < 1 || cfg.early_stop_patience < 1 ||
      cfg.batch_size < 1 || !(cfg.learning_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bad training configuration");
  }
  const std::size_t dim = features[0].values.size();
  for (const auto& f : features) {
    if (f.values.size() != dim) {
      throw Error(ErrorCode::FeatureMismatch,
                  "training features have inconsistent lengths");
    }
  }
  for (const auto& f : dev_features) {
    if (f.values.size() != dim) {
      throw Error(ErrorCode::FeatureMismatch,
                  "dev features have inconsistent lengths");
    }
  }
  const auto n_attack = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), PadLabel::Attack));
  if (n_attack == 0 || n_attack == labels.size()) {
    throw Error(ErrorCode::SingleClass,
                "training set needs both bona fide and attack examples");
  }

  std::vector<double> w(dim, 0.0), acc_w(dim, 0.0);
  double b = 0.0, acc_b = 0.0;
  std::vector<double> grad(dim, 0.0);

  std::vector<double> best_w = w;
  double best_b = b;
  double best_dev = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;
  int epochs_run = 0;
  const bool use_dev = !dev_features.empty();

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_n = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = features[order[k]].values;
        const double y = labels[order[k]] == PadLabel::Attack ? 1.0 : 0.0;
        const double g = (sigmoid(dot(w, x) + b) - y) * inv_n;
        for (std::size_t i = 0; i < dim; ++i) grad[i] += g * x[i];
        grad_b += g;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        acc_w[i] = cfg.rms_decay * acc_w[i] +
                   (1.0 - cfg.rms_decay) * grad[i] * grad[i];
        w[i] -= cfg.learning_rate * grad[i] /
                (std::sqrt(acc_w[i]) + cfg.rms_epsilon);
      }
      acc_b = cfg.rms_decay * acc_b + (1.0 - cfg.rms_decay) * grad_b * grad_b;
      b -= cfg.learning_rate * grad_b / (std::sqrt(acc_b) + cfg.rms_epsilon);
    }
    epochs_run = epoch + 1;

    const double train_loss = cross_entropy(w, b, features, labels);
    if (!std::isfinite(train_loss)) {
      throw Error(ErrorCode::TrainingDiverged, "non-finite training loss");
    }
    if (use_dev) {
      const double dev_loss = cross_entropy(w, b, dev_features, dev_labels);
      if (!std::isfinite(dev_loss)) {
        throw Error(ErrorCode::TrainingDiverged, "non-finite dev loss");
      }
      if (dev_loss < best_dev) {
        best_dev = dev_loss;
        best_w = w;
        best_b = b;
        epochs_since_best = 0;
      } else if (++epochs_since_best >= cfg.early_stop_patience) {
        break;
      }
    } else {
      best_w = w;
      best_b = b;
      best_dev = train_loss;
    }
  }

  ClassifierModel model;
  model.weights = std::move(best_w);
  model.bias = best_b;
  model.feature_config = feature_config;
  model.training_meta.seed = cfg.seed;
  model.training_meta.epochs_run = epochs_run;
  model.training_meta.final_train_loss =
      cross_entropy(model.weights, model.bias, features, labels);
  model.training_meta.best_dev_loss = best_dev;
  return model;
}

double predict(const ClassifierModel& model, const FeatureVector& features) {
  if (features.values.size() != model.weights.size()) {
    throw Error(ErrorCode::FeatureMismatch,
                "feature length does not match model weights");
  }
  return sigmoid(dot(model.weights, features.values) + model.bias);
}

StripeScore score_stripe(const ClassifierModel& model,
                         const MicroStripe& stripe) {
  const auto& fc = model.feature_config;
  if (stripe.width != fc.stripe_width || stripe.height != fc.stripe_height) {
    throw Error(ErrorCode::FeatureMismatch,
                "stripe dimensions do not match the model configuration");
  }
  const FeatureVector fv = lbp_features(stripe, fc.cells_x, fc.cells_y);
  return StripeScore{predict(model, fv), stripe.row_offset};
}

void save_model(const ClassifierModel& model,
                const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["feature_config"] = {{"cells_x", model.feature_config.cells_x},
                         {"cells_y", model.feature_config.cells_y},
                         {"stripe_width", model.feature_config.stripe_width},
                         {"stripe_height", model.feature_config.stripe_height}};
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["training_meta"] = {
      {"seed", model.training_meta.seed},
      {"epochs_run", model.training_meta.epochs_run},
      {"final_train_loss", model.training_meta.final_train_loss},
      {"best_dev_loss", model.training_meta.best_dev_loss}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError,
                "bad model json in " + path.string() + ": " + e.what());
  }
  ClassifierModel model;
  try {
    const auto& fc = j.at("feature_config");
    model.feature_config.cells_x = fc.at("cells_x").get<int>();
    model.feature_config.cells_y = fc.at("cells_y").get<int>();
    model.feature_config.stripe_width = fc.at("stripe_width").get<int>();
    model.feature_config.stripe_height = fc.at("stripe_height").get<int>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    const auto& tm = j.at("training_meta");
    model.training_meta.seed = tm.at("seed").get<std::uint64_t>();
    model.training_meta.epochs_run = tm.at("epochs_run").get<int>();
    model.training_meta.final_train_loss =
        tm.at("final_train_loss").get<double>();
    model.training_meta.best_dev_loss = tm.at("best_dev_loss").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError,
                "model json missing fields in " + path.string() + ": " +
                    e.what());
  }
  if (static_cast<int>(model.weights.size()) !=
      model.feature_config.feature_length()) {
    throw Error(ErrorCode::ParseError,
                "model weight length does not match its feature config");
  }
  return model;
}

std::map<ScoreKey, StripeScore> import_scores(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  std::map<ScoreKey, StripeScore> out;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "image_id,stripe_offset,p_attack") {
        throw Error(ErrorCode::ParseError,
                    "unexpected score csv header at line " +
                        std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string id, offset_str, p_str;
    if (!std::getline(ss, id, ',') || !std::getline(ss, offset_str, ',') ||
        !std::getline(ss, p_str)) {
      throw Error(ErrorCode::ParseError,
                  "bad score row at line " + std::to_string(line_no));
    }
    int offset = 0;
    double p = 0.0;
    try {
      std::size_t used = 0;
      offset = std::stoi(offset_str, &used);
      if (used != offset_str.size()) throw std::invalid_argument("offset");
      p = std::stod(p_str, &used);
      if (used != p_str.size()) throw std::invalid_argument("p");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError,
                  "non-numeric score fields at line " + std::to_string(line_no));
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::RangeError,
                  "p_attack outside [0,1] at line " + std::to_string(line_no));
    }
    const ScoreKey key{id, offset};
    if (out.count(key)) {
      throw Error(ErrorCode::DuplicateKey,
                  "duplicate (image_id, stripe_offset) at line " +
                      std::to_string(line_no));
    }
    out.emplace(key, StripeScore{p, offset});
  }
  if (!header_seen) {
    throw Error(ErrorCode::ParseError, "empty score csv: " + path.string());
  }
  return out;
}

void export_scores(const std::vector<std::pair<std::string, StripeScore>>& rows,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "image_id,stripe_offset,p_attack\n";
  out.precision(17);
  for (const auto& [id, score] : rows) {
    out << id << "," << score.stripe_offset << "," << score.p_attack << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

}  // namespace msa
