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

#include "msa/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "msa/error.hpp"

namespace msa {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw Error(ErrorCode::ParseError, "unknown split: " + s);
}

const char* lens_type_name(LensType t) {
  switch (t) {
    case LensType::None: return "none";
    case LensType::Soft: return "soft";
    case LensType::Textured: return "textured";
    case LensType::Printout: return "printout";
    case LensType::TexturedPrintout: return "textured_printout";
  }
  return "unknown";
}

LensType lens_type_from_string(const std::string& s) {
  if (s == "none") return LensType::None;
  if (s == "soft") return LensType::Soft;
  if (s == "textured") return LensType::Textured;
  if (s == "printout") return LensType::Printout;
  if (s == "textured_printout") return LensType::TexturedPrintout;
  throw Error(ErrorCode::ParseError, "unknown lens type: " + s);
}

PadLabel implied_truth(LensType t) {
  switch (t) {
    case LensType::None:
    case LensType::Soft:
      return PadLabel::BonaFide;
    default:
      return PadLabel::Attack;
  }
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  std::vector<ManifestRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "image_id,path,split,truth,lens_type,segmentation_ref") {
        throw Error(ErrorCode::ParseError,
                    "unexpected manifest header at line " +
                        std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }

    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() != 6) {
      throw Error(ErrorCode::ParseError,
                  "manifest row needs 6 fields at line " +
                      std::to_string(line_no));
    }

    ManifestRecord r;
    r.image_id = fields[0];
    r.path = fields[1];
    if (r.image_id.empty() || r.path.empty()) {
      throw Error(ErrorCode::ParseError,
                  "empty image_id or path at line " + std::to_string(line_no));
    }
    try {
      r.split = split_from_string(fields[2]);
      r.truth = pad_label_from_string(fields[3]);
      r.lens_type = lens_type_from_string(fields[4]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError,
                  std::string(e.what()) + " at line " + std::to_string(line_no));
    }
    r.segmentation_ref = fields[5];

    if (r.truth != implied_truth(r.lens_type)) {
      throw Error(ErrorCode::ConsistencyError,
                  "truth contradicts lens_type at line " +
                      std::to_string(line_no));
    }
    if (!seen_ids.insert(r.image_id).second) {
      throw Error(ErrorCode::DuplicateKey,
                  "duplicate image_id '" + r.image_id + "' at line " +
                      std::to_string(line_no));
    }
    records.push_back(std::move(r));
  }
  if (!header_seen) {
    throw Error(ErrorCode::ParseError, "empty manifest: " + path.string());
  }
  return records;
}

void save_manifest(const std::vector<ManifestRecord>& records,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# format_version: 1\n";
  out << "image_id,path,split,truth,lens_type,segmentation_ref\n";
  for (const auto& r : records) {
    out << r.image_id << "," << r.path << "," << split_name(r.split) << ","
        << pad_label_name(r.truth) << "," << lens_type_name(r.lens_type)
        << "," << r.segmentation_ref << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path.string());
}

Segmentation resolve_segmentation_ref(const std::string& ref,
                                      const std::filesystem::path& base_dir) {
  if (ref.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty segmentation reference");
  }
  std::string file = ref;
  int index = 0;
  const auto colon = ref.rfind(':');
  if (colon != std::string::npos && colon + 1 < ref.size()) {
    const std::string tail = ref.substr(colon + 1);
    if (!tail.empty() &&
        std::all_of(tail.begin(), tail.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
      file = ref.substr(0, colon);
      index = std::stoi(tail);
    }
  }
  std::filesystem::path p(file);
  if (p.is_relative()) p = base_dir / p;
  return load_segmentation(p, index);
}

std::vector<ManifestRecord> ensure_dev_split(
    std::vector<ManifestRecord> records) {
  const bool has_dev = std::any_of(
      records.begin(), records.end(),
      [](const ManifestRecord& r) { return r.split == Split::Dev; });
  if (has_dev) return records;

  // stable per-class order, every 4th train record moves to dev
  std::map<PadLabel, std::vector<std::size_t>> train_by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == Split::Train) {
      train_by_class[records[i].truth].push_back(i);
    }
  }
  for (auto& [label, indices] : train_by_class) {
    std::sort(indices.begin(), indices.end(),
              [&](std::size_t a, std::size_t b) {
                return records[a].image_id < records[b].image_id;
              });
    for (std::size_t k = 3; k < indices.size(); k += 4) {
      records[indices[k]].split = Split::Dev;
    }
  }
  return records;
}

}  // namespace msa
