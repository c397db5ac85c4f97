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

#include <filesystem>
#include <string>
#include <vector>

#include "msa/pad_label.hpp"
#include "msa/segmentation.hpp"

namespace msa {

enum class Split { Train, Dev, Test };
enum class LensType { None, Soft, Textured, Printout, TexturedPrintout };

const char* split_name(Split s);
Split split_from_string(const std::string& s);
const char* lens_type_name(LensType t);
LensType lens_type_from_string(const std::string& s);

// The label a lens type implies: textured lenses and printouts are attacks;
// no lens and soft (transparent) lenses are bona fide.
PadLabel implied_truth(LensType t);

struct ManifestRecord {
  std::string image_id;
  std::string path;  // relative to the manifest directory unless absolute
  Split split = Split::Train;
  PadLabel truth = PadLabel::BonaFide;
  LensType lens_type = LensType::None;
  std::string segmentation_ref;  // "file.txt" or "file.txt:<line>", optional
};

// Manifest CSV with header
// `image_id,path,split,truth,lens_type,segmentation_ref`; `#` lines are
// comments. Rejects duplicate ids and (truth, lens_type) contradictions,
// reporting line numbers.
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<ManifestRecord>& records,
                   const std::filesystem::path& path);

// Resolves "seg.txt:<line>" (line defaults to 0) against the manifest
// directory.
Segmentation resolve_segmentation_ref(const std::string& ref,
                                      const std::filesystem::path& base_dir);

// When a manifest carries no dev rows, reassigns every 4th train record per
// class (stable image_id order) to dev, turning an 80/20 train/test layout
// into the default 60/20/20.
std::vector<ManifestRecord> ensure_dev_split(std::vector<ManifestRecord> records);

}  // namespace msa
