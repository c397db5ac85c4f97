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

#include "msa/pad_label.hpp"

#include "msa/error.hpp"

namespace msa {

const char* pad_label_name(PadLabel label) {
  return label == PadLabel::Attack ? "attack" : "bona_fide";
}

PadLabel pad_label_from_string(const std::string& s) {
  if (s == "attack") return PadLabel::Attack;
  if (s == "bona_fide") return PadLabel::BonaFide;
  throw Error(ErrorCode::ParseError, "unknown pad label: " + s);
}

}  // namespace msa
