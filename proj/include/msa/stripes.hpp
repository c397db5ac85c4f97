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

#include <cstdint>
#include <string>
#include <vector>

#include "msa/normalization.hpp"

namespace msa {

/// Fixed-height horizontal slice of a normalized texture. Values are copied,
/// not aliased.
struct MicroStripe {
  int row_offset = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;  // row-major

  float at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

struct StripeSet {
  std::vector<MicroStripe> stripes;  // ordered by increasing row_offset
  std::string source_id;
  int stride = 0;
};

// floor((texture_height - stripe_height) / stride) + 1
int stripe_count(int texture_height, int stripe_height, int stride);

// Stripes at offsets 0, stride, 2*stride, ... while offset+height stays
// within the texture. Offsets that would overrun are not emitted.
StripeSet extract_stripes(const NormalizedTexture& tex, int height, int stride,
                          std::string source_id = {});

MicroStripe stripe_at(const NormalizedTexture& tex, int row_offset,
                      int height);

// k distinct stripes drawn uniformly without replacement with the seeded
// generator; the result keeps row_offset order. k must be odd.
StripeSet sample_odd_stripes(const StripeSet& set, int k, std::uint64_t seed);

}  // namespace msa
