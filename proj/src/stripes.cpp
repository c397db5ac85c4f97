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

#include "msa/stripes.hpp"

#include <algorithm>
#include <numeric>

#include "msa/error.hpp"
#include "msa/rng.hpp"

namespace msa {

int stripe_count(int texture_height, int stripe_height, int stride) {
  if (stripe_height < 1 || stripe_height > texture_height || stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad stripe geometry");
  }
  return (texture_height - stripe_height) / stride + 1;
}

MicroStripe stripe_at(const NormalizedTexture& tex, int row_offset,
                      int height) {
  if (row_offset < 0 || height < 1 || row_offset + height > tex.height) {
    throw Error(ErrorCode::InvalidArgument, "stripe outside texture");
  }
  MicroStripe s;
  s.row_offset = row_offset;
  s.height = height;
  s.width = tex.width;
  s.values.assign(
      tex.values.begin() + static_cast<std::size_t>(row_offset) * tex.width,
      tex.values.begin() +
          static_cast<std::size_t>(row_offset + height) * tex.width);
  return s;
}

StripeSet extract_stripes(const NormalizedTexture& tex, int height, int stride,
                          std::string source_id) {
  if (height > tex.height) {
    throw Error(ErrorCode::InvalidArgument,
                "stripe height exceeds texture height");
  }
  if (height < 1 || stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad stripe geometry");
  }
  StripeSet set;
  set.source_id = std::move(source_id);
  set.stride = stride;
  for (int offset = 0; offset + height <= tex.height; offset += stride) {
    set.stripes.push_back(stripe_at(tex, offset, height));
  }
  return set;
}

StripeSet sample_odd_stripes(const StripeSet& set, int k, std::uint64_t seed) {
  const int n = static_cast<int>(set.stripes.size());
  if (k < 1 || k % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "sample count must be odd");
  }
  if (k > n) {
    throw Error(ErrorCode::InvalidArgument,
                "sample count exceeds available stripes");
  }
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {  // partial Fisher-Yates
    const int j = i + static_cast<int>(rng.below(n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(k);
  std::sort(indices.begin(), indices.end());

  StripeSet out;
  out.source_id = set.source_id;
  out.stride = set.stride;
  for (int i : indices) out.stripes.push_back(set.stripes[i]);
  return out;
}

}  // namespace msa
