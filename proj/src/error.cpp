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

#include "msa/error.hpp"

namespace msa {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::UnsupportedFormat: return "unsupported_format";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::EmptyImage: return "empty_image";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::SegmentationFailed: return "segmentation_failed";
    case ErrorCode::MalformedSegmentation: return "malformed_segmentation";
    case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::SingleClass: return "single_class";
    case ErrorCode::TrainingDiverged: return "training_diverged";
    case ErrorCode::FeatureMismatch: return "feature_mismatch";
    case ErrorCode::DuplicateKey: return "duplicate_key";
    case ErrorCode::RangeError: return "range_error";
    case ErrorCode::MissingClass: return "missing_class";
    case ErrorCode::ConsistencyError: return "consistency_error";
    case ErrorCode::ProtocolError: return "protocol_error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace msa
