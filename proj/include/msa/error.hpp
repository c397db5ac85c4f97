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

#include <stdexcept>
#include <string>

namespace msa {

enum class ErrorCode {
  IoError,                // file unreadable / unwritable
  UnsupportedFormat,      // recognizable container, unsupported flavor
  ParseError,             // malformed or truncated content
  EmptyImage,             // zero-dimension raster
  InvalidArgument,        // precondition violation on an in-process call
  SegmentationFailed,     // no circle above the accumulator threshold
  MalformedSegmentation,  // parsed circles violate segmentation invariants
  DegenerateGeometry,     // boundary extension collapsed the annulus
  SingleClass,            // training set lacks one of the two classes
  TrainingDiverged,       // non-finite loss during optimization
  FeatureMismatch,        // feature vector incompatible with model
  DuplicateKey,           // repeated image id / (image, stripe) key
  RangeError,             // numeric field outside its documented range
  MissingClass,           // metric input lacks attacks or bona fides
  ConsistencyError,       // manifest fields contradict each other
  ProtocolError,          // experiment protocol cannot run on this manifest
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace msa
