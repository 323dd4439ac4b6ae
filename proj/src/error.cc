// Copyright 2026 The dpsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsteer/error.h"

namespace dpsteer {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInput:
      return "input";
    case ErrorKind::kLength:
      return "length";
    case ErrorKind::kVocabulary:
      return "vocabulary";
    case ErrorKind::kIndex:
      return "index";
    case ErrorKind::kParameter:
      return "parameter";
    case ErrorKind::kDivergence:
      return "divergence";
    case ErrorKind::kDegenerate:
      return "degenerate-direction";
    case ErrorKind::kInvalidBudget:
      return "invalid-budget";
    case ErrorKind::kStaleArtifact:
      return "stale-artifact";
    case ErrorKind::kNumerical:
      return "numerical";
  }
  return "unknown";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kStaleArtifact:
      return 3;
    case ErrorKind::kInvalidBudget:
      return 4;
    case ErrorKind::kDivergence:
    case ErrorKind::kDegenerate:
    case ErrorKind::kNumerical:
      return 5;
    default:
      return 2;
  }
}

}  // namespace dpsteer
