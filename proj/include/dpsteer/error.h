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

#ifndef DPSTEER_ERROR_H_
#define DPSTEER_ERROR_H_

#include <stdexcept>
#include <string>

namespace dpsteer {

enum class ErrorKind {
  kInput,          // malformed or missing input
  kLength,         // sequence exceeds the model context
  kVocabulary,     // token id outside the vocabulary
  kIndex,          // layer / bin / candidate index out of range
  kParameter,      // invalid numeric parameter
  kDivergence,     // training produced a non-finite loss
  kDegenerate,     // zero-norm direction after noising
  kInvalidBudget,  // composed budget is not a valid (epsilon, delta) pair
  kStaleArtifact,  // upstream artifact hash mismatch
  kNumerical,      // any other non-finite intermediate
};

const char* ErrorKindName(ErrorKind kind);

// CLI exit code for an error category: 2 input, 3 stale artifact,
// 4 budget violation, 5 internal numerical error.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dpsteer

#endif  // DPSTEER_ERROR_H_
