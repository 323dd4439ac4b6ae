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

#ifndef DPSTEER_PROMPT_H_
#define DPSTEER_PROMPT_H_

#include <string>
#include <vector>

#include "dpsteer/tokenizer.h"

namespace dpsteer {

// Few-shot scaffold: every shot rendered as a complete sample, followed by
// the header of the sample to be written. With no shots this is the
// zero-shot prompt used for the candidate pool.
//
//   <begin>label:shot_1<end> ... <begin>label:shot_k<end> <begin>label:
struct Scaffold {
  std::string label;
  std::vector<std::string> shots;

  TokenSequence Encode(const Tokenizer& tokenizer) const;
  // Identity of the rendered scaffold, used to verify reuse across stages.
  std::string Hash() const;
};

}  // namespace dpsteer

#endif  // DPSTEER_PROMPT_H_
