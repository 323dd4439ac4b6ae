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

#ifndef DPSTEER_TOKENIZER_H_
#define DPSTEER_TOKENIZER_H_

#include <string>
#include <string_view>
#include <vector>

namespace dpsteer {

using TokenSequence = std::vector<int>;

// Deterministic byte-level character tokenizer. Ids 0..2 are reserved:
// unknown/pad, the sample-begin marker and the end-of-sample delimiter.
class Tokenizer {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kBegin = 1;
  static constexpr int kEnd = 2;
  static constexpr int kNumReserved = 3;

  Tokenizer() = default;
  // `alphabet` lists the ordinary characters; duplicates are dropped and the
  // remainder sorted so that the id assignment is canonical.
  explicit Tokenizer(std::string_view alphabet);

  // Alphabet covering every character that appears in `texts`.
  static Tokenizer FromTexts(const std::vector<std::string>& texts);

  int vocab_size() const {
    return kNumReserved + static_cast<int>(alphabet_.size());
  }
  const std::string& alphabet() const { return alphabet_; }

  // Characters outside the alphabet map to kUnknown.
  TokenSequence Encode(std::string_view text) const;
  // Reserved ids are dropped.
  std::string Decode(const TokenSequence& tokens) const;

  int Id(char c) const;

 private:
  std::string alphabet_;
  int lookup_[256] = {};
};

// Token layout of a labelled sample inside a prompt:
//   <begin> label ':' text <end>
// AppendSampleHeader writes everything up to and including ':'.
void AppendSampleHeader(const Tokenizer& tok, std::string_view label,
                        TokenSequence& out);

}  // namespace dpsteer

#endif  // DPSTEER_TOKENIZER_H_
