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

#include "dpsteer/tokenizer.h"

#include <algorithm>

namespace dpsteer {

Tokenizer::Tokenizer(std::string_view alphabet) : alphabet_(alphabet) {
  std::sort(alphabet_.begin(), alphabet_.end());
  alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()),
                  alphabet_.end());
  for (size_t i = 0; i < alphabet_.size(); ++i) {
    lookup_[static_cast<unsigned char>(alphabet_[i])] =
        kNumReserved + static_cast<int>(i);
  }
}

Tokenizer Tokenizer::FromTexts(const std::vector<std::string>& texts) {
  bool seen[256] = {};
  for (const auto& t : texts) {
    for (char c : t) seen[static_cast<unsigned char>(c)] = true;
  }
  std::string alphabet;
  for (int c = 1; c < 256; ++c) {
    if (seen[c]) alphabet.push_back(static_cast<char>(c));
  }
  return Tokenizer(alphabet);
}

int Tokenizer::Id(char c) const {
  return lookup_[static_cast<unsigned char>(c)];
}

TokenSequence Tokenizer::Encode(std::string_view text) const {
  TokenSequence out;
  out.reserve(text.size());
  for (char c : text) out.push_back(Id(c));
  return out;
}

std::string Tokenizer::Decode(const TokenSequence& tokens) const {
  std::string out;
  out.reserve(tokens.size());
  for (int id : tokens) {
    if (id >= kNumReserved && id < vocab_size()) {
      out.push_back(alphabet_[id - kNumReserved]);
    }
  }
  return out;
}

void AppendSampleHeader(const Tokenizer& tok, std::string_view label,
                        TokenSequence& out) {
  out.push_back(Tokenizer::kBegin);
  for (char c : label) out.push_back(tok.Id(c));
  out.push_back(tok.Id(':'));
}

}  // namespace dpsteer
