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

#include "dpsteer/prompt.h"

#include "dpsteer/hash.h"

namespace dpsteer {

TokenSequence Scaffold::Encode(const Tokenizer& tokenizer) const {
  TokenSequence out;
  for (const auto& shot : shots) {
    AppendSampleHeader(tokenizer, label, out);
    for (int id : tokenizer.Encode(shot)) out.push_back(id);
    out.push_back(Tokenizer::kEnd);
  }
  AppendSampleHeader(tokenizer, label, out);
  return out;
}

std::string Scaffold::Hash() const {
  ContentHasher h;
  h.UpdateField(label);
  h.UpdateValue<uint64_t>(shots.size());
  for (const auto& s : shots) h.UpdateField(s);
  return h.hex();
}

}  // namespace dpsteer
