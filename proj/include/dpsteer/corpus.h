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

#ifndef DPSTEER_CORPUS_H_
#define DPSTEER_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dpsteer/records.h"
#include "dpsteer/rng.h"
#include "dpsteer/tokenizer.h"

namespace dpsteer {

// Bundled toy corpora. Each label ("pos", "neg") has a "real" generator
// (lowercase, casual dish reviews) and a shifted "reference" generator
// (upper-case field/value ratings). Texts stay under kMaxBundledTextLength
// characters so that a two-shot prompt plus a completion fits the default
// 128-token context.
enum class CorpusStyle { kReal, kReference };

inline constexpr int kMaxBundledTextLength = 32;

const std::vector<std::string>& BundledLabels();

std::string GenerateBundledText(CorpusStyle style, const std::string& label,
                                Rng& rng);

std::vector<Record> GenerateBundledCorpus(CorpusStyle style, int per_label,
                                          uint64_t seed);

// Alphabet covering both styles, the labels and the ':' separator.
Tokenizer BundledTokenizer();

struct TrainingCorpusOptions {
  int num_documents = 2000;
  int samples_per_document = 3;
  // Probability that the next sample in a document keeps the previous
  // sample's style.
  double style_persistence = 0.65;
  uint64_t seed = 0;
};

// Documents of consecutive same-label samples, each serialized as
// <begin> label ':' text <end>, styles drawn per sample.
std::vector<TokenSequence> BuildTrainingCorpus(
    const Tokenizer& tokenizer, const TrainingCorpusOptions& options);

// Encodes records as single-sample documents.
std::vector<TokenSequence> EncodeRecords(const Tokenizer& tokenizer,
                                         const std::vector<Record>& records);

}  // namespace dpsteer

#endif  // DPSTEER_CORPUS_H_
