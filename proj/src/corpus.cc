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

#include "dpsteer/corpus.h"

#include <array>
#include <random>
#include <string_view>

#include "dpsteer/error.h"

namespace dpsteer {

namespace {

template <size_t N>
const std::string& Pick(const std::array<std::string, N>& options, Rng& rng) {
  std::uniform_int_distribution<size_t> d(0, N - 1);
  return options[d(rng)];
}

const std::array<std::string, 10> kDishes = {"soup", "pasta", "bread", "tea",
                                             "cake", "rice",  "fish",  "salad",
                                             "pie",  "coffee"};
const std::array<std::string, 7> kRealPos = {
    "great", "lovely", "fresh", "tasty", "warm", "perfect", "sweet"};
const std::array<std::string, 7> kRealNeg = {"cold",  "bland", "stale", "awful",
                                             "soggy", "salty", "burnt"};

const std::array<std::string, 6> kFields = {"FOOD", "STAFF", "PRICE",
                                            "MENU", "ROOM",  "SERVICE"};
const std::array<std::string, 5> kRefPos = {"GOOD", "NICE", "FINE", "TOP",
                                            "OK"};
const std::array<std::string, 5> kRefNeg = {"BAD", "POOR", "RUDE", "SLOW",
                                            "LOW"};

std::string RealText(bool positive, Rng& rng) {
  const auto& adj = positive ? kRealPos : kRealNeg;
  const std::string& dish = Pick(kDishes, rng);
  const std::string& a = Pick(adj, rng);
  std::uniform_int_distribution<int> form(0, 4);
  switch (form(rng)) {
    case 0:
      return "the " + dish + " was " + a;
    case 1: {
      const std::string& b = Pick(adj, rng);
      return "the " + dish + " was " + a + " and " + b;
    }
    case 2:
      return a + " " + dish + (positive ? ", will be back" : ", never again");
    case 3:
      return (positive ? "loved the " : "hated the ") + dish + ", so " + a;
    default:
      return "my " + dish + " was " + a + " too";
  }
}

std::string ReferenceText(bool positive, Rng& rng) {
  const auto& adj = positive ? kRefPos : kRefNeg;
  std::uniform_int_distribution<int> form(0, 2);
  std::uniform_int_distribution<int> stars(positive ? 4 : 1, positive ? 5 : 2);
  switch (form(rng)) {
    case 0:
      return Pick(kFields, rng) + ": " + Pick(adj, rng) + ". " +
             Pick(kFields, rng) + ": " + Pick(adj, rng) + ".";
    case 1:
      return Pick(adj, rng) + " " + Pick(kFields, rng) + ". " +
             std::to_string(stars(rng)) + "/5";
    default:
      return "RATING " + std::to_string(stars(rng)) + "/5. " +
             Pick(kFields, rng) + " " + Pick(adj, rng) + ".";
  }
}

void AppendSample(const Tokenizer& tok, const std::string& label,
                  const std::string& text, TokenSequence& out) {
  AppendSampleHeader(tok, label, out);
  for (int id : tok.Encode(text)) out.push_back(id);
  out.push_back(Tokenizer::kEnd);
}

}  // namespace

const std::vector<std::string>& BundledLabels() {
  static const std::vector<std::string> labels = {"pos", "neg"};
  return labels;
}

std::string GenerateBundledText(CorpusStyle style, const std::string& label,
                                Rng& rng) {
  if (label != "pos" && label != "neg") {
    throw Error(ErrorKind::kInput,
                "bundled corpora have no label '" + label + "'");
  }
  const bool positive = label == "pos";
  std::string text = style == CorpusStyle::kReal ? RealText(positive, rng)
                                                 : ReferenceText(positive, rng);
  if (text.size() > static_cast<size_t>(kMaxBundledTextLength)) {
    text.resize(kMaxBundledTextLength);
  }
  return text;
}

std::vector<Record> GenerateBundledCorpus(CorpusStyle style, int per_label,
                                          uint64_t seed) {
  Rng rng(seed);
  std::vector<Record> out;
  for (const auto& label : BundledLabels()) {
    for (int i = 0; i < per_label; ++i) {
      out.push_back({GenerateBundledText(style, label, rng), label});
    }
  }
  return out;
}

Tokenizer BundledTokenizer() {
  std::string alphabet = " ,.:/!";
  for (char c = 'a'; c <= 'z'; ++c) alphabet.push_back(c);
  for (char c = 'A'; c <= 'Z'; ++c) alphabet.push_back(c);
  for (char c = '0'; c <= '9'; ++c) alphabet.push_back(c);
  return Tokenizer(alphabet);
}

std::vector<TokenSequence> BuildTrainingCorpus(
    const Tokenizer& tokenizer, const TrainingCorpusOptions& options) {
  if (options.num_documents < 1 || options.samples_per_document < 1) {
    throw Error(ErrorKind::kParameter, "training corpus must be nonempty");
  }
  Rng rng(options.seed);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution keep(options.style_persistence);
  std::vector<TokenSequence> docs;
  docs.reserve(options.num_documents);
  for (int i = 0; i < options.num_documents; ++i) {
    const std::string& label = BundledLabels()[coin(rng) ? 0 : 1];
    CorpusStyle style =
        coin(rng) ? CorpusStyle::kReal : CorpusStyle::kReference;
    TokenSequence doc;
    for (int s = 0; s < options.samples_per_document; ++s) {
      if (s > 0 && !keep(rng)) {
        style = style == CorpusStyle::kReal ? CorpusStyle::kReference
                                            : CorpusStyle::kReal;
      }
      AppendSample(tokenizer, label, GenerateBundledText(style, label, rng),
                   doc);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<TokenSequence> EncodeRecords(const Tokenizer& tokenizer,
                                         const std::vector<Record>& records) {
  std::vector<TokenSequence> out;
  for (const auto& r : records) {
    TokenSequence seq;
    AppendSample(tokenizer, r.label, r.text, seq);
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace dpsteer
