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

#ifndef DPSTEER_FIXEDSHOTS_H_
#define DPSTEER_FIXEDSHOTS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpsteer/matrix.h"
#include "dpsteer/privacy.h"
#include "dpsteer/prompt.h"

namespace dpsteer {

// Zero-shot generated candidates for one attribute and their embeddings.
struct CandidatePool {
  std::string label;
  std::vector<std::string> texts;
  Matrix embeddings;  // row j embeds texts[j]
  std::string provenance = "zero-shot";

  std::string Hash() const;
};

// Index of the most cosine-similar candidate for each private row; ties go
// to the lowest index. Throws kInput on a zero-norm row or empty input.
std::vector<int> AssignNearest(const Matrix& private_embeddings,
                               const Matrix& candidate_embeddings);

// h_j = |{i : assignment[i] = j}|. Throws kIndex on an out-of-range entry.
std::vector<int64_t> BuildHistogram(std::span<const int> assignment,
                                    int num_candidates);

// Substitution moves one unit of count between two bins, so the histogram's
// l2-sensitivity is sqrt(2).
inline constexpr double kHistogramSensitivity = 1.4142135623730951;

double SigmaForHistogram(const PrivacyBudget& budget);

struct CoverageHistogram {
  std::vector<int64_t> counts;
  std::vector<double> noised;
  double sigma = 0.0;
  uint64_t seed = 0;
};

// h~_j = h_j + N(0, sigma^2), drawn in index order from `seed`.
CoverageHistogram PrivatizeHistogram(std::vector<int64_t> counts, double sigma,
                                     uint64_t seed);

// Indices of the k largest scores, in descending score order, ties broken
// by the lower index. Throws kParameter unless 1 <= k <= size.
std::vector<int> TopK(std::span<const double> scores, int k);

struct FixedShotSet {
  std::string label;
  int k = 0;
  std::vector<int> indices;  // into the candidate pool
  std::vector<std::string> exemplars;
  double sigma = 0.0;
  PrivacyBudget budget;
  uint64_t seed = 0;
  std::string pool_hash;

  Scaffold ToScaffold() const { return {label, exemplars}; }
  // Content hash over label and exemplar texts.
  std::string Hash() const { return ToScaffold().Hash(); }
};

FixedShotSet SelectFixedShots(const CoverageHistogram& histogram,
                              const CandidatePool& pool, int k);

// assign -> histogram -> noise -> top-k. Only candidate texts leave.
FixedShotSet PrivateFixedShots(const CandidatePool& pool,
                               const Matrix& private_embeddings, int k,
                               const PrivacyBudget& budget, uint64_t seed,
                               CoverageHistogram* histogram_out = nullptr);

}  // namespace dpsteer

#endif  // DPSTEER_FIXEDSHOTS_H_
