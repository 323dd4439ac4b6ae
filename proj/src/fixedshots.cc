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

#include "dpsteer/fixedshots.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dpsteer/error.h"
#include "dpsteer/hash.h"
#include "dpsteer/rng.h"

namespace dpsteer {

std::string CandidatePool::Hash() const {
  ContentHasher h;
  h.UpdateField(label).UpdateField(provenance);
  h.UpdateValue<uint64_t>(texts.size());
  for (const auto& t : texts) h.UpdateField(t);
  return h.hex();
}

std::vector<int> AssignNearest(const Matrix& private_embeddings,
                               const Matrix& candidate_embeddings) {
  if (private_embeddings.rows < 1 || candidate_embeddings.rows < 1) {
    throw Error(ErrorKind::kInput, "assignment needs n, N >= 1");
  }
  if (private_embeddings.cols != candidate_embeddings.cols) {
    throw Error(ErrorKind::kInput, "embedding dimension mismatch");
  }
  auto norms = [](const Matrix& m, const char* what) {
    std::vector<double> out(m.rows);
    for (int r = 0; r < m.rows; ++r) {
      out[r] = Norm2(m.row_span(r));
      if (!(out[r] > 0.0)) {
        throw Error(ErrorKind::kInput, std::string("zero-norm ") + what +
                                           " embedding at row " +
                                           std::to_string(r));
      }
    }
    return out;
  };
  const auto pn = norms(private_embeddings, "private");
  const auto cn = norms(candidate_embeddings, "candidate");
  std::vector<int> out(private_embeddings.rows);
  for (int i = 0; i < private_embeddings.rows; ++i) {
    int best = 0;
    double best_sim = -INFINITY;
    for (int j = 0; j < candidate_embeddings.rows; ++j) {
      const double sim = Dot(private_embeddings.row_span(i),
                             candidate_embeddings.row_span(j)) /
                         (pn[i] * cn[j]);
      if (sim > best_sim) {
        best_sim = sim;
        best = j;
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<int64_t> BuildHistogram(std::span<const int> assignment,
                                    int num_candidates) {
  if (num_candidates < 1) {
    throw Error(ErrorKind::kParameter, "histogram needs at least one bin");
  }
  std::vector<int64_t> counts(num_candidates, 0);
  for (int a : assignment) {
    if (a < 0 || a >= num_candidates) {
      throw Error(ErrorKind::kIndex, "assignment " + std::to_string(a) +
                                         " outside [0, " +
                                         std::to_string(num_candidates) + ")");
    }
    ++counts[a];
  }
  return counts;
}

double SigmaForHistogram(const PrivacyBudget& budget) {
  return GaussianSigmaForSensitivity(kHistogramSensitivity, budget);
}

CoverageHistogram PrivatizeHistogram(std::vector<int64_t> counts, double sigma,
                                     uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::kParameter, "histogram sigma must be >= 0");
  }
  CoverageHistogram h;
  h.sigma = sigma;
  h.seed = seed;
  h.noised.resize(counts.size());
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  for (size_t j = 0; j < counts.size(); ++j) {
    h.noised[j] = static_cast<double>(counts[j]);
    if (sigma > 0.0) h.noised[j] += noise(rng);
  }
  h.counts = std::move(counts);
  return h;
}

std::vector<int> TopK(std::span<const double> scores, int k) {
  if (k < 1 || k > static_cast<int>(scores.size())) {
    throw Error(ErrorKind::kParameter, "k=" + std::to_string(k) +
                                           " outside [1, " +
                                           std::to_string(scores.size()) + "]");
  }
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  idx.resize(k);
  return idx;
}

FixedShotSet SelectFixedShots(const CoverageHistogram& histogram,
                              const CandidatePool& pool, int k) {
  if (histogram.noised.size() != pool.texts.size()) {
    throw Error(ErrorKind::kInput, "histogram does not match candidate pool");
  }
  FixedShotSet out;
  out.label = pool.label;
  out.k = k;
  out.indices = TopK(histogram.noised, k);
  for (int j : out.indices) out.exemplars.push_back(pool.texts[j]);
  out.sigma = histogram.sigma;
  out.seed = histogram.seed;
  out.pool_hash = pool.Hash();
  return out;
}

FixedShotSet PrivateFixedShots(const CandidatePool& pool,
                               const Matrix& private_embeddings, int k,
                               const PrivacyBudget& budget, uint64_t seed,
                               CoverageHistogram* histogram_out) {
  if (k < 1 || k > static_cast<int>(pool.texts.size())) {
    throw Error(ErrorKind::kParameter, "k outside [1, N]");
  }
  const double sigma = SigmaForHistogram(budget);
  const auto assignment = AssignNearest(private_embeddings, pool.embeddings);
  CoverageHistogram h = PrivatizeHistogram(
      BuildHistogram(assignment, static_cast<int>(pool.texts.size())), sigma,
      seed);
  FixedShotSet out = SelectFixedShots(h, pool, k);
  out.budget = budget;
  if (histogram_out) *histogram_out = std::move(h);
  return out;
}

}  // namespace dpsteer
