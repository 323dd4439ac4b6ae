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

#ifndef DPSTEER_EVAL_H_
#define DPSTEER_EVAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpsteer/matrix.h"
#include "dpsteer/model.h"
#include "json.hpp"

namespace dpsteer {

inline constexpr double kHistogramSmoothing = 1e-9;

struct MauveConfig {
  int num_bins = 0;  // 0 selects min(200, (n + m) / 10), at least 1
  double scaling_factor = 5.0;
  // Number of mixture weights, both endpoints included.
  int lambda_grid_size = 27;
  uint64_t seed = 0;
  int max_iterations = 100;

  void Validate() const;
};

int DefaultNumBins(int n, int m);

struct Quantization {
  std::vector<double> hist_p;
  std::vector<double> hist_q;
  std::vector<int> assignment;  // rows of real then synthetic
};

// Seeded k-means with k-means++ seeding on the stacked rows. Throws
// kParameter when num_bins is outside [1, n + m] and kInput on empty sets.
Quantization Quantize(const Matrix& real, const Matrix& synthetic, int num_bins,
                      uint64_t seed, int max_iterations = 100);

struct CurvePoint {
  double lambda = 0.0;
  double x = 0.0;  // exp(-c KL(P || R))
  double y = 0.0;  // exp(-c KL(Q || R))
};

struct DivergenceCurve {
  std::vector<CurvePoint> points;  // in increasing lambda
  double area = 0.0;

  std::string ToCsv() const;
};

// Histograms must have equal length and each sum to 1 within 1e-9; both
// are smoothed before the divergences are taken. Throws kInput otherwise.
DivergenceCurve BuildDivergenceCurve(std::span<const double> hist_p,
                                     std::span<const double> hist_q,
                                     double scaling_factor,
                                     int lambda_grid_size);

double MauveScore(std::span<const double> hist_p,
                  std::span<const double> hist_q, const MauveConfig& config);

// Number of distinct first-n whitespace-token prefixes among texts with at
// least n tokens.
int DistinctOpeningNgrams(const std::vector<std::string>& texts, int n);

struct FidelityReport {
  double mauve = 0.0;
  int num_bins = 0;
  double scaling_factor = 0.0;
  int distinct_3grams_real = 0;
  int distinct_3grams_syn = 0;
  uint64_t seed = 0;
  DivergenceCurve curve;

  nlohmann::json ToJson() const;
};

// Embeds both corpora at the model's embed layer, quantizes and scores.
FidelityReport EvaluateFidelity(const std::vector<std::string>& real_texts,
                                const std::vector<std::string>& syn_texts,
                                const Model& model, const MauveConfig& config);

// Same on precomputed embeddings; n-gram counts are left at 0.
FidelityReport EvaluateEmbeddings(const Matrix& real, const Matrix& synthetic,
                                  const MauveConfig& config);

}  // namespace dpsteer

#endif  // DPSTEER_EVAL_H_
