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

#ifndef DPSTEER_VECTORS_H_
#define DPSTEER_VECTORS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpsteer/matrix.h"
#include "dpsteer/model.h"
#include "dpsteer/privacy.h"
#include "dpsteer/prompt.h"

namespace dpsteer {

inline constexpr double kDefaultClip = 5.5;

// Private texts (positives) and reference texts (negatives) sharing one
// attribute label. Pairs are formed by position after each side is shuffled
// independently with the run seed.
struct PairedExamples {
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  std::string label;
};

// One entry per extracted layer.
struct ClipNoiseConfig {
  std::vector<int> layers;
  std::vector<double> clip;   // C_l > 0
  std::vector<double> sigma;  // sigma_l >= 0
  // Per-layer delta used to report the epsilon implied by (C, n, sigma).
  double delta = 0.0;
  uint64_t seed = 0;

  // Same clip and sigma on every layer.
  static ClipNoiseConfig Uniform(std::vector<int> layers, double clip,
                                 double sigma, uint64_t seed);
  void Validate() const;
};

struct VectorMetadata {
  int n = 0;
  double clip = 0.0;
  double sigma = 0.0;
  PrivacyBudget budget;  // epsilon is +inf for sigma = 0
};

struct DatasetVector {
  int layer = 0;
  Vector direction;  // unit l2 norm
  VectorMetadata meta;
};

// v * min(1, C / ||v||). The zero vector maps to itself.
Vector Clip(std::span<const double> v, double clip);

// Epsilon achieved by a Gaussian release with the given sensitivity, sigma
// and delta; +inf when sigma is 0.
double ImpliedEpsilon(double sensitivity, double sigma, double delta);

// Positional pairing permutations for n records: first = positives,
// second = negatives.
std::pair<std::vector<size_t>, std::vector<size_t>> PairingOrder(size_t n,
                                                                 uint64_t seed);

// (1/n) sum_i clip(pos[pp_i] - neg[pn_i], C) for pooled rows.
Vector ClippedMeanDifference(const Matrix& positives, const Matrix& negatives,
                             double clip, const std::vector<size_t>& pos_order,
                             const std::vector<size_t>& neg_order);

// Pre-normalization vectors of the last extraction, per configured layer.
struct ExtractionTrace {
  std::vector<Vector> clipped_mean;
  std::vector<Vector> noised;
};

// Clipping, noising and normalization on pooled representations.
// positives[k] / negatives[k] hold the n x d rows for cfg.layers[k].
// Throws kInput on mismatched sizes, kDegenerate on a zero noised vector.
std::vector<DatasetVector> ExtractFromPooled(
    const std::vector<Matrix>& positives, const std::vector<Matrix>& negatives,
    const ClipNoiseConfig& cfg, ExtractionTrace* trace = nullptr);

// h_l(x) for each requested layer: the mean hidden state over the tokens of
// `text` only. With a scaffold the text is rendered as the next sample after
// the scaffold and closed with the end delimiter; the text is truncated to
// fit the context. Without one the bare text is pooled (EmbedText).
std::vector<Vector> PooledRepresentations(const Model& model,
                                          const std::string& text,
                                          const Scaffold* scaffold,
                                          std::span<const int> layers);

// Rows of PooledRepresentations for many texts, one matrix per layer.
std::vector<Matrix> PooledRepresentationMatrix(
    const Model& model, const std::vector<std::string>& texts,
    const Scaffold* scaffold, std::span<const int> layers);

// Full extraction from texts.
std::vector<DatasetVector> ExtractDatasetVectors(
    const PairedExamples& pairs, const Model& model, const ClipNoiseConfig& cfg,
    const Scaffold* scaffold = nullptr, ExtractionTrace* trace = nullptr);

}  // namespace dpsteer

#endif  // DPSTEER_VECTORS_H_
