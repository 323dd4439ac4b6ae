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

#ifndef DPSTEER_GENERATION_H_
#define DPSTEER_GENERATION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsteer/model.h"
#include "dpsteer/prompt.h"
#include "dpsteer/records.h"
#include "dpsteer/rng.h"
#include "dpsteer/vectors.h"

namespace dpsteer {

inline constexpr double kDefaultBeta = 1.4;
inline constexpr double kDefaultTemperature = 1.6;

// state + beta * vector.direction. Throws kInput on a dimension mismatch.
Vector Inject(std::span<const double> state, const DatasetVector& vector,
              double beta);

struct SteeringEntry {
  int layer = 0;
  double beta = 0.0;
  DatasetVector vector;
};

// Empty means unsteered.
struct SteeringSpec {
  std::vector<SteeringEntry> entries;

  // Same beta on every vector, injected at the vector's own layer.
  static SteeringSpec FromVectors(const std::vector<DatasetVector>& vectors,
                                  double beta);

  // Throws kIndex / kInput on duplicate or out-of-range layers, dimension
  // mismatches or non-unit vectors.
  void Validate(const Model& model) const;
  std::vector<ResidualShift> ToShifts() const;
};

struct SamplingOptions {
  double temperature = kDefaultTemperature;
  int max_tokens = 40;
  // When false only generated positions are steered, not the scaffold.
  bool steer_prompt = true;
};

// Samples one continuation of the scaffold, applying the steering at every
// forward pass. Stops at the end delimiter or after max_tokens. Throws
// kLength when scaffold + max_tokens exceed the context.
std::string GenerateSteered(const Model& model, const Scaffold& scaffold,
                            const SteeringSpec& steering,
                            const SamplingOptions& options, Rng& rng);

// n nonempty unsteered samples under the scaffold, drawn as in
// GenerateDataset.
std::vector<std::string> BuildNegativeSet(const Model& model,
                                          const Scaffold& scaffold, int n,
                                          uint64_t seed,
                                          const SamplingOptions& options = {});

using QualityScorer = std::function<double(const std::string&)>;

// Bundled stand-in for an LLM judge, on a 1..10 scale: length band,
// share of word-like tokens and a repetition penalty.
double RuleBasedQualityScore(const std::string& text);

// Keeps samples scoring >= threshold, in order.
std::vector<std::string> RejectionFilter(
    const std::vector<std::string>& samples, const QualityScorer& scorer,
    double threshold);

struct RejectionRule {
  std::string scorer = "rule-based";
  double threshold = 6.0;
};

struct GenerationConfig {
  std::string label;
  Scaffold scaffold;
  SamplingOptions sampling;
  int count = 1;  // M
  uint64_t seed = 0;
  std::optional<RejectionRule> rejection;
  // Give up after count * max_attempt_factor attempts.
  int max_attempt_factor = 50;
  // Worker threads; the output does not depend on this.
  int threads = 1;
};

struct SyntheticDataset {
  std::vector<Record> records;
  std::vector<uint64_t> sample_seeds;  // seed of each kept record
  int attempts = 0;
};

// Draws samples i = 0, 1, ... with seeds DeriveSeed(seed, i) until `count`
// are kept. Empty completions and (when configured) samples below the
// rejection threshold are dropped.
SyntheticDataset GenerateDataset(const Model& model,
                                 const GenerationConfig& config,
                                 const SteeringSpec& steering);

QualityScorer ScorerByName(const std::string& name);

}  // namespace dpsteer

#endif  // DPSTEER_GENERATION_H_
