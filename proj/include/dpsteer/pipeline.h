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

#ifndef DPSTEER_PIPELINE_H_
#define DPSTEER_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsteer/eval.h"
#include "dpsteer/fixedshots.h"
#include "dpsteer/generation.h"
#include "dpsteer/model.h"
#include "dpsteer/privacy.h"
#include "dpsteer/records.h"
#include "dpsteer/vectors.h"
#include "json.hpp"

namespace dpsteer {

enum class PipelineStage { kFixedShots, kVectors, kGeneration };

struct PipelineConfig {
  std::string label;
  // budget.layers is overwritten with `layers`.
  BudgetRequest budget;
  // Release everything without noise (epsilon = +inf everywhere).
  bool noiseless = false;
  std::vector<int> layers = {2, 3};
  double clip = kDefaultClip;
  double beta = kDefaultBeta;
  int num_candidates = 64;
  int k = 2;
  int candidate_max_tokens = 32;
  SamplingOptions sampling;
  int count = 1;  // M
  std::optional<RejectionRule> rejection;
  uint64_t seed = 0;
  int threads = 1;
  SigmaCalibrator calibrator;

  void Validate(const Model& model) const;
  // The fields a stage's output depends on, cumulative over the stages
  // before it. Threads and the calibrator function are excluded.
  nlohmann::json StageJson(PipelineStage stage) const;
  std::string StageHash(PipelineStage stage) const;
  nlohmann::json ToJson() const {
    return StageJson(PipelineStage::kGeneration);
  }
  std::string Hash() const { return StageHash(PipelineStage::kGeneration); }
};

// Budget plan for the configuration. Reads nothing.
BudgetReport PlanPipelineBudget(const PipelineConfig& config);

// config.calibrator, or a zero-noise calibrator in noiseless mode.
SigmaCalibrator EffectiveCalibrator(const PipelineConfig& config);

using PrivateDataSource = std::function<std::vector<Record>()>;

struct PipelineResult {
  CandidatePool pool;
  FixedShotSet fixed_shots;
  int num_private = 0;     // n, records carrying the label
  int num_subsampled = 0;  // m = round(q n)
  std::vector<std::string> negatives;
  std::vector<DatasetVector> vectors;
  SyntheticDataset synthetic;
  BudgetReport budget;
};

// Candidate pool -> fixed shots -> subsample -> negative set -> vectors ->
// steered sampling until M records are kept. The budget is planned and the
// configuration validated before `load_private` is called. Errors are
// rethrown with the failing stage named.
PipelineResult RunPipeline(const Model& model, const PipelineConfig& config,
                           const PrivateDataSource& load_private);

// Individual stages, shared with the command-line tools.
CandidatePool BuildCandidatePool(const Model& model, const std::string& label,
                                 int num_candidates, int max_tokens,
                                 double temperature, uint64_t seed);

// Candidate pool and private fixed-shot selection with budget.fixed_shots.
FixedShotSet RunFixedShotStage(const Model& model, const PipelineConfig& config,
                               const BudgetReport& budget,
                               const std::vector<std::string>& private_texts,
                               CandidatePool* pool_out = nullptr);

struct VectorStageResult {
  int num_subsampled = 0;
  std::vector<std::string> negatives;
  std::vector<DatasetVector> vectors;
};

// Subsampling, negative set, sigma calibration (written into `budget`) and
// extraction under the fixed-shot scaffold.
VectorStageResult RunVectorStage(const Model& model,
                                 const PipelineConfig& config,
                                 const Scaffold& scaffold,
                                 const std::vector<std::string>& private_texts,
                                 BudgetReport& budget);

SyntheticDataset RunGenerationStage(const Model& model,
                                    const PipelineConfig& config,
                                    const Scaffold& scaffold,
                                    const std::vector<DatasetVector>& vectors);

struct SweepPoint {
  double epsilon_total = 0.0;  // +inf runs noiseless
  BudgetReport budget;         // sigma calibrated for the subsample size
  double sigma_fs = 0.0;
  bool has_mauve = false;
  double mauve = 0.0;
  int records = 0;
};

// Budget and noise scales at each total epsilon for n private records.
std::vector<SweepPoint> PlanPrivacySweep(const PipelineConfig& config,
                                         std::span<const double> epsilons,
                                         int num_private);

// PlanPrivacySweep plus a pipeline run per point, scored against
// `real_texts` with the model's embeddings.
std::vector<SweepPoint> RunPrivacySweep(
    const Model& model, const PipelineConfig& config,
    std::span<const double> epsilons, const std::vector<Record>& private_data,
    const std::vector<std::string>& real_texts, const MauveConfig& mauve);

nlohmann::json SweepReportToJson(const std::vector<SweepPoint>& points);

// Indices of m = max(1, round(q n)) records drawn without replacement, in
// increasing order.
std::vector<size_t> SubsampleIndices(size_t n, double q, uint64_t seed);

}  // namespace dpsteer

#endif  // DPSTEER_PIPELINE_H_
