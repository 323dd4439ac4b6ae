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

#ifndef DPSTEER_ARTIFACTS_H_
#define DPSTEER_ARTIFACTS_H_

#include <string>
#include <vector>

#include "dpsteer/fixedshots.h"
#include "dpsteer/pipeline.h"
#include "dpsteer/vectors.h"
#include "json.hpp"

namespace dpsteer {

inline constexpr int kArtifactFormatVersion = 1;

// Pretty-printed JSON with a trailing newline; key order is sorted, so equal
// documents serialize to equal bytes.
std::string DumpJson(const nlohmann::json& j);
std::string JsonHash(const nlohmann::json& j);

// Parses `text`; throws kInput naming `what` on malformed JSON.
nlohmann::json ParseJson(const std::string& text, const std::string& what);

// Throws kStaleArtifact unless artifact[key] == expected.
void ExpectArtifactField(const nlohmann::json& artifact, const std::string& key,
                         const std::string& expected, const std::string& what);

// Run seeds of every stage, keyed by stream name.
nlohmann::json StageSeedsJson(uint64_t run_seed);

// {format_version, attribute, k, indices, sigma_fs, epsilon_fs, delta_fs,
//  seed, exemplars, pool_hash, model_hash, config_hash}
nlohmann::json FixedShotsToJson(const FixedShotSet& shots,
                                const std::string& model_hash,
                                const std::string& config_hash);
FixedShotSet FixedShotsFromJson(const nlohmann::json& j);

// {format_version, attribute, model_hash, config_hash, fixed_shots_hash,
//  seeds, budget, layers: [{layer, C, sigma, n, epsilon, delta, direction}]}
nlohmann::json VectorsToJson(const std::vector<DatasetVector>& vectors,
                             const PipelineConfig& config,
                             const std::string& model_hash,
                             const std::string& fixed_shots_hash,
                             const BudgetReport& budget);
std::vector<DatasetVector> VectorsFromJson(const nlohmann::json& j);

struct ManifestInputs {
  const PipelineConfig* config = nullptr;
  std::string model_hash;
  nlohmann::json budget;
  std::string fixed_shots_hash;
  std::string vectors_hash;
  std::string synthetic_hash;
  const SyntheticDataset* synthetic = nullptr;
  int num_private = -1;  // omitted when unknown
  int num_subsampled = -1;
};

nlohmann::json ManifestToJson(const ManifestInputs& in);

}  // namespace dpsteer

#endif  // DPSTEER_ARTIFACTS_H_
