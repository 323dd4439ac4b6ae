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

#include "dpsteer/artifacts.h"

#include "dpsteer/error.h"
#include "dpsteer/hash.h"
#include "dpsteer/rng.h"

namespace dpsteer {
namespace {

using nlohmann::json;

const json& Field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::kInput,
                std::string("artifact lacks field '") + key + "'");
  }
  return j.at(key);
}

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return Field(j, key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kInput,
                std::string("artifact field '") + key + "' has the wrong type");
  }
}

void CheckVersion(const json& j) {
  if (Get<int>(j, "format_version") != kArtifactFormatVersion) {
    throw Error(ErrorKind::kStaleArtifact,
                "unsupported artifact format version");
  }
}

}  // namespace

std::string DumpJson(const json& j) { return j.dump(2) + "\n"; }

std::string JsonHash(const json& j) { return HashHex(j.dump()); }

json ParseJson(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInput, what + ": " + e.what());
  }
}

void ExpectArtifactField(const json& artifact, const std::string& key,
                         const std::string& expected, const std::string& what) {
  const std::string found = Get<std::string>(artifact, key.c_str());
  if (found != expected) {
    throw Error(ErrorKind::kStaleArtifact,
                what + " is stale: " + key + " " + found + " != " + expected);
  }
}

json StageSeedsJson(uint64_t run_seed) {
  return {
      {"run", run_seed},
      {"candidate_pool", StreamSeed(run_seed, SeedStream::kCandidatePool)},
      {"histogram_noise", StreamSeed(run_seed, SeedStream::kHistogramNoise)},
      {"subsample", StreamSeed(run_seed, SeedStream::kSubsample)},
      {"negative_set", StreamSeed(run_seed, SeedStream::kNegativeSet)},
      {"pairing", StreamSeed(run_seed, SeedStream::kPairing)},
      {"vector_noise", StreamSeed(run_seed, SeedStream::kVectorNoise)},
      {"synthetic", StreamSeed(run_seed, SeedStream::kSynthetic)}};
}

json FixedShotsToJson(const FixedShotSet& shots, const std::string& model_hash,
                      const std::string& config_hash) {
  return {{"format_version", kArtifactFormatVersion},
          {"attribute", shots.label},
          {"k", shots.k},
          {"indices", shots.indices},
          {"sigma_fs", shots.sigma},
          {"epsilon_fs", JsonValue(shots.budget.epsilon)},
          {"delta_fs", shots.budget.delta},
          {"seed", shots.seed},
          {"exemplars", shots.exemplars},
          {"pool_hash", shots.pool_hash},
          {"model_hash", model_hash},
          {"config_hash", config_hash}};
}

FixedShotSet FixedShotsFromJson(const json& j) {
  CheckVersion(j);
  FixedShotSet s;
  s.label = Get<std::string>(j, "attribute");
  s.k = Get<int>(j, "k");
  s.indices = Get<std::vector<int>>(j, "indices");
  s.exemplars = Get<std::vector<std::string>>(j, "exemplars");
  s.sigma = Get<double>(j, "sigma_fs");
  s.budget = {DoubleFromJson(Field(j, "epsilon_fs")),
              Get<double>(j, "delta_fs")};
  s.seed = Get<uint64_t>(j, "seed");
  s.pool_hash = Get<std::string>(j, "pool_hash");
  if (static_cast<int>(s.exemplars.size()) != s.k) {
    throw Error(ErrorKind::kInput, "fixed-shot file has k != #exemplars");
  }
  return s;
}

json VectorsToJson(const std::vector<DatasetVector>& vectors,
                   const PipelineConfig& config, const std::string& model_hash,
                   const std::string& fixed_shots_hash,
                   const BudgetReport& budget) {
  json layers = json::array();
  for (const auto& v : vectors) {
    layers.push_back({{"layer", v.layer},
                      {"C", v.meta.clip},
                      {"sigma", v.meta.sigma},
                      {"n", v.meta.n},
                      {"epsilon", JsonValue(v.meta.budget.epsilon)},
                      {"delta", v.meta.budget.delta},
                      {"direction", v.direction}});
  }
  return {{"format_version", kArtifactFormatVersion},
          {"attribute", config.label},
          {"model_hash", model_hash},
          {"config_hash", config.StageHash(PipelineStage::kVectors)},
          {"fixed_shots_hash", fixed_shots_hash},
          {"seeds", StageSeedsJson(config.seed)},
          {"budget", BudgetReportToJson(budget)},
          {"layers", layers}};
}

std::vector<DatasetVector> VectorsFromJson(const json& j) {
  CheckVersion(j);
  std::vector<DatasetVector> out;
  for (const auto& l : Field(j, "layers")) {
    DatasetVector v;
    v.layer = Get<int>(l, "layer");
    v.direction = Get<std::vector<double>>(l, "direction");
    v.meta.clip = Get<double>(l, "C");
    v.meta.sigma = Get<double>(l, "sigma");
    v.meta.n = Get<int>(l, "n");
    v.meta.budget = {DoubleFromJson(Field(l, "epsilon")),
                     Get<double>(l, "delta")};
    out.push_back(std::move(v));
  }
  if (out.empty()) throw Error(ErrorKind::kInput, "vector file has no layers");
  return out;
}

json ManifestToJson(const ManifestInputs& in) {
  json m = {{"format_version", kArtifactFormatVersion},
            {"config_hash", in.config->Hash()},
            {"config", in.config->ToJson()},
            {"model_hash", in.model_hash},
            {"budget", in.budget},
            {"seeds", StageSeedsJson(in.config->seed)},
            {"artifacts",
             {{"fixed_shots", in.fixed_shots_hash},
              {"vectors", in.vectors_hash},
              {"synthetic", in.synthetic_hash}}}};
  if (in.synthetic) {
    m["sample_seeds"] = in.synthetic->sample_seeds;
    m["attempts"] = in.synthetic->attempts;
    m["records"] = in.synthetic->records.size();
  }
  if (in.num_private >= 0) m["num_private"] = in.num_private;
  if (in.num_subsampled >= 0) m["num_subsampled"] = in.num_subsampled;
  return m;
}

}  // namespace dpsteer
