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

#include "dpsteer/pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "dpsteer/error.h"
#include "dpsteer/hash.h"
#include "dpsteer/rng.h"

namespace dpsteer {
namespace {

template <typename F>
auto Stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

SigmaCalibrator EffectiveCalibrator(const PipelineConfig& config) {
  if (!config.noiseless) return config.calibrator;
  return {"none", [](double, int, const PrivacyBudget&) { return 0.0; }};
}

void PipelineConfig::Validate(const Model& model) const {
  if (label.empty()) throw Error(ErrorKind::kInput, "attribute label is empty");
  if (layers.empty()) {
    throw Error(ErrorKind::kParameter, "at least one injection layer needed");
  }
  std::set<int> seen;
  for (int l : layers) {
    if (l < 1 || l > model.config().num_layers) {
      throw Error(ErrorKind::kIndex,
                  "layer " + std::to_string(l) + " outside the model's layers");
    }
    if (!seen.insert(l).second) {
      throw Error(ErrorKind::kInput,
                  "layer " + std::to_string(l) + " repeated");
    }
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw Error(ErrorKind::kParameter, "clip must be > 0");
  }
  if (!std::isfinite(beta))
    throw Error(ErrorKind::kParameter, "beta must be finite");
  if (num_candidates < 1) {
    throw Error(ErrorKind::kParameter, "candidate pool needs N >= 1");
  }
  if (k < 1 || k > num_candidates) {
    throw Error(ErrorKind::kParameter, "k must lie in [1, N]");
  }
  if (candidate_max_tokens < 1 || sampling.max_tokens < 1) {
    throw Error(ErrorKind::kParameter, "max_tokens must be >= 1");
  }
  if (!(sampling.temperature > 0.0)) {
    throw Error(ErrorKind::kParameter, "temperature must be > 0");
  }
  if (count < 1) throw Error(ErrorKind::kParameter, "M must be >= 1");
  if (threads < 1) throw Error(ErrorKind::kParameter, "threads must be >= 1");
  if (rejection) ScorerByName(rejection->scorer);
}

nlohmann::json PipelineConfig::StageJson(PipelineStage stage) const {
  nlohmann::json j = {{"label", label},
                      {"epsilon_total", JsonValue(budget.total.epsilon)},
                      {"delta_total", budget.total.delta},
                      {"epsilon_fs", budget.epsilon_fs},
                      {"delta_fs_share", budget.delta_fs_share},
                      {"q", budget.q},
                      {"layers", layers},
                      {"noiseless", noiseless},
                      {"num_candidates", num_candidates},
                      {"k", k},
                      {"candidate_max_tokens", candidate_max_tokens},
                      {"temperature", sampling.temperature},
                      {"seed", seed}};
  if (stage == PipelineStage::kFixedShots) return j;
  j["clip"] = clip;
  j["max_tokens"] = sampling.max_tokens;
  j["accountant"] = EffectiveCalibrator(*this).name;
  if (stage == PipelineStage::kVectors) return j;
  j["beta"] = beta;
  j["steer_prompt"] = sampling.steer_prompt;
  j["count"] = count;
  if (rejection) {
    j["rejection"] = {{"scorer", rejection->scorer},
                      {"threshold", rejection->threshold}};
  }
  return j;
}

std::string PipelineConfig::StageHash(PipelineStage stage) const {
  return HashHex(StageJson(stage).dump());
}

BudgetReport PlanPipelineBudget(const PipelineConfig& config) {
  BudgetRequest request = config.budget;
  request.layers = config.layers;
  if (!config.noiseless) return PlanBudget(request);
  // Deltas are kept so the report stays well formed; no noise is drawn.
  if (!std::isfinite(request.total.epsilon)) request.total.epsilon = 1.0;
  request.epsilon_fs = std::min(request.epsilon_fs, request.total.epsilon / 2);
  BudgetReport report = PlanBudget(request);
  const double inf = std::numeric_limits<double>::infinity();
  report.total.epsilon = inf;
  report.fixed_shots.epsilon = inf;
  report.vectors.epsilon = inf;
  for (auto& lb : report.per_layer) lb.budget.epsilon = inf;
  return report;
}

CandidatePool BuildCandidatePool(const Model& model, const std::string& label,
                                 int num_candidates, int max_tokens,
                                 double temperature, uint64_t seed) {
  GenerationConfig gen;
  gen.label = label;
  gen.scaffold = Scaffold{label, {}};
  gen.sampling.temperature = temperature;
  gen.sampling.max_tokens = max_tokens;
  gen.count = num_candidates;
  gen.seed = seed;
  CandidatePool pool;
  pool.label = label;
  for (auto& r : GenerateDataset(model, gen, SteeringSpec{}).records) {
    pool.texts.push_back(std::move(r.text));
  }
  pool.embeddings = EmbedTexts(model, pool.texts);
  return pool;
}

std::vector<size_t> SubsampleIndices(size_t n, double q, uint64_t seed) {
  SubsampleSpec{q}.Validate();
  if (n == 0) throw Error(ErrorKind::kInput, "nothing to subsample");
  const size_t m = std::clamp<size_t>(
      static_cast<size_t>(std::llround(q * static_cast<double>(n))), 1, n);
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (m < n) {
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

FixedShotSet RunFixedShotStage(const Model& model, const PipelineConfig& config,
                               const BudgetReport& budget,
                               const std::vector<std::string>& private_texts,
                               CandidatePool* pool_out) {
  CandidatePool pool = Stage("candidate pool", [&] {
    return BuildCandidatePool(
        model, config.label, config.num_candidates, config.candidate_max_tokens,
        config.sampling.temperature,
        StreamSeed(config.seed, SeedStream::kCandidatePool));
  });
  FixedShotSet shots = Stage("fixed shots", [&] {
    return PrivateFixedShots(
        pool, EmbedTexts(model, private_texts), config.k, budget.fixed_shots,
        StreamSeed(config.seed, SeedStream::kHistogramNoise));
  });
  if (pool_out) *pool_out = std::move(pool);
  return shots;
}

VectorStageResult RunVectorStage(const Model& model,
                                 const PipelineConfig& config,
                                 const Scaffold& scaffold,
                                 const std::vector<std::string>& private_texts,
                                 BudgetReport& budget) {
  VectorStageResult out;
  PairedExamples pairs;
  pairs.label = config.label;
  for (size_t i :
       SubsampleIndices(private_texts.size(), config.budget.q,
                        StreamSeed(config.seed, SeedStream::kSubsample))) {
    pairs.positives.push_back(private_texts[i]);
  }
  out.num_subsampled = static_cast<int>(pairs.positives.size());

  out.negatives = Stage("negative set", [&] {
    return BuildNegativeSet(model, scaffold, out.num_subsampled,
                            StreamSeed(config.seed, SeedStream::kNegativeSet),
                            config.sampling);
  });
  pairs.negatives = out.negatives;

  out.vectors = Stage("vectors", [&] {
    CalibrateLayers(budget, config.clip, out.num_subsampled,
                    EffectiveCalibrator(config));
    ClipNoiseConfig cfg;
    cfg.layers = config.layers;
    for (const auto& lb : budget.per_layer) {
      cfg.clip.push_back(lb.clip);
      cfg.sigma.push_back(lb.sigma);
    }
    cfg.delta = budget.per_layer.front().budget.delta;
    cfg.seed = config.seed;
    return ExtractDatasetVectors(pairs, model, cfg, &scaffold);
  });
  return out;
}

SyntheticDataset RunGenerationStage(const Model& model,
                                    const PipelineConfig& config,
                                    const Scaffold& scaffold,
                                    const std::vector<DatasetVector>& vectors) {
  return Stage("steered sampling", [&] {
    GenerationConfig gen;
    gen.label = config.label;
    gen.scaffold = scaffold;
    gen.sampling = config.sampling;
    gen.count = config.count;
    gen.seed = StreamSeed(config.seed, SeedStream::kSynthetic);
    gen.rejection = config.rejection;
    gen.threads = config.threads;
    return GenerateDataset(model, gen,
                           SteeringSpec::FromVectors(vectors, config.beta));
  });
}

namespace {

PipelineConfig AtEpsilon(const PipelineConfig& config, double epsilon) {
  PipelineConfig c = config;
  if (std::isinf(epsilon) && epsilon > 0) {
    c.noiseless = true;
  } else {
    c.noiseless = false;
    c.budget.total.epsilon = epsilon;
  }
  return c;
}

}  // namespace

std::vector<SweepPoint> PlanPrivacySweep(const PipelineConfig& config,
                                         std::span<const double> epsilons,
                                         int num_private) {
  if (num_private < 1) throw Error(ErrorKind::kInput, "sweep needs n >= 1");
  const int m = static_cast<int>(
      SubsampleIndices(num_private, config.budget.q, 0).size());
  std::vector<SweepPoint> out;
  for (double eps : epsilons) {
    const PipelineConfig c = AtEpsilon(config, eps);
    SweepPoint p;
    p.epsilon_total = eps;
    p.budget = PlanPipelineBudget(c);
    CalibrateLayers(p.budget, c.clip, m, EffectiveCalibrator(c));
    p.sigma_fs = c.noiseless ? 0.0 : SigmaForHistogram(p.budget.fixed_shots);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SweepPoint> RunPrivacySweep(
    const Model& model, const PipelineConfig& config,
    std::span<const double> epsilons, const std::vector<Record>& private_data,
    const std::vector<std::string>& real_texts, const MauveConfig& mauve) {
  const int n =
      static_cast<int>(TextsWithLabel(private_data, config.label).size());
  std::vector<SweepPoint> out = PlanPrivacySweep(config, epsilons, n);
  for (auto& p : out) {
    const PipelineResult r =
        RunPipeline(model, AtEpsilon(config, p.epsilon_total),
                    [&] { return private_data; });
    std::vector<std::string> texts;
    for (const auto& rec : r.synthetic.records) texts.push_back(rec.text);
    p.budget = r.budget;
    p.records = static_cast<int>(texts.size());
    p.mauve = EvaluateFidelity(real_texts, texts, model, mauve).mauve;
    p.has_mauve = true;
  }
  return out;
}

nlohmann::json SweepReportToJson(const std::vector<SweepPoint>& points) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : points) {
    std::vector<double> sigmas;
    for (const auto& lb : p.budget.per_layer) sigmas.push_back(lb.sigma);
    nlohmann::json row = {{"epsilon_total", JsonValue(p.epsilon_total)},
                          {"sigma_fs", p.sigma_fs},
                          {"sigma_vec", sigmas},
                          {"budget", BudgetReportToJson(p.budget)}};
    if (p.has_mauve) {
      row["mauve"] = p.mauve;
      row["records"] = p.records;
    }
    rows.push_back(row);
  }
  return {{"sweep", rows}};
}

PipelineResult RunPipeline(const Model& model, const PipelineConfig& config,
                           const PrivateDataSource& load_private) {
  PipelineResult out;
  Stage("config", [&] { config.Validate(model); });
  out.budget = Stage("budget", [&] { return PlanPipelineBudget(config); });

  const std::vector<std::string> private_texts = Stage("private data", [&] {
    auto texts = TextsWithLabel(load_private(), config.label);
    if (texts.empty()) {
      throw Error(ErrorKind::kInput,
                  "no private records with label '" + config.label + "'");
    }
    return texts;
  });
  out.num_private = static_cast<int>(private_texts.size());

  out.fixed_shots =
      RunFixedShotStage(model, config, out.budget, private_texts, &out.pool);
  const Scaffold scaffold = out.fixed_shots.ToScaffold();
  VectorStageResult vec =
      RunVectorStage(model, config, scaffold, private_texts, out.budget);
  out.num_subsampled = vec.num_subsampled;
  out.negatives = std::move(vec.negatives);
  out.vectors = std::move(vec.vectors);
  out.synthetic = RunGenerationStage(model, config, scaffold, out.vectors);
  return out;
}

}  // namespace dpsteer
