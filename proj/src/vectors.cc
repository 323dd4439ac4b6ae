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

#include "dpsteer/vectors.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dpsteer/error.h"
#include "dpsteer/rng.h"

namespace dpsteer {

ClipNoiseConfig ClipNoiseConfig::Uniform(std::vector<int> layers, double clip,
                                         double sigma, uint64_t seed) {
  ClipNoiseConfig cfg;
  cfg.clip.assign(layers.size(), clip);
  cfg.sigma.assign(layers.size(), sigma);
  cfg.layers = std::move(layers);
  cfg.seed = seed;
  return cfg;
}

void ClipNoiseConfig::Validate() const {
  if (layers.empty()) {
    throw Error(ErrorKind::kParameter, "no layers configured for extraction");
  }
  if (clip.size() != layers.size() || sigma.size() != layers.size()) {
    throw Error(ErrorKind::kParameter,
                "clip/sigma lists must match the layer list");
  }
  for (size_t k = 0; k < layers.size(); ++k) {
    if (!(clip[k] > 0.0) || !std::isfinite(clip[k])) {
      throw Error(ErrorKind::kParameter, "clip threshold must be > 0");
    }
    if (!(sigma[k] >= 0.0) || !std::isfinite(sigma[k])) {
      throw Error(ErrorKind::kParameter, "noise scale must be >= 0");
    }
  }
}

Vector Clip(std::span<const double> v, double clip) {
  Vector out(v.begin(), v.end());
  const double norm = Norm2(v);
  if (norm > clip) {
    const double k = clip / norm;
    for (double& x : out) x *= k;
  }
  return out;
}

double ImpliedEpsilon(double sensitivity, double sigma, double delta) {
  if (sigma == 0.0) return INFINITY;
  if (!(delta > 0.0 && delta < 1.0)) return INFINITY;
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / sigma;
}

std::pair<std::vector<size_t>, std::vector<size_t>> PairingOrder(
    size_t n, uint64_t seed) {
  std::vector<size_t> pos(n), neg(n);
  std::iota(pos.begin(), pos.end(), 0);
  std::iota(neg.begin(), neg.end(), 0);
  const uint64_t base = StreamSeed(seed, SeedStream::kPairing);
  Rng pos_rng(DeriveSeed(base, 0));
  Rng neg_rng(DeriveSeed(base, 1));
  std::shuffle(pos.begin(), pos.end(), pos_rng);
  std::shuffle(neg.begin(), neg.end(), neg_rng);
  return {pos, neg};
}

Vector ClippedMeanDifference(const Matrix& positives, const Matrix& negatives,
                             double clip, const std::vector<size_t>& pos_order,
                             const std::vector<size_t>& neg_order) {
  const int d = positives.cols;
  const size_t n = pos_order.size();
  Vector sum(d, 0.0), diff(d);
  for (size_t i = 0; i < n; ++i) {
    const double* p = positives.row(static_cast<int>(pos_order[i]));
    const double* q = negatives.row(static_cast<int>(neg_order[i]));
    for (int k = 0; k < d; ++k) diff[k] = p[k] - q[k];
    const Vector clipped = Clip(diff, clip);
    for (int k = 0; k < d; ++k) sum[k] += clipped[k];
  }
  for (double& x : sum) x /= static_cast<double>(n);
  return sum;
}

std::vector<DatasetVector> ExtractFromPooled(
    const std::vector<Matrix>& positives, const std::vector<Matrix>& negatives,
    const ClipNoiseConfig& cfg, ExtractionTrace* trace) {
  cfg.Validate();
  if (positives.size() != cfg.layers.size() ||
      negatives.size() != cfg.layers.size()) {
    throw Error(ErrorKind::kInput, "pooled inputs do not match layer list");
  }
  const int n = positives[0].rows;
  for (size_t k = 0; k < cfg.layers.size(); ++k) {
    if (positives[k].rows != n || negatives[k].rows != n) {
      throw Error(ErrorKind::kInput,
                  "positives and negatives must have equal counts");
    }
    if (positives[k].cols != negatives[k].cols) {
      throw Error(ErrorKind::kInput, "pooled dimension mismatch");
    }
  }
  if (n < 1) throw Error(ErrorKind::kInput, "need at least one pair");

  const auto [pos_order, neg_order] = PairingOrder(n, cfg.seed);
  const uint64_t noise_base = StreamSeed(cfg.seed, SeedStream::kVectorNoise);
  if (trace) {
    trace->clipped_mean.clear();
    trace->noised.clear();
  }
  std::vector<DatasetVector> out;
  for (size_t k = 0; k < cfg.layers.size(); ++k) {
    Vector v = ClippedMeanDifference(positives[k], negatives[k], cfg.clip[k],
                                     pos_order, neg_order);
    if (trace) trace->clipped_mean.push_back(v);
    if (cfg.sigma[k] > 0.0) {
      Rng rng(DeriveSeed(noise_base, static_cast<uint64_t>(cfg.layers[k])));
      std::normal_distribution<double> noise(0.0, cfg.sigma[k]);
      for (double& x : v) x += noise(rng);
    }
    if (trace) trace->noised.push_back(v);
    const double norm = Norm2(v);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::kDegenerate, "dataset vector for layer " +
                                              std::to_string(cfg.layers[k]) +
                                              " has zero norm after noising");
    }
    for (double& x : v) x /= norm;

    DatasetVector dv;
    dv.layer = cfg.layers[k];
    dv.direction = std::move(v);
    dv.meta.n = n;
    dv.meta.clip = cfg.clip[k];
    dv.meta.sigma = cfg.sigma[k];
    dv.meta.budget = {
        ImpliedEpsilon(2.0 * cfg.clip[k] / n, cfg.sigma[k], cfg.delta),
        cfg.delta};
    out.push_back(std::move(dv));
  }
  return out;
}

std::vector<Vector> PooledRepresentations(const Model& model,
                                          const std::string& text,
                                          const Scaffold* scaffold,
                                          std::span<const int> layers) {
  if (text.empty()) throw Error(ErrorKind::kInput, "cannot pool empty text");
  const Tokenizer& tok = model.tokenizer();
  const int ctx = model.config().context_len;
  TokenSequence tokens;
  int begin = 0;
  int end = 0;
  if (scaffold) {
    tokens = scaffold->Encode(tok);
    begin = static_cast<int>(tokens.size());
    const int room = ctx - begin - 1;
    if (room < 1) {
      throw Error(ErrorKind::kLength, "scaffold leaves no room in context");
    }
    TokenSequence body = tok.Encode(text);
    if (static_cast<int>(body.size()) > room) body.resize(room);
    tokens.insert(tokens.end(), body.begin(), body.end());
    end = static_cast<int>(tokens.size());
    tokens.push_back(Tokenizer::kEnd);
  } else {
    tokens = tok.Encode(text);
    if (static_cast<int>(tokens.size()) > ctx) tokens.resize(ctx);
    end = static_cast<int>(tokens.size());
  }
  const ForwardResult fr = Forward(model, tokens);
  std::vector<Vector> out;
  for (int layer : layers) {
    out.push_back(MeanPoolRange(fr.activations, layer, begin, end));
  }
  return out;
}

std::vector<Matrix> PooledRepresentationMatrix(
    const Model& model, const std::vector<std::string>& texts,
    const Scaffold* scaffold, std::span<const int> layers) {
  const int d = model.config().hidden_dim;
  std::vector<Matrix> out(layers.size(),
                          Matrix(static_cast<int>(texts.size()), d));
  for (size_t i = 0; i < texts.size(); ++i) {
    const auto reps = PooledRepresentations(model, texts[i], scaffold, layers);
    for (size_t k = 0; k < layers.size(); ++k) {
      std::copy(reps[k].begin(), reps[k].end(),
                out[k].row(static_cast<int>(i)));
    }
  }
  return out;
}

std::vector<DatasetVector> ExtractDatasetVectors(const PairedExamples& pairs,
                                                 const Model& model,
                                                 const ClipNoiseConfig& cfg,
                                                 const Scaffold* scaffold,
                                                 ExtractionTrace* trace) {
  if (pairs.positives.size() != pairs.negatives.size()) {
    throw Error(ErrorKind::kInput,
                "paired examples need equal counts: " +
                    std::to_string(pairs.positives.size()) + " positives vs " +
                    std::to_string(pairs.negatives.size()) + " negatives");
  }
  if (pairs.positives.empty()) {
    throw Error(ErrorKind::kInput, "paired examples are empty");
  }
  cfg.Validate();
  for (int layer : cfg.layers) {
    if (layer < 1 || layer > model.config().num_layers) {
      throw Error(ErrorKind::kIndex,
                  "layer " + std::to_string(layer) + " outside the model");
    }
  }
  const auto pos =
      PooledRepresentationMatrix(model, pairs.positives, scaffold, cfg.layers);
  const auto neg =
      PooledRepresentationMatrix(model, pairs.negatives, scaffold, cfg.layers);
  return ExtractFromPooled(pos, neg, cfg, trace);
}

}  // namespace dpsteer
