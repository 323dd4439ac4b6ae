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

#include "dpsteer/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dpsteer/corpus.h"
#include "dpsteer/error.h"
#include "test_support.h"

namespace dpsteer {
namespace {

ModelConfig SmallConfig(int layers, int hidden, int context) {
  ModelConfig c;
  c.vocab_size = BundledTokenizer().vocab_size();
  c.num_layers = layers;
  c.hidden_dim = hidden;
  c.num_heads = 2;
  c.context_len = context;
  c.seed = 77;
  return c;
}

std::vector<TokenSequence> SmallCorpus(int docs, uint64_t seed) {
  TrainingCorpusOptions o;
  o.num_documents = docs;
  o.samples_per_document = 1;
  o.seed = seed;
  return BuildTrainingCorpus(BundledTokenizer(), o);
}

TEST(GradientCheckTest, MatchesCentralDifferences) {
  const ModelConfig c = SmallConfig(2, 8, 48);
  const Model base(c, BundledTokenizer());
  // Move away from the symmetric initialization so every path carries signal.
  std::vector<double> params(base.parameters().begin(),
                             base.parameters().end());
  Rng rng(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (double& p : params) p += noise(rng);
  const Model model(c, BundledTokenizer(), params);
  const std::vector<TokenSequence> batch = SmallCorpus(3, 8);

  std::vector<double> grad(params.size(), 0.0);
  BatchLossAndGradient(model, batch, grad);

  const double h = 1e-3;
  std::uniform_int_distribution<size_t> pick(0, params.size() - 1);
  int checked = 0;
  while (checked < 20) {
    const size_t i = pick(rng);
    std::vector<double> plus = params, minus = params;
    plus[i] += h;
    minus[i] -= h;
    const double lp =
        BatchLossAndGradient(Model(c, BundledTokenizer(), plus), batch, {});
    const double lm =
        BatchLossAndGradient(Model(c, BundledTokenizer(), minus), batch, {});
    const double numeric = (lp - lm) / (2 * h);
    // Parameters the batch never touches (unused token rows) have zero
    // gradient both ways.
    if (numeric == 0.0 && grad[i] == 0.0) continue;
    const double rel = std::fabs(numeric - grad[i]) /
                       std::max({std::fabs(numeric), std::fabs(grad[i]), 1e-6});
    EXPECT_LE(rel, 1e-4) << "param " << i << " analytic " << grad[i]
                         << " numeric " << numeric;
    ++checked;
  }
}

TEST(TrainerTest, ZeroStepsReturnsInitialization) {
  const ModelConfig c = SmallConfig(1, 8, 48);
  TrainOptions o;
  o.steps = 0;
  const TrainResult r = TrainToyLm(c, BundledTokenizer(), SmallCorpus(4, 1), o);
  EXPECT_EQ(r.model.Hash(), Model(c, BundledTokenizer()).Hash());
  EXPECT_TRUE(r.losses.empty());
}

TEST(TrainerTest, LossDecreasesAndIsDeterministic) {
  const ModelConfig c = SmallConfig(2, 16, 48);
  const auto corpus = SmallCorpus(64, 2);
  TrainOptions o;
  o.steps = 500;
  o.batch_size = 4;
  o.learning_rate = 5e-3;
  o.seed = 3;
  const TrainResult a = TrainToyLm(c, BundledTokenizer(), corpus, o);
  std::vector<double> zero;
  const double initial =
      BatchLossAndGradient(Model(c, BundledTokenizer()), corpus, zero);
  const double trained = BatchLossAndGradient(a.model, corpus, zero);
  EXPECT_LT(trained, initial);
  EXPECT_LT(trained, 0.6 * initial);
  for (double p : a.model.parameters()) ASSERT_TRUE(std::isfinite(p));

  o.steps = 20;
  const TrainResult x = TrainToyLm(c, BundledTokenizer(), corpus, o);
  const TrainResult y = TrainToyLm(c, BundledTokenizer(), corpus, o);
  EXPECT_EQ(x.model.Hash(), y.model.Hash());
  EXPECT_EQ(x.losses, y.losses);
}

TEST(TrainerTest, DivergenceNamesStep) {
  const ModelConfig c = SmallConfig(1, 8, 48);
  TrainOptions o;
  o.steps = 10;
  o.learning_rate = 1e300;
  o.grad_clip = 0.0;
  try {
    TrainToyLm(c, BundledTokenizer(), SmallCorpus(4, 1), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(TrainerTest, InputValidation) {
  const ModelConfig c = SmallConfig(1, 8, 48);
  TrainOptions o;
  o.steps = 1;
  EXPECT_THROW(TrainToyLm(c, BundledTokenizer(), {}, o), Error);
  EXPECT_THROW(TrainToyLm(c, BundledTokenizer(), {{1}}, o), Error);
  o.learning_rate = 0;
  EXPECT_THROW(TrainToyLm(c, BundledTokenizer(), SmallCorpus(2, 1), o), Error);
  o.learning_rate = 1e-3;
  o.steps = -1;
  EXPECT_THROW(TrainToyLm(c, BundledTokenizer(), SmallCorpus(2, 1), o), Error);
}

}  // namespace
}  // namespace dpsteer
