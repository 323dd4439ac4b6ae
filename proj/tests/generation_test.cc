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

#include "dpsteer/generation.h"

#include <gtest/gtest.h>

#include <set>

#include "dpsteer/error.h"
#include "test_support.h"

namespace dpsteer {
namespace {

DatasetVector UnitVector(int layer, int dim, uint64_t seed) {
  Rng rng(seed);
  Vector v = testing::RandomVector(dim, rng);
  const double n = Norm2(v);
  for (double& x : v) x /= n;
  return {layer, v, {}};
}

const Scaffold kScaffold{"pos",
                         {"the soup was warm", "great pie, will be back"}};

TEST(InjectTest, AddsScaledDirection) {
  const DatasetVector v{1, {0.6, 0.8}, {}};
  const Vector s = {1.0, -2.0};
  EXPECT_EQ(Inject(s, v, 0.0), s);
  const Vector out = Inject(s, v, 2.0);
  EXPECT_DOUBLE_EQ(out[0], 2.2);
  EXPECT_DOUBLE_EQ(out[1], -0.4);
  // Additive in beta.
  const Vector twice = Inject(Inject(s, v, 1.0), v, 1.0);
  EXPECT_NEAR(twice[0], out[0], 1e-15);
  EXPECT_NEAR(twice[1], out[1], 1e-15);
  EXPECT_THROW(Inject(Vector{1, 2, 3}, v, 1.0), Error);
}

TEST(SteeringSpecTest, Validation) {
  const Model& m = testing::BundledModel();
  SteeringSpec ok = SteeringSpec::FromVectors(
      {UnitVector(2, 64, 1), UnitVector(3, 64, 2)}, 1.4);
  EXPECT_NO_THROW(ok.Validate(m));
  EXPECT_EQ(ok.ToShifts().size(), 2u);
  try {
    SteeringSpec::FromVectors({UnitVector(5, 64, 1)}, 1.0).Validate(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIndex);
  }
  EXPECT_THROW(
      SteeringSpec::FromVectors({UnitVector(0, 64, 1)}, 1.0).Validate(m),
      Error);
  EXPECT_THROW(SteeringSpec::FromVectors(
                   {UnitVector(2, 64, 1), UnitVector(2, 64, 2)}, 1.0)
                   .Validate(m),
               Error);
  EXPECT_THROW(
      SteeringSpec::FromVectors({UnitVector(2, 32, 1)}, 1.0).Validate(m),
      Error);
  DatasetVector loose = UnitVector(2, 64, 1);
  loose.direction[0] += 1e-3;
  EXPECT_THROW(SteeringSpec::FromVectors({loose}, 1.0).Validate(m), Error);
}

TEST(GenerateSteeredTest, ZeroBetaIsBitIdenticalToUnsteered) {
  const Model& m = testing::BundledModel();
  const auto zero = SteeringSpec::FromVectors({UnitVector(2, 64, 3)}, 0.0);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_EQ(GenerateSteered(m, kScaffold, zero, {}, a),
              GenerateSteered(m, kScaffold, SteeringSpec{}, {}, b));
  }
}

TEST(GenerateSteeredTest, DeterministicAndSteeringChangesOutput) {
  const Model& m = testing::BundledModel();
  const auto strong = SteeringSpec::FromVectors({UnitVector(2, 64, 4)}, 8.0);
  int differ = 0;
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Rng a(seed), b(seed), c(seed);
    const std::string s1 = GenerateSteered(m, kScaffold, strong, {}, a);
    EXPECT_EQ(s1, GenerateSteered(m, kScaffold, strong, {}, b));
    differ += s1 != GenerateSteered(m, kScaffold, SteeringSpec{}, {}, c);
  }
  EXPECT_GT(differ, 0);
}

TEST(GenerateSteeredTest, RespectsLimitsAndValidatesOptions) {
  const Model& m = testing::BundledModel();
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_LE(GenerateSteered(m, kScaffold, {}, {1.6, 5, true}, rng).size(),
              5u);
  }
  EXPECT_THROW(GenerateSteered(m, kScaffold, {}, {0.0, 5, true}, rng), Error);
  EXPECT_THROW(GenerateSteered(m, kScaffold, {}, {1.0, 0, true}, rng), Error);
  try {
    GenerateSteered(m, kScaffold, {}, {1.0, 128, true}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLength);
  }
}

TEST(BuildNegativeSetTest, SizeAndDiversity) {
  const Model& m = testing::BundledModel();
  const auto one = BuildNegativeSet(m, kScaffold, 1, 5);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_FALSE(one[0].empty());
  const auto many = BuildNegativeSet(m, kScaffold, 16, 5);
  ASSERT_EQ(many.size(), 16u);
  EXPECT_GE(std::set<std::string>(many.begin(), many.end()).size(), 2u);
  EXPECT_EQ(many, BuildNegativeSet(m, kScaffold, 16, 5));
}

TEST(RejectionFilterTest, Examples) {
  const std::vector<std::string> s = {"a", "b", "c"};
  auto score = [](const std::string& t) {
    return t == "a" ? 5.0 : t == "b" ? 6.0 : 7.0;
  };
  EXPECT_EQ(RejectionFilter(s, score, 6.0),
            (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(RejectionFilter(s, score, 0.0), s);
  EXPECT_TRUE(RejectionFilter(s, score, 100.0).empty());
}

TEST(RuleBasedQualityScoreTest, RangeAndOrdering) {
  EXPECT_DOUBLE_EQ(RuleBasedQualityScore(""), 1.0);
  const double good = RuleBasedQualityScore("the soup was warm and fresh");
  const double bad = RuleBasedQualityScore(
      "xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx");
  EXPECT_GT(good, bad);
  EXPECT_LE(good, 10.0);
  EXPECT_GE(bad, 1.0);
  EXPECT_THROW(ScorerByName("perplexity"), Error);
  EXPECT_DOUBLE_EQ(ScorerByName("rule-based")("fine food here"),
                   RuleBasedQualityScore("fine food here"));
}

TEST(GenerateDatasetTest, CountLabelsAndSeeds) {
  const Model& m = testing::BundledModel();
  GenerationConfig cfg;
  cfg.label = "pos";
  cfg.scaffold = kScaffold;
  cfg.count = 6;
  cfg.seed = 17;
  const auto steer = SteeringSpec::FromVectors({UnitVector(3, 64, 6)}, 1.4);
  const auto ds = GenerateDataset(m, cfg, steer);
  ASSERT_EQ(ds.records.size(), 6u);
  ASSERT_EQ(ds.sample_seeds.size(), 6u);
  EXPECT_GE(ds.attempts, 6);
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(ds.records[i].label, "pos");
    EXPECT_FALSE(ds.records[i].text.empty());
    Rng rng(ds.sample_seeds[i]);
    EXPECT_EQ(GenerateSteered(m, kScaffold, steer, cfg.sampling, rng),
              ds.records[i].text);
  }
  cfg.threads = 3;
  const auto threaded = GenerateDataset(m, cfg, steer);
  EXPECT_EQ(threaded.records, ds.records);
  EXPECT_EQ(threaded.sample_seeds, ds.sample_seeds);
  EXPECT_EQ(threaded.attempts, ds.attempts);

  cfg.threads = 1;
  cfg.rejection = RejectionRule{};
  const auto filtered = GenerateDataset(m, cfg, steer);
  for (const auto& r : filtered.records)
    EXPECT_GE(RuleBasedQualityScore(r.text), 6.0);

  cfg.rejection = RejectionRule{"rule-based", 11.0};
  cfg.max_attempt_factor = 2;
  EXPECT_THROW(GenerateDataset(m, cfg, steer), Error);
  cfg.rejection.reset();
  cfg.label = "neg";
  EXPECT_THROW(GenerateDataset(m, cfg, steer), Error);
}

}  // namespace
}  // namespace dpsteer
