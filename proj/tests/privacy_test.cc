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

#include "dpsteer/privacy.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dpsteer/error.h"
#include "dpsteer/rng.h"

namespace dpsteer {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

double OracleSigma(double clip, int n, double eps, double delta) {
  const Big sens = Big(2) * Big(clip) / Big(n);
  return static_cast<double>(sens * sqrt(Big(2) * log(Big(1.25) / Big(delta))) /
                             Big(eps));
}

double OracleAmplified(double eps, double q) {
  return static_cast<double>(log(Big(1) + Big(q) * (exp(Big(eps)) - Big(1))));
}

double RelErr(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

TEST(GaussianSigmaTest, ZeroClipGivesZero) {
  EXPECT_EQ(GaussianSigma(0.0, 10, {1.0, 1e-5}), 0.0);
}

TEST(GaussianSigmaTest, FactorsCancel) {
  const double delta = 1e-5;
  const double eps = std::sqrt(2 * std::log(1.25 / delta));
  EXPECT_NEAR(GaussianSigma(1.0, 2, {eps, delta}), 1.0, 1e-15);
}

TEST(GaussianSigmaTest, MatchesExtendedPrecision) {
  const double got = GaussianSigma(5.5, 500, {0.725, 2.5e-6});
  EXPECT_LE(RelErr(got, OracleSigma(5.5, 500, 0.725, 2.5e-6)), 1e-12);
}

TEST(GaussianSigmaTest, RandomDrawsMatchOracle) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 300; ++i) {
    const double clip = 0.1 + 10 * u(rng);
    const int n = 1 + static_cast<int>(1000 * u(rng));
    const double eps = 0.01 + 10 * u(rng);
    const double delta = std::pow(10.0, -1 - 9 * u(rng));
    EXPECT_LE(RelErr(GaussianSigma(clip, n, {eps, delta}),
                     OracleSigma(clip, n, eps, delta)),
              1e-12);
  }
}

TEST(GaussianSigmaTest, InfiniteEpsilonIsNoiseless) {
  EXPECT_EQ(
      GaussianSigma(5.5, 10, {std::numeric_limits<double>::infinity(), 1e-5}),
      0.0);
}

TEST(GaussianSigmaTest, RejectsBadParameters) {
  for (const PrivacyBudget b :
       {PrivacyBudget{0.0, 1e-5}, PrivacyBudget{1.0, 0.0},
        PrivacyBudget{1.0, 1.0}, PrivacyBudget{-1.0, 1e-5}}) {
    try {
      GaussianSigma(1.0, 1, b);
      FAIL() << "accepted " << b.epsilon << "," << b.delta;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParameter);
    }
  }
  EXPECT_THROW(GaussianSigma(1.0, 0, {1.0, 1e-5}), Error);
}

TEST(GaussianSigmaTest, CalibrationIsTight) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double sens = 0.01 + u(rng);
    const PrivacyBudget b{0.05 + 5 * u(rng), std::pow(10.0, -2 - 6 * u(rng))};
    const double sigma = GaussianSigmaForSensitivity(sens, b);
    EXPECT_TRUE(SatisfiesGaussianCalibration(sigma, sens, b));
    EXPECT_FALSE(SatisfiesGaussianCalibration(sigma * (1 - 1e-9), sens, b));
  }
}

TEST(ComposeBasicTest, Examples) {
  EXPECT_EQ(ComposeBasic({}), (PrivacyBudget{0.0, 0.0}));
  const std::vector<PrivacyBudget> two = {{1, 1e-5}, {2, 1e-5}};
  EXPECT_EQ(ComposeBasic(two), (PrivacyBudget{3, 2e-5}));
}

TEST(ComposeBasicTest, LCopiesGiveExactMultiple) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    const int L = 1 + static_cast<int>(16 * u(rng));
    const PrivacyBudget b{10 * u(rng), 1e-3 * u(rng)};
    std::vector<PrivacyBudget> copies(L, b);
    const PrivacyBudget got = ComposeBasic(copies);
    // The exact L-fold product rounded once.
    EXPECT_EQ(got.epsilon, static_cast<double>(Big(b.epsilon) * L));
    EXPECT_EQ(got.delta, static_cast<double>(Big(b.delta) * L));
  }
}

TEST(ComposeBasicTest, OrderAndGroupingInvariant) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PrivacyBudget> items;
    for (int i = 0; i < 9; ++i)
      items.push_back({u(rng) * std::pow(10, 4 * u(rng) - 2), 1e-4 * u(rng)});
    const PrivacyBudget whole = ComposeBasic(items);
    std::vector<PrivacyBudget> shuffled = items;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(ComposeBasic(shuffled), whole);
    // Regroup: compose in two halves, then compose the halves' exact sums
    // again via ExactSum of all members (associativity of the exact sum).
    std::vector<double> eps;
    for (const auto& b : shuffled) eps.push_back(b.epsilon);
    Big exact = 0;
    for (double e : eps) exact += Big(e);
    EXPECT_EQ(whole.epsilon, static_cast<double>(exact));
  }
}

TEST(ComposeBasicTest, DeltaOverflowIsInvalidBudget) {
  const std::vector<PrivacyBudget> b = {{1, 0.6}, {1, 0.5}};
  try {
    ComposeBasic(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidBudget);
  }
}

TEST(ExactSumTest, MatchesExtendedPrecision) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v;
    Big exact = 0;
    for (int i = 0; i < 20; ++i) {
      v.push_back(u(rng) * std::pow(10.0, 20 * u(rng)));
      exact += Big(v.back());
    }
    EXPECT_EQ(ExactSum(v), static_cast<double>(exact));
  }
  const std::vector<double> tricky = {1e100, 1.0, -1e100, 1e-100};
  EXPECT_EQ(ExactSum(tricky), 1.0);
}

TEST(AllocatePerLayerTest, Examples) {
  EXPECT_EQ(AllocatePerLayer({4, 4e-5}, 4), (PrivacyBudget{1, 1e-5}));
  const PrivacyBudget b{2.9, 9e-6};
  EXPECT_EQ(AllocatePerLayer(b, 1), b);
  EXPECT_THROW(AllocatePerLayer(b, 0), Error);
}

// Whether some double s has fl(L * s) == total when summed exactly.
bool ExactSplitExists(double total, int L) {
  double s = total / L;
  for (int k = 0; k < 64; ++k) s = std::nextafter(s, 0.0);
  for (int k = 0; k < 129; ++k, s = std::nextafter(s, INFINITY)) {
    if (static_cast<double>(Big(s) * L) == total) return true;
  }
  return false;
}

TEST(AllocatePerLayerTest, RoundTripExactWhenRepresentable) {
  Rng rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  int exact_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const int L = 1 + static_cast<int>(12 * u(rng));
    const PrivacyBudget total{0.01 + 10 * u(rng), 1e-4 * u(rng)};
    const PrivacyBudget share = AllocatePerLayer(total, L);
    std::vector<PrivacyBudget> copies(L, share);
    const PrivacyBudget back = ComposeBasic(copies);
    for (auto [got, want] : {std::pair{back.epsilon, total.epsilon},
                             std::pair{back.delta, total.delta}}) {
      if (ExactSplitExists(want, L)) {
        ++exact_cases;
        EXPECT_EQ(got, want);
      } else {
        EXPECT_LE(std::fabs(got - want), std::nextafter(want, INFINITY) - want);
      }
    }
  }
  EXPECT_GT(exact_cases, 1500);
}

TEST(AmplifySubsampleTest, FullDataIsIdentity) {
  const PrivacyBudget b{2.9, 9e-6};
  EXPECT_EQ(AmplifySubsample(b, {1.0}), b);
}

TEST(AmplifySubsampleTest, KnownValue) {
  const PrivacyBudget got = AmplifySubsample({3.0, 1e-5}, {0.1});
  EXPECT_NEAR(got.epsilon, 1.067656, 5e-6);
  EXPECT_LE(RelErr(got.epsilon, OracleAmplified(3.0, 0.1)), 1e-12);
  EXPECT_DOUBLE_EQ(got.delta, 1e-6);
}

TEST(AmplifySubsampleTest, StrictlyIncreasingInQAndNeverHurts) {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 300; ++i) {
    const double eps = 0.01 + 8 * u(rng);
    double q1 = 0.01 + 0.98 * u(rng), q2 = 0.01 + 0.98 * u(rng);
    if (q1 > q2) std::swap(q1, q2);
    if (q1 == q2) continue;
    const double e1 = AmplifySubsample({eps, 1e-6}, {q1}).epsilon;
    const double e2 = AmplifySubsample({eps, 1e-6}, {q2}).epsilon;
    EXPECT_LT(e1, e2);
    EXPECT_LT(e2, eps);
  }
}

TEST(AmplifySubsampleTest, RejectsBadQ) {
  for (double q : {0.0, -0.5, 1.5}) {
    EXPECT_THROW(AmplifySubsample({1, 1e-5}, {q}), Error);
  }
}

TEST(TotalPipelineBudgetTest, FullDataIsSum) {
  const PrivacyBudget t = TotalPipelineBudget({0.1, 1e-6}, {2.9, 9e-6}, {1.0});
  EXPECT_EQ(t.epsilon, 0.1 + 2.9);
  EXPECT_EQ(t.delta, 1e-6 + 9e-6);
}

TEST(TotalPipelineBudgetTest, NullVectorMechanism) {
  const PrivacyBudget t = TotalPipelineBudget({0.1, 1e-6}, {0.0, 0.0}, {0.3});
  EXPECT_EQ(t, (PrivacyBudget{0.1, 1e-6}));
}

TEST(TotalPipelineBudgetTest, MatchesOracle) {
  Rng rng(19);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 300; ++i) {
    const double efs = u(rng), evec = 10 * u(rng), q = 0.01 + 0.99 * u(rng);
    const PrivacyBudget t = TotalPipelineBudget({efs, 1e-6}, {evec, 1e-5}, {q});
    const double want = static_cast<double>(
        Big(efs) + log(Big(1) + Big(q) * (exp(Big(evec)) - Big(1))));
    EXPECT_LE(RelErr(t.epsilon, want), 1e-12);
  }
}

TEST(TotalPipelineBudgetTest, DeltaOverflow) {
  EXPECT_THROW(TotalPipelineBudget({0.1, 0.5}, {1.0, 0.6}, {1.0}), Error);
}

TEST(SolveVectorBudgetTest, ForwardCheck) {
  Rng rng(23);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 300; ++i) {
    const PrivacyBudget fs{0.1, 1e-6};
    const PrivacyBudget total{0.2 + 8 * u(rng), 1e-5};
    const SubsampleSpec spec{0.05 + 0.95 * u(rng)};
    const PrivacyBudget vec = SolveVectorBudget(total, fs, spec);
    const PrivacyBudget fwd = TotalPipelineBudget(fs, vec, spec);
    EXPECT_LE(RelErr(fwd.epsilon, total.epsilon), 1e-12);
    EXPECT_LE(RelErr(fwd.delta, total.delta), 1e-12);
  }
}

TEST(SolveVectorBudgetTest, PaperAllocationAtFullData) {
  const PrivacyBudget vec = SolveVectorBudget({3.0, 1e-5}, {0.1, 1e-6}, {1.0});
  EXPECT_NEAR(vec.epsilon, 2.9, 1e-15);
}

TEST(SolveVectorBudgetTest, NothingLeftIsInvalid) {
  try {
    SolveVectorBudget({0.1, 1e-5}, {0.1, 1e-6}, {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidBudget);
  }
}

TEST(PlanBudgetTest, ForwardTotalMatchesRequest) {
  BudgetRequest req;
  req.layers = {2, 3};
  const BudgetReport r = PlanBudget(req);
  EXPECT_NEAR(r.total.epsilon, 3.0, 1e-14);
  EXPECT_NEAR(r.total.delta, 1e-5, 1e-19);
  EXPECT_EQ(r.fixed_shots.epsilon, 0.1);
  EXPECT_DOUBLE_EQ(r.fixed_shots.delta, 1e-6);
  ASSERT_EQ(r.per_layer.size(), 2u);
  EXPECT_EQ(r.per_layer[0].budget, r.per_layer[1].budget);
  EXPECT_FALSE(r.per_layer[0].has_sigma);
}

TEST(PlanBudgetTest, RejectsInfeasibleRequests) {
  BudgetRequest req;
  req.layers = {2};
  req.total.epsilon = 0.05;
  EXPECT_THROW(PlanBudget(req), Error);
  req = BudgetRequest{};
  EXPECT_THROW(PlanBudget(req), Error);  // no layers
  req.layers = {1};
  req.delta_fs_share = 1.0;
  EXPECT_THROW(PlanBudget(req), Error);
}

TEST(CalibrateLayersTest, UsesCalibratorAndRecordsName) {
  BudgetRequest req;
  req.layers = {2, 3};
  BudgetReport r = PlanBudget(req);
  CalibrateLayers(r, 5.5, 250);
  EXPECT_EQ(r.accountant, "closed-form");
  EXPECT_EQ(r.per_layer[0].sigma,
            GaussianSigma(5.5, 250, r.per_layer[0].budget));
  SigmaCalibrator half{"half", [](double c, int n, const PrivacyBudget& b) {
                         return GaussianSigma(c, n, b) / 2;
                       }};
  CalibrateLayers(r, 5.5, 250, half);
  EXPECT_EQ(r.accountant, "half");
  EXPECT_EQ(r.per_layer[1].sigma,
            GaussianSigma(5.5, 250, r.per_layer[1].budget) / 2);
}

TEST(BudgetReportJsonTest, KeysAndInfinity) {
  BudgetRequest req;
  req.layers = {2};
  BudgetReport r = PlanBudget(req);
  CalibrateLayers(r, 5.5, 10);
  auto j = BudgetReportToJson(r);
  for (const char* key :
       {"epsilon_total", "delta_total", "epsilon_fs", "delta_fs", "epsilon_vec",
        "delta_vec", "q", "per_layer"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["per_layer"][0]["C"], 5.5);
  r.total.epsilon = std::numeric_limits<double>::infinity();
  EXPECT_EQ(BudgetReportToJson(r)["epsilon_total"], "inf");
  EXPECT_TRUE(std::isinf(DoubleFromJson("inf")));
}

}  // namespace
}  // namespace dpsteer
