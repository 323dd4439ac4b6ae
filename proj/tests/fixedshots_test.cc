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

#include "dpsteer/fixedshots.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "dpsteer/error.h"
#include "dpsteer/rng.h"
#include "test_support.h"

namespace dpsteer {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

Matrix Rows(std::vector<std::vector<double>> rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows; ++r)
    std::copy(rows[r].begin(), rows[r].end(), m.row(r));
  return m;
}

TEST(AssignNearestTest, Examples) {
  const Matrix cand = Rows({{1, 0}, {0, 1}, {-1, 0}});
  const Matrix priv = Rows({{2, 0.1}, {0.1, 5}, {-3, -0.2}, {1, 1}});
  // Scale does not matter; exact ties go to the lowest index.
  EXPECT_EQ(AssignNearest(priv, cand), (std::vector<int>{0, 1, 2, 0}));
  const Matrix dup = Rows({{1, 1}, {2, 2}});
  EXPECT_EQ(AssignNearest(Rows({{3, 3}}), dup), (std::vector<int>{0}));
}

TEST(AssignNearestTest, Errors) {
  EXPECT_THROW(AssignNearest(Rows({{0, 0}}), Rows({{1, 0}})), Error);
  EXPECT_THROW(AssignNearest(Rows({{1, 0}}), Rows({{1, 0, 0}})), Error);
}

TEST(AssignNearestTest, MatchesBruteForce) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix priv = testing::RandomMatrix(7, 5, rng);
    const Matrix cand = testing::RandomMatrix(5, 5, rng);
    const auto got = AssignNearest(priv, cand);
    for (int i = 0; i < 7; ++i) {
      std::vector<double> sims;
      for (int j = 0; j < 5; ++j) {
        sims.push_back(CosineSimilarity(priv.row_span(i), cand.row_span(j)));
      }
      EXPECT_EQ(got[i],
                std::max_element(sims.begin(), sims.end()) - sims.begin());
    }
  }
}

TEST(BuildHistogramTest, Examples) {
  EXPECT_EQ(BuildHistogram(std::vector<int>{0, 2, 2, 1, 2}, 4),
            (std::vector<int64_t>{1, 1, 3, 0}));
  EXPECT_EQ(BuildHistogram(std::vector<int>{}, 2),
            (std::vector<int64_t>{0, 0}));
  EXPECT_THROW(BuildHistogram(std::vector<int>{3}, 3), Error);
  EXPECT_THROW(BuildHistogram(std::vector<int>{0}, 0), Error);
}

TEST(BuildHistogramTest, CountsSumToNAndNeighboursMoveTwoBins) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 40, bins = 1 + trial % 9;
    std::uniform_int_distribution<int> pick(0, bins - 1);
    std::vector<int> a(n);
    for (int& x : a) x = pick(rng);
    const auto h = BuildHistogram(a, bins);
    EXPECT_EQ(std::accumulate(h.begin(), h.end(), int64_t{0}), n);
    auto b = a;
    b[pick(rng) % n] = pick(rng);
    const auto h2 = BuildHistogram(b, bins);
    double l2 = 0;
    for (int j = 0; j < bins; ++j)
      l2 += double(h[j] - h2[j]) * double(h[j] - h2[j]);
    EXPECT_LE(std::sqrt(l2), kHistogramSensitivity + 1e-15);
  }
}

TEST(SigmaForHistogramTest, MatchesHighPrecisionOracle) {
  for (auto [eps, delta] : {std::pair{0.1, 1e-6}, {0.5, 1e-5}, {2.0, 1e-7}}) {
    const Big want =
        sqrt(Big(2)) * sqrt(Big(2) * log(Big(1.25) / Big(delta))) / Big(eps);
    EXPECT_NEAR(SigmaForHistogram({eps, delta}), static_cast<double>(want),
                1e-12 * static_cast<double>(want));
  }
}

TEST(PrivatizeHistogramTest, ZeroSigmaKeepsCounts) {
  const auto h = PrivatizeHistogram({4, 0, 9}, 0.0, 7);
  EXPECT_EQ(h.noised, (std::vector<double>{4, 0, 9}));
  EXPECT_THROW(PrivatizeHistogram({1}, -1.0, 0), Error);
  const auto a = PrivatizeHistogram({4, 0, 9}, 2.0, 7);
  const auto b = PrivatizeHistogram({4, 0, 9}, 2.0, 7);
  EXPECT_EQ(a.noised, b.noised);
  EXPECT_NE(a.noised, PrivatizeHistogram({4, 0, 9}, 2.0, 8).noised);
}

TEST(TopKTest, Examples) {
  EXPECT_EQ(TopK(std::vector<double>{5, 1, 3}, 2), (std::vector<int>{0, 2}));
  EXPECT_EQ(TopK(std::vector<double>{2, 2, 2}, 2), (std::vector<int>{0, 1}));
  EXPECT_EQ(TopK(std::vector<double>{-1, 4}, 2), (std::vector<int>{1, 0}));
  EXPECT_THROW(TopK(std::vector<double>{1}, 0), Error);
  EXPECT_THROW(TopK(std::vector<double>{1}, 2), Error);
}

TEST(TopKTest, MatchesFullSortOnRandomInstances) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 20, bins = 1 + trial % 10;
    std::uniform_int_distribution<int> pick(0, bins - 1);
    std::vector<int> a(n);
    for (int& x : a) x = pick(rng);
    const auto counts = BuildHistogram(a, bins);
    std::vector<double> scores(counts.begin(), counts.end());
    const int k = 1 + trial % bins;
    std::vector<int> order(bins);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return scores[x] > scores[y]; });
    order.resize(k);
    EXPECT_EQ(TopK(scores, k), order);
  }
}

TEST(SelectionTest, HigherCountsAreSelectedMoreOften) {
  const std::vector<int64_t> counts = {10, 8, 6, 4, 2};
  const int trials = 10000;
  std::vector<int> hits(counts.size(), 0);
  for (int t = 0; t < trials; ++t) {
    const auto h = PrivatizeHistogram(counts, 3.0, DeriveSeed(4, t));
    for (int j : TopK(h.noised, 2)) ++hits[j];
  }
  for (size_t j = 0; j + 1 < counts.size(); ++j) {
    // Three binomial standard deviations of slack on the difference.
    const double p = hits[j] / double(trials), q = hits[j + 1] / double(trials);
    const double sd = std::sqrt((p * (1 - p) + q * (1 - q)) / trials);
    EXPECT_GE(p - q, -3 * sd) << j;
  }
  EXPECT_GT(hits[0], hits[4]);
}

TEST(PrivateFixedShotsTest, ExemplarsComeFromPool) {
  Rng rng(5);
  CandidatePool pool;
  pool.label = "pos";
  for (int j = 0; j < 6; ++j) pool.texts.push_back("cand " + std::to_string(j));
  pool.embeddings = testing::RandomMatrix(6, 8, rng);
  const Matrix priv = testing::RandomMatrix(30, 8, rng);
  CoverageHistogram h;
  const auto shots = PrivateFixedShots(pool, priv, 2, {1.0, 1e-6}, 9, &h);
  ASSERT_EQ(shots.exemplars.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(shots.exemplars[i], pool.texts[shots.indices[i]]);
  }
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), int64_t{0}), 30);
  EXPECT_DOUBLE_EQ(shots.sigma, SigmaForHistogram({1.0, 1e-6}));
  EXPECT_EQ(shots.pool_hash, pool.Hash());
  EXPECT_EQ(shots.ToScaffold().shots, shots.exemplars);
  EXPECT_THROW(PrivateFixedShots(pool, priv, 7, {1.0, 1e-6}, 9), Error);
}

}  // namespace
}  // namespace dpsteer
