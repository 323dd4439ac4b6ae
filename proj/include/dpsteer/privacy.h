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

#ifndef DPSTEER_PRIVACY_H_
#define DPSTEER_PRIVACY_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dpsteer {

// (epsilon, delta) guarantee under the substitution neighbouring relation:
// datasets of equal size that differ in exactly one record. Under that
// relation a clipped mean over n records has l2-sensitivity 2C/n, twice the
// add/remove value.
//
// epsilon may be +infinity to denote a non-private release (sigma = 0).
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  // Throws kInvalidBudget unless epsilon >= 0 and 0 <= delta < 1.
  void Validate() const;

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;
};

// Fraction q = m / n of the private set, sampled without replacement.
struct SubsampleSpec {
  double q = 1.0;

  void Validate() const;
};

// Smallest Gaussian scale for l2-sensitivity `sensitivity`:
//   sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon.
// Throws kParameter unless epsilon > 0, 0 < delta < 1 and sensitivity >= 0.
// Returns 0 for epsilon = +infinity.
double GaussianSigmaForSensitivity(double sensitivity,
                                   const PrivacyBudget& budget);

// Noise scale for a clipped mean of n records: sensitivity 2C / n.
double GaussianSigma(double clip, int n, const PrivacyBudget& budget);

// Whether sigma meets the calibration bound for the given sensitivity.
bool SatisfiesGaussianCalibration(double sigma, double sensitivity,
                                  const PrivacyBudget& budget);

// Basic composition (sum epsilon_i, sum delta_i). Both sums are correctly
// rounded, so the result is independent of input order and grouping.
// Throws kInvalidBudget when the composed delta reaches 1.
PrivacyBudget ComposeBasic(std::span<const PrivacyBudget> budgets);

// Equal split across `layers` mechanisms. Where binary64 allows it, the
// returned share composes back to `total` exactly under ComposeBasic;
// otherwise the recomposition is within one ulp.
PrivacyBudget AllocatePerLayer(const PrivacyBudget& total, int layers);

// Amplification by sampling without replacement:
//   (log(1 + q (e^eps - 1)), q delta).
PrivacyBudget AmplifySubsample(const PrivacyBudget& vec,
                               const SubsampleSpec& spec);

// eps_fs + log(1 + q (e^eps_vec - 1)), delta_fs + q delta_vec.
// Throws kInvalidBudget when the total delta reaches 1.
PrivacyBudget TotalPipelineBudget(const PrivacyBudget& fixed_shots,
                                  const PrivacyBudget& vectors,
                                  const SubsampleSpec& spec);

// Vector budget that, combined with `fixed_shots` under TotalPipelineBudget,
// spends exactly `total`. Throws kInvalidBudget when nothing remains.
PrivacyBudget SolveVectorBudget(const PrivacyBudget& total,
                                const PrivacyBudget& fixed_shots,
                                const SubsampleSpec& spec);

// Pluggable sigma calibration for one layer's clipped mean. The default is
// the closed form above; a tighter numerical accountant can be dropped in.
struct SigmaCalibrator {
  std::string name = "closed-form";
  std::function<double(double clip, int n, const PrivacyBudget& per_layer)> fn =
      GaussianSigma;
};

struct BudgetRequest {
  PrivacyBudget total{3.0, 1e-5};
  double epsilon_fs = 0.1;
  // Share of the total delta spent on fixed-shot selection.
  double delta_fs_share = 0.1;
  double q = 1.0;
  std::vector<int> layers;
};

struct LayerBudget {
  int layer = 0;
  PrivacyBudget budget;
  // Filled once the private set size is known.
  double clip = 0.0;
  int n = 0;
  double sigma = 0.0;
  bool has_sigma = false;
};

struct BudgetReport {
  PrivacyBudget total;  // forward-evaluated from the components
  PrivacyBudget fixed_shots;
  PrivacyBudget vectors;  // composed over layers, before amplification
  double q = 1.0;
  std::string accountant = "closed-form";
  std::vector<LayerBudget> per_layer;
};

// Splits a requested total into fixed-shot, vector and per-layer budgets
// and re-derives the total forward. Needs no private data; throws
// kInvalidBudget on any infeasible request.
BudgetReport PlanBudget(const BudgetRequest& request);

// Fills sigma for every layer given the clip threshold and the number of
// private records the vectors are computed from.
void CalibrateLayers(BudgetReport& report, double clip, int n,
                     const SigmaCalibrator& calibrator = {});

nlohmann::json BudgetReportToJson(const BudgetReport& report);

// JSON numbers with infinities spelled "inf" / "-inf".
nlohmann::json JsonValue(double v);
double DoubleFromJson(const nlohmann::json& j);

// Correctly rounded sum of doubles (Shewchuk / fsum).
double ExactSum(std::span<const double> values);

}  // namespace dpsteer

#endif  // DPSTEER_PRIVACY_H_
