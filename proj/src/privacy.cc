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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dpsteer/error.h"

namespace dpsteer {

namespace {

std::string Describe(const PrivacyBudget& b) {
  return "(epsilon=" + std::to_string(b.epsilon) +
         ", delta=" + std::to_string(b.delta) + ")";
}

double SplitEvenly(double total, int parts) {
  const double base = total / parts;
  if (!std::isfinite(base) || parts == 1) return base;
  std::vector<double> copies(parts);
  double candidate = base;
  // Walk outward from the rounded quotient looking for a share whose L-fold
  // sum rounds back to the total.
  for (int step = 0; step <= 16; ++step) {
    for (double dir : {1.0, -1.0}) {
      candidate = base;
      for (int k = 0; k < step; ++k) {
        candidate = std::nextafter(candidate, dir * INFINITY);
      }
      if (candidate < 0) continue;
      std::fill(copies.begin(), copies.end(), candidate);
      if (ExactSum(copies) == total) return candidate;
      if (step == 0) break;
    }
  }
  return base;
}

}  // namespace

void PrivacyBudget::Validate() const {
  if (!(epsilon >= 0.0) || !(delta >= 0.0) || !(delta < 1.0)) {
    throw Error(ErrorKind::kInvalidBudget,
                "invalid privacy budget " + Describe(*this));
  }
}

void SubsampleSpec::Validate() const {
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(
        ErrorKind::kParameter,
        "subsampling fraction q=" + std::to_string(q) + " outside (0, 1]");
  }
}

double ExactSum(std::span<const double> values) {
  std::vector<double> partials;
  double special = 0.0;
  for (double x : values) {
    if (!std::isfinite(x)) {
      special += x;
      continue;
    }
    size_t i = 0;
    for (double y : partials) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (special != 0.0 || std::isnan(special)) return special;

  size_t n = partials.size();
  double hi = 0.0;
  if (n > 0) {
    hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // Round-half-even correction when the remaining partials push the
    // truncated tail across the halfway point.
    if (n > 0 &&
        ((lo < 0 && partials[n - 1] < 0) || (lo > 0 && partials[n - 1] > 0))) {
      const double y = lo * 2;
      const double x = hi + y;
      const double yr = x - hi;
      if (y == yr) hi = x;
    }
  }
  return hi;
}

double GaussianSigmaForSensitivity(double sensitivity,
                                   const PrivacyBudget& budget) {
  if (!(budget.epsilon > 0.0)) {
    throw Error(ErrorKind::kParameter,
                "gaussian calibration needs epsilon > 0");
  }
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    throw Error(ErrorKind::kParameter,
                "gaussian calibration needs delta in (0, 1)");
  }
  if (!(sensitivity >= 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorKind::kParameter, "sensitivity must be finite and >= 0");
  }
  if (std::isinf(budget.epsilon)) return 0.0;
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / budget.delta)) /
         budget.epsilon;
}

double GaussianSigma(double clip, int n, const PrivacyBudget& budget) {
  if (n < 1) throw Error(ErrorKind::kParameter, "n must be >= 1");
  if (!(clip >= 0.0)) throw Error(ErrorKind::kParameter, "clip must be >= 0");
  return GaussianSigmaForSensitivity(2.0 * clip / n, budget);
}

bool SatisfiesGaussianCalibration(double sigma, double sensitivity,
                                  const PrivacyBudget& budget) {
  if (std::isinf(budget.epsilon)) return sigma >= 0.0;
  return sigma >= sensitivity * std::sqrt(2.0 * std::log(1.25 / budget.delta)) /
                      budget.epsilon;
}

PrivacyBudget ComposeBasic(std::span<const PrivacyBudget> budgets) {
  std::vector<double> eps, del;
  eps.reserve(budgets.size());
  del.reserve(budgets.size());
  for (const auto& b : budgets) {
    b.Validate();
    eps.push_back(b.epsilon);
    del.push_back(b.delta);
  }
  PrivacyBudget out{ExactSum(eps), ExactSum(del)};
  if (!(out.delta < 1.0)) {
    throw Error(ErrorKind::kInvalidBudget,
                "composed delta " + std::to_string(out.delta) + " >= 1");
  }
  return out;
}

PrivacyBudget AllocatePerLayer(const PrivacyBudget& total, int layers) {
  if (layers < 1) throw Error(ErrorKind::kParameter, "layers must be >= 1");
  total.Validate();
  return {SplitEvenly(total.epsilon, layers), SplitEvenly(total.delta, layers)};
}

PrivacyBudget AmplifySubsample(const PrivacyBudget& vec,
                               const SubsampleSpec& spec) {
  spec.Validate();
  vec.Validate();
  if (spec.q == 1.0) return vec;
  if (std::isinf(vec.epsilon)) return {vec.epsilon, spec.q * vec.delta};
  return {std::log1p(spec.q * std::expm1(vec.epsilon)), spec.q * vec.delta};
}

PrivacyBudget TotalPipelineBudget(const PrivacyBudget& fixed_shots,
                                  const PrivacyBudget& vectors,
                                  const SubsampleSpec& spec) {
  fixed_shots.Validate();
  const PrivacyBudget amplified = AmplifySubsample(vectors, spec);
  PrivacyBudget out{fixed_shots.epsilon + amplified.epsilon,
                    fixed_shots.delta + amplified.delta};
  if (!(out.delta < 1.0)) {
    throw Error(ErrorKind::kInvalidBudget,
                "total delta " + std::to_string(out.delta) + " >= 1");
  }
  return out;
}

PrivacyBudget SolveVectorBudget(const PrivacyBudget& total,
                                const PrivacyBudget& fixed_shots,
                                const SubsampleSpec& spec) {
  total.Validate();
  fixed_shots.Validate();
  spec.Validate();
  if (!(total.epsilon > fixed_shots.epsilon)) {
    throw Error(ErrorKind::kInvalidBudget,
                "fixed-shot epsilon " + std::to_string(fixed_shots.epsilon) +
                    " leaves nothing of total " + Describe(total));
  }
  if (!(total.delta > fixed_shots.delta)) {
    throw Error(ErrorKind::kInvalidBudget,
                "fixed-shot delta " + std::to_string(fixed_shots.delta) +
                    " leaves nothing of total " + Describe(total));
  }
  PrivacyBudget vec;
  if (std::isinf(total.epsilon)) {
    vec.epsilon = total.epsilon;
  } else {
    // Invert eps_rest = log(1 + q (e^eps_vec - 1)).
    vec.epsilon =
        std::log1p(std::expm1(total.epsilon - fixed_shots.epsilon) / spec.q);
  }
  vec.delta = (total.delta - fixed_shots.delta) / spec.q;
  if (!(vec.delta < 1.0)) {
    throw Error(ErrorKind::kInvalidBudget,
                "vector delta " + std::to_string(vec.delta) +
                    " >= 1 after undoing subsampling");
  }
  return vec;
}

BudgetReport PlanBudget(const BudgetRequest& request) {
  request.total.Validate();
  if (!(request.total.delta > 0.0)) {
    throw Error(ErrorKind::kInvalidBudget, "total delta must be > 0");
  }
  if (!(request.epsilon_fs > 0.0)) {
    throw Error(ErrorKind::kInvalidBudget, "fixed-shot epsilon must be > 0");
  }
  if (!(request.delta_fs_share > 0.0 && request.delta_fs_share < 1.0)) {
    throw Error(ErrorKind::kInvalidBudget,
                "fixed-shot delta share must lie in (0, 1)");
  }
  if (request.layers.empty()) {
    throw Error(ErrorKind::kParameter, "at least one injection layer needed");
  }
  SubsampleSpec spec{request.q};
  spec.Validate();

  BudgetReport report;
  report.q = request.q;
  report.fixed_shots = {request.epsilon_fs,
                        request.total.delta * request.delta_fs_share};
  const PrivacyBudget vec =
      SolveVectorBudget(request.total, report.fixed_shots, spec);
  const int L = static_cast<int>(request.layers.size());
  const PrivacyBudget share = AllocatePerLayer(vec, L);
  std::vector<PrivacyBudget> copies(L, share);
  report.vectors = ComposeBasic(copies);
  report.total = TotalPipelineBudget(report.fixed_shots, report.vectors, spec);
  for (int layer : request.layers) {
    LayerBudget lb;
    lb.layer = layer;
    lb.budget = share;
    report.per_layer.push_back(lb);
  }
  return report;
}

void CalibrateLayers(BudgetReport& report, double clip, int n,
                     const SigmaCalibrator& calibrator) {
  report.accountant = calibrator.name;
  for (auto& lb : report.per_layer) {
    lb.clip = clip;
    lb.n = n;
    lb.sigma = calibrator.fn(clip, n, lb.budget);
    lb.has_sigma = true;
  }
}

nlohmann::json JsonValue(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double DoubleFromJson(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::kInput, "expected a number, got " + j.dump());
}

nlohmann::json BudgetReportToJson(const BudgetReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& lb : r.per_layer) {
    nlohmann::json j = {{"layer", lb.layer},
                        {"epsilon", JsonValue(lb.budget.epsilon)},
                        {"delta", lb.budget.delta}};
    if (lb.has_sigma) {
      j["C"] = lb.clip;
      j["n"] = lb.n;
      j["sigma"] = lb.sigma;
    }
    layers.push_back(j);
  }
  return {{"epsilon_total", JsonValue(r.total.epsilon)},
          {"delta_total", r.total.delta},
          {"epsilon_fs", JsonValue(r.fixed_shots.epsilon)},
          {"delta_fs", r.fixed_shots.delta},
          {"epsilon_vec", JsonValue(r.vectors.epsilon)},
          {"delta_vec", r.vectors.delta},
          {"q", r.q},
          {"accountant", r.accountant},
          {"per_layer", layers}};
}

}  // namespace dpsteer
