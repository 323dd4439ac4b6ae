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

#include "dpsteer/eval.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "dpsteer/error.h"
#include "dpsteer/privacy.h"
#include "dpsteer/rng.h"

namespace dpsteer {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix Stack(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) {
    throw Error(ErrorKind::kInput, "embedding dimensions differ");
  }
  Matrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
  return out;
}

std::vector<double> Smooth(std::span<const double> h) {
  std::vector<double> out(h.begin(), h.end());
  for (double& v : out) v += kHistogramSmoothing;
  const double total = ExactSum(out);
  for (double& v : out) v /= total;
  return out;
}

void CheckHistogram(std::span<const double> h, const char* name) {
  double total = 0.0;
  for (double v : h) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInput,
                  std::string(name) + " has a negative or non-finite bin");
    }
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInput, std::string(name) + " does not sum to 1");
  }
}

double KlDivergence(const std::vector<double>& p,
                    const std::vector<double>& r) {
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / r[i]);
  }
  return std::max(0.0, kl);
}

}  // namespace

void MauveConfig::Validate() const {
  if (num_bins < 0) throw Error(ErrorKind::kParameter, "num_bins must be >= 1");
  if (!(scaling_factor > 0.0) || !std::isfinite(scaling_factor)) {
    throw Error(ErrorKind::kParameter, "scaling factor must be > 0");
  }
  if (lambda_grid_size < 2) {
    throw Error(ErrorKind::kParameter, "lambda grid needs >= 2 points");
  }
  if (max_iterations < 1) {
    throw Error(ErrorKind::kParameter, "max_iterations must be >= 1");
  }
}

int DefaultNumBins(int n, int m) {
  return std::max(1, std::min(200, (n + m) / 10));
}

Quantization Quantize(const Matrix& real, const Matrix& synthetic, int num_bins,
                      uint64_t seed, int max_iterations) {
  if (real.rows == 0 || synthetic.rows == 0) {
    throw Error(ErrorKind::kInput, "quantization needs nonempty sets");
  }
  const Matrix x = Stack(real, synthetic);
  const int total = x.rows;
  if (num_bins < 1 || num_bins > total) {
    throw Error(ErrorKind::kParameter, "num_bins " + std::to_string(num_bins) +
                                           " outside [1, " +
                                           std::to_string(total) + "]");
  }
  const int k = num_bins;
  Rng rng(seed);

  // k-means++ seeding.
  Matrix centers(k, x.cols);
  std::vector<double> nearest(total, std::numeric_limits<double>::infinity());
  int first = std::uniform_int_distribution<int>(0, total - 1)(rng);
  std::copy_n(x.row(first), x.cols, centers.row(0));
  for (int c = 1; c < k; ++c) {
    double sum = 0.0;
    for (int i = 0; i < total; ++i) {
      nearest[i] = std::min(
          nearest[i], SquaredDistance(x.row_span(i), centers.row_span(c - 1)));
      sum += nearest[i];
    }
    int pick = 0;
    if (sum > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, sum)(rng);
      pick = total - 1;
      for (int i = 0; i < total; ++i) {
        u -= nearest[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<int>(0, total - 1)(rng);
    }
    std::copy_n(x.row(pick), x.cols, centers.row(c));
  }

  // Lloyd iterations; an empty cluster keeps its center.
  std::vector<int> assign(total, -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (int i = 0; i < total; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = SquaredDistance(x.row_span(i), centers.row_span(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums(k, x.cols);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < total; ++i) {
      ++counts[assign[i]];
      double* s = sums.row(assign[i]);
      const double* r = x.row(i);
      for (int j = 0; j < x.cols; ++j) s[j] += r[j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int j = 0; j < x.cols; ++j) centers(c, j) = sums(c, j) / counts[c];
    }
  }

  Quantization q;
  q.assignment = assign;
  q.hist_p.assign(k, 0.0);
  q.hist_q.assign(k, 0.0);
  for (int i = 0; i < real.rows; ++i) q.hist_p[assign[i]] += 1.0;
  for (int i = real.rows; i < total; ++i) q.hist_q[assign[i]] += 1.0;
  for (double& v : q.hist_p) v /= real.rows;
  for (double& v : q.hist_q) v /= synthetic.rows;
  return q;
}

std::string DivergenceCurve::ToCsv() const {
  std::ostringstream out;
  out << std::setprecision(17) << "lambda,x,y\n";
  for (const auto& p : points)
    out << p.lambda << ',' << p.x << ',' << p.y << '\n';
  return out.str();
}

DivergenceCurve BuildDivergenceCurve(std::span<const double> hist_p,
                                     std::span<const double> hist_q,
                                     double scaling_factor,
                                     int lambda_grid_size) {
  if (hist_p.size() != hist_q.size() || hist_p.empty()) {
    throw Error(ErrorKind::kInput, "histograms must have equal nonzero length");
  }
  if (!(scaling_factor > 0.0)) {
    throw Error(ErrorKind::kParameter, "scaling factor must be > 0");
  }
  if (lambda_grid_size < 2) {
    throw Error(ErrorKind::kParameter, "lambda grid needs >= 2 points");
  }
  CheckHistogram(hist_p, "P");
  CheckHistogram(hist_q, "Q");
  const std::vector<double> p = Smooth(hist_p);
  const std::vector<double> q = Smooth(hist_q);
  const int g = lambda_grid_size;
  const double denom = g - 1;

  DivergenceCurve curve;
  std::vector<double> r(p.size());
  for (int i = 0; i < g; ++i) {
    // i P + (g-1-i) Q is exactly mirrored by swapping P and Q.
    for (size_t b = 0; b < p.size(); ++b) {
      r[b] = (i * p[b] + (g - 1 - i) * q[b]) / denom;
    }
    curve.points.push_back({i / denom,
                            std::exp(-scaling_factor * KlDivergence(p, r)),
                            std::exp(-scaling_factor * KlDivergence(q, r))});
  }

  std::vector<std::pair<double, double>> xy = {{0.0, 1.0}, {1.0, 0.0}};
  for (const auto& pt : curve.points) xy.emplace_back(pt.x, pt.y);
  std::sort(xy.begin(), xy.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  double area = 0.0;
  for (size_t i = 1; i < xy.size(); ++i) {
    area += 0.5 * (xy[i].first - xy[i - 1].first) *
            (xy[i].second + xy[i - 1].second);
  }
  curve.area = std::clamp(area, 0.0, 1.0);
  return curve;
}

double MauveScore(std::span<const double> hist_p,
                  std::span<const double> hist_q, const MauveConfig& config) {
  config.Validate();
  return BuildDivergenceCurve(hist_p, hist_q, config.scaling_factor,
                              config.lambda_grid_size)
      .area;
}

int DistinctOpeningNgrams(const std::vector<std::string>& texts, int n) {
  if (n < 1) throw Error(ErrorKind::kParameter, "n must be >= 1");
  std::set<std::vector<std::string>> openings;
  for (const auto& t : texts) {
    std::istringstream in(t);
    std::vector<std::string> head;
    std::string tok;
    while (static_cast<int>(head.size()) < n && in >> tok) head.push_back(tok);
    if (static_cast<int>(head.size()) == n) openings.insert(std::move(head));
  }
  return static_cast<int>(openings.size());
}

nlohmann::json FidelityReport::ToJson() const {
  return {{"mauve", mauve},
          {"num_bins", num_bins},
          {"scaling_factor", scaling_factor},
          {"distinct_3grams_real", distinct_3grams_real},
          {"distinct_3grams_syn", distinct_3grams_syn},
          {"seeds", {{"quantize", seed}}},
          {"smoothing", kHistogramSmoothing},
          {"lambda_grid_size", static_cast<int>(curve.points.size())}};
}

FidelityReport EvaluateEmbeddings(const Matrix& real, const Matrix& synthetic,
                                  const MauveConfig& config) {
  config.Validate();
  FidelityReport report;
  report.num_bins = config.num_bins > 0
                        ? config.num_bins
                        : DefaultNumBins(real.rows, synthetic.rows);
  report.scaling_factor = config.scaling_factor;
  report.seed = config.seed;
  const Quantization q = Quantize(real, synthetic, report.num_bins, config.seed,
                                  config.max_iterations);
  report.curve = BuildDivergenceCurve(q.hist_p, q.hist_q, config.scaling_factor,
                                      config.lambda_grid_size);
  report.mauve = report.curve.area;
  return report;
}

FidelityReport EvaluateFidelity(const std::vector<std::string>& real_texts,
                                const std::vector<std::string>& syn_texts,
                                const Model& model, const MauveConfig& config) {
  if (real_texts.empty() || syn_texts.empty()) {
    throw Error(ErrorKind::kInput, "both corpora must be nonempty");
  }
  FidelityReport report = EvaluateEmbeddings(
      EmbedTexts(model, real_texts), EmbedTexts(model, syn_texts), config);
  report.distinct_3grams_real = DistinctOpeningNgrams(real_texts, 3);
  report.distinct_3grams_syn = DistinctOpeningNgrams(syn_texts, 3);
  return report;
}

}  // namespace dpsteer
