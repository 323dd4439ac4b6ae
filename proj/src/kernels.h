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

// Row-wise numeric kernels shared by inference and training. Every output
// element is accumulated in a fixed index order, so a row's result does not
// depend on how many other rows are processed alongside it.

#ifndef DPSTEER_SRC_KERNELS_H_
#define DPSTEER_SRC_KERNELS_H_

#include <cmath>

namespace dpsteer::internal {

inline constexpr double kLayerNormEps = 1e-5;

// y[r] = b + x[r] W for W stored (in x out).
inline void Affine(const double* x, int rows, int in, const double* w,
                   const double* b, int out, double* y) {
  for (int r = 0; r < rows; ++r) {
    double* yr = y + static_cast<long>(r) * out;
    const double* xr = x + static_cast<long>(r) * in;
    for (int j = 0; j < out; ++j) yr[j] = b ? b[j] : 0.0;
    for (int k = 0; k < in; ++k) {
      const double xv = xr[k];
      const double* wk = w + static_cast<long>(k) * out;
      for (int j = 0; j < out; ++j) yr[j] += xv * wk[j];
    }
  }
}

// Four-lane dot product; deterministic for a given length.
inline double Dot4(const double* a, const double* b, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

// Normalizes each row; optionally records mean and 1/std for backward.
inline void LayerNorm(const double* x, int rows, int d, const double* gain,
                      const double* bias, double* y, double* mean_out,
                      double* rstd_out) {
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<long>(r) * d;
    double* yr = y + static_cast<long>(r) * d;
    double mean = 0.0;
    for (int i = 0; i < d; ++i) mean += xr[i];
    mean /= d;
    double var = 0.0;
    for (int i = 0; i < d; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= d;
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int i = 0; i < d; ++i) {
      yr[i] = (xr[i] - mean) * rstd * gain[i] + bias[i];
    }
    if (mean_out) mean_out[r] = mean;
    if (rstd_out) rstd_out[r] = rstd;
  }
}

inline constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

inline double Gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
}

inline double GeluGrad(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

// One query row against keys/values rows [0, n_keys) for a single head.
// `probs` receives the n_keys softmax weights.
inline void AttendRow(const double* q, const double* keys, const double* values,
                      int stride, int n_keys, int head_dim, double* probs,
                      double* out) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  double max_score = -INFINITY;
  for (int j = 0; j < n_keys; ++j) {
    probs[j] = Dot4(q, keys + static_cast<long>(j) * stride, head_dim) * scale;
    if (probs[j] > max_score) max_score = probs[j];
  }
  double total = 0.0;
  for (int j = 0; j < n_keys; ++j) {
    probs[j] = std::exp(probs[j] - max_score);
    total += probs[j];
  }
  for (int j = 0; j < n_keys; ++j) probs[j] /= total;
  for (int i = 0; i < head_dim; ++i) out[i] = 0.0;
  for (int j = 0; j < n_keys; ++j) {
    const double p = probs[j];
    const double* vj = values + static_cast<long>(j) * stride;
    for (int i = 0; i < head_dim; ++i) out[i] += p * vj[i];
  }
}

}  // namespace dpsteer::internal

#endif  // DPSTEER_SRC_KERNELS_H_
