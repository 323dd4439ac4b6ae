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

#include "dpsteer/matrix.h"

#include <cmath>

namespace dpsteer {

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm2(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  const double na = Norm2(a);
  const double nb = Norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(a, b) / (na * nb);
}

Vector ColumnMean(const Matrix& m) {
  Vector mean(m.cols, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    for (int c = 0; c < m.cols; ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= m.rows;
  return mean;
}

}  // namespace dpsteer
