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

#ifndef DPSTEER_MATRIX_H_
#define DPSTEER_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace dpsteer {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }
  std::span<const double> row_span(int r) const {
    return {row(r), static_cast<size_t>(cols)};
  }
  double& operator()(int r, int c) { return row(r)[c]; }
  double operator()(int r, int c) const { return row(r)[c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> v);
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// Column mean of the rows.
Vector ColumnMean(const Matrix& m);

}  // namespace dpsteer

#endif  // DPSTEER_MATRIX_H_
