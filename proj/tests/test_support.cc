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

#include "test_support.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dpsteer/checkpoint.h"
#include "dpsteer/corpus.h"

namespace dpsteer::testing {

std::string DataPath(const std::string& name) {
  return std::string(DPSTEER_DATA_DIR) + "/" + name;
}

const Model& BundledModel() {
  static const Model model = LoadCheckpoint(DataPath("bundled_model.ckpt"));
  return model;
}

const std::vector<Record>& PrivateRecords() {
  static const std::vector<Record> records =
      ReadJsonl(DataPath("private.jsonl"));
  return records;
}

std::vector<std::string> HeldOutTexts(const std::string& label) {
  return TextsWithLabel(ReadJsonl(DataPath("heldout.jsonl")), label);
}

Model TinyModel(int layers, int hidden, int heads, int context, uint64_t seed) {
  const Tokenizer tok = BundledTokenizer();
  ModelConfig c;
  c.vocab_size = tok.vocab_size();
  c.num_layers = layers;
  c.hidden_dim = hidden;
  c.num_heads = heads;
  c.context_len = context;
  c.seed = seed;
  return Model(c, tok);
}

Matrix RandomMatrix(int rows, int cols, Rng& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.data) v = n(rng);
  return m;
}

Vector RandomVector(int n, Rng& rng, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double DenseCurveAreaOracle(const std::vector<double>& p,
                            const std::vector<double>& q, double c,
                            int intervals) {
  using F = long double;
  auto smooth = [](const std::vector<double>& h) {
    std::vector<F> out(h.size());
    F total = 0;
    for (size_t i = 0; i < h.size(); ++i) total += out[i] = F(h[i]) + F(1e-9);
    for (F& v : out) v /= total;
    return out;
  };
  const auto ps = smooth(p), qs = smooth(q);
  auto point = [&](F lambda, F* x, F* y, F* dx) {
    F kl_p = 0, kl_q = 0, dkl_p = 0;
    for (size_t b = 0; b < ps.size(); ++b) {
      const F r = lambda * ps[b] + (1 - lambda) * qs[b];
      kl_p += ps[b] * std::log(ps[b] / r);
      kl_q += qs[b] * std::log(qs[b] / r);
      dkl_p -= ps[b] * (ps[b] - qs[b]) / r;
    }
    *x = std::exp(-F(c) * kl_p);
    *y = std::exp(-F(c) * kl_q);
    *dx = -F(c) * *x * dkl_p;
  };
  F x0, y0, dx0;
  point(0, &x0, &y0, &dx0);
  const F h = F(1) / intervals;
  F sum = 0;
  for (int i = 0; i <= intervals; ++i) {
    F x, y, dx;
    point(i * h, &x, &y, &dx);
    const F w = (i == 0 || i == intervals) ? 1 : (i % 2 ? 4 : 2);
    sum += w * y * dx;
  }
  // The corner (0, 1) contributes the rectangle left of the curve's start.
  return static_cast<double>(x0 * y0 + sum * h / 3);
}

std::string TempDir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("dpsteer_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace dpsteer::testing
