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

#ifndef DPSTEER_TRAINER_H_
#define DPSTEER_TRAINER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dpsteer/model.h"
#include "dpsteer/tokenizer.h"

namespace dpsteer {

struct TrainOptions {
  int steps = 1500;
  double learning_rate = 4e-3;
  uint64_t seed = 0;
  int batch_size = 8;
  // Global gradient-norm clip; <= 0 disables.
  double grad_clip = 1.0;
  // Learning rate decays linearly to this fraction of the initial value.
  double final_lr_fraction = 0.1;
};

struct TrainResult {
  Model model;
  // Mean batch cross-entropy before each update, one entry per step.
  std::vector<double> losses;
};

// Adam on next-token cross-entropy over minibatches drawn with the seed.
// Throws kInput on an empty corpus or a sequence shorter than 2 tokens,
// kParameter on bad options, kDivergence (naming the step) on a non-finite
// loss.
TrainResult TrainToyLm(const ModelConfig& config, const Tokenizer& tokenizer,
                       const std::vector<TokenSequence>& corpus,
                       const TrainOptions& options);

// Summed next-token cross-entropy of one sequence. When `grad` is non-empty
// the gradient of (scale * loss) is accumulated into it.
double SequenceLossAndGradient(const Model& model, const TokenSequence& tokens,
                               std::span<double> grad, double scale = 1.0);

// Mean cross-entropy per predicted token over `batch`, with its gradient
// written to `grad` when non-empty.
double BatchLossAndGradient(const Model& model,
                            std::span<const TokenSequence> batch,
                            std::span<double> grad);

}  // namespace dpsteer

#endif  // DPSTEER_TRAINER_H_
