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

#ifndef DPSTEER_MODEL_H_
#define DPSTEER_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpsteer/matrix.h"
#include "dpsteer/rng.h"
#include "dpsteer/tokenizer.h"

namespace dpsteer {

struct ModelConfig {
  int vocab_size = 0;
  int num_layers = 4;
  int hidden_dim = 64;
  int num_heads = 2;
  int context_len = 128;
  uint64_t seed = 0;

  int head_dim() const { return hidden_dim / num_heads; }
  int ffn_dim() const { return 4 * hidden_dim; }

  // Throws kParameter when a dimension is < 1 or heads do not divide d.
  void Validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Offsets of every named tensor inside the flat parameter vector. Weight
// matrices are stored input-major (in x out), so y = x W + b.
struct ParamLayout {
  struct Block {
    size_t ln1_gain, ln1_bias;
    size_t w_qkv, b_qkv;
    size_t w_proj, b_proj;
    size_t ln2_gain, ln2_bias;
    size_t w_fc, b_fc;
    size_t w_out, b_out;
  };

  size_t token_embedding = 0;     // vocab x d, also the output projection
  size_t position_embedding = 0;  // context x d
  std::vector<Block> blocks;
  size_t lnf_gain = 0, lnf_bias = 0;
  size_t total = 0;

  explicit ParamLayout(const ModelConfig& config);
};

// Designated pooling layer for text embeddings: ceil(L * 19 / 32).
int DefaultEmbedLayer(int num_layers);

// Pre-norm decoder-only transformer with learned positions and a tied output
// projection. Immutable once constructed; safe to share across threads.
class Model {
 public:
  // Seeded initialization.
  Model(const ModelConfig& config, Tokenizer tokenizer);
  // Restores explicit parameters (checkpoint load).
  Model(const ModelConfig& config, Tokenizer tokenizer,
        std::vector<double> parameters);

  const ModelConfig& config() const { return config_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  const ParamLayout& layout() const { return layout_; }
  std::span<const double> parameters() const { return params_; }
  const double* param(size_t offset) const { return params_.data() + offset; }

  int embed_layer() const { return embed_layer_; }
  void set_embed_layer(int layer);

  // FNV-1a over config, alphabet and parameter bytes, as 16 hex digits.
  std::string Hash() const;

 private:
  friend class Trainer;

  ModelConfig config_;
  Tokenizer tokenizer_;
  ParamLayout layout_;
  std::vector<double> params_;
  int embed_layer_;
};

// Adds beta * direction to the residual stream leaving `layer` (1-based).
struct ResidualShift {
  int layer = 0;
  double beta = 0.0;
  Vector direction;
};

// Incremental causal decoding with a key/value cache. Shifts apply to every
// position >= steer_from.
class DecodeSession {
 public:
  explicit DecodeSession(const Model& model,
                         std::vector<ResidualShift> shifts = {},
                         int steer_from = 0);

  // Processes `tokens` at positions [position(), position() + size) and
  // returns their logits. When `activations` is non-null, the per-layer
  // residual rows of the new tokens are appended to (*activations)[l - 1].
  Matrix Append(std::span<const int> tokens,
                std::vector<Matrix>* activations = nullptr);

  int position() const { return position_; }

 private:
  const Model& model_;
  std::vector<ResidualShift> shifts_;
  int steer_from_;
  int position_ = 0;
  std::vector<Matrix> keys_;
  std::vector<Matrix> values_;
};

using LayerActivations = std::vector<Matrix>;  // index l - 1, T x d each

struct ForwardResult {
  Matrix logits;  // T x vocab
  LayerActivations activations;
};

// Throws kInput on empty input, kLength past the context, kVocabulary on
// an invalid id.
ForwardResult Forward(const Model& model, const TokenSequence& tokens);

// (1 / T) * sum_t a_{l,t}. Throws kIndex when layer is outside [1, L].
Vector MeanPool(const LayerActivations& activations, int layer);

// Mean over rows [begin, end) of one layer.
Vector MeanPoolRange(const LayerActivations& activations, int layer, int begin,
                     int end);

// Pooled hidden state of the bare text at the model's embed layer. Texts
// longer than the context are cut to their first context_len characters.
Vector EmbedText(const Model& model, std::string_view text);
Matrix EmbedTexts(const Model& model, const std::vector<std::string>& texts);

// Draws from softmax(logits / temperature).
int SampleNextToken(std::span<const double> logits, double temperature,
                    Rng& rng);

void CheckTokens(const Model& model, std::span<const int> tokens);

}  // namespace dpsteer

#endif  // DPSTEER_MODEL_H_
