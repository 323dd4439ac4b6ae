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

#include "dpsteer/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "dpsteer/error.h"
#include "dpsteer/hash.h"
#include "kernels.h"

namespace dpsteer {

using internal::Affine;
using internal::AttendRow;
using internal::Dot4;
using internal::Gelu;
using internal::LayerNorm;

void ModelConfig::Validate() const {
  if (vocab_size < 1 || num_layers < 1 || hidden_dim < 1 || num_heads < 1 ||
      context_len < 1) {
    throw Error(ErrorKind::kParameter, "model dimensions must all be >= 1");
  }
  if (hidden_dim % num_heads != 0) {
    throw Error(ErrorKind::kParameter, "hidden_dim " +
                                           std::to_string(hidden_dim) +
                                           " is not divisible by num_heads " +
                                           std::to_string(num_heads));
  }
}

ParamLayout::ParamLayout(const ModelConfig& c) {
  const size_t d = c.hidden_dim;
  const size_t f = c.ffn_dim();
  size_t at = 0;
  auto take = [&at](size_t n) {
    size_t off = at;
    at += n;
    return off;
  };
  token_embedding = take(c.vocab_size * d);
  position_embedding = take(c.context_len * d);
  for (int l = 0; l < c.num_layers; ++l) {
    Block b;
    b.ln1_gain = take(d);
    b.ln1_bias = take(d);
    b.w_qkv = take(d * 3 * d);
    b.b_qkv = take(3 * d);
    b.w_proj = take(d * d);
    b.b_proj = take(d);
    b.ln2_gain = take(d);
    b.ln2_bias = take(d);
    b.w_fc = take(d * f);
    b.b_fc = take(f);
    b.w_out = take(f * d);
    b.b_out = take(d);
    blocks.push_back(b);
  }
  lnf_gain = take(d);
  lnf_bias = take(d);
  total = at;
}

int DefaultEmbedLayer(int num_layers) {
  return std::max(1, (num_layers * 19 + 31) / 32);
}

namespace {

void FillNormal(std::vector<double>& p, size_t offset, size_t n, double std,
                Rng& rng) {
  std::normal_distribution<double> dist(0.0, std);
  for (size_t i = 0; i < n; ++i) p[offset + i] = dist(rng);
}

void Fill(std::vector<double>& p, size_t offset, size_t n, double value) {
  std::fill_n(p.begin() + offset, n, value);
}

}  // namespace

Model::Model(const ModelConfig& config, Tokenizer tokenizer)
    : config_(config),
      tokenizer_(std::move(tokenizer)),
      layout_((config.Validate(), config)),
      params_(layout_.total, 0.0),
      embed_layer_(DefaultEmbedLayer(config.num_layers)) {
  if (tokenizer_.vocab_size() != config_.vocab_size) {
    throw Error(ErrorKind::kParameter,
                "tokenizer vocabulary does not match config vocab_size");
  }
  Rng rng(config_.seed);
  const size_t d = config_.hidden_dim;
  const size_t f = config_.ffn_dim();
  const double residual_std = 0.02 / std::sqrt(2.0 * config_.num_layers);
  FillNormal(params_, layout_.token_embedding, config_.vocab_size * d, 0.02,
             rng);
  FillNormal(params_, layout_.position_embedding, config_.context_len * d, 0.01,
             rng);
  for (const auto& b : layout_.blocks) {
    Fill(params_, b.ln1_gain, d, 1.0);
    FillNormal(params_, b.w_qkv, d * 3 * d, 0.02, rng);
    FillNormal(params_, b.w_proj, d * d, residual_std, rng);
    Fill(params_, b.ln2_gain, d, 1.0);
    FillNormal(params_, b.w_fc, d * f, 0.02, rng);
    FillNormal(params_, b.w_out, f * d, residual_std, rng);
  }
  Fill(params_, layout_.lnf_gain, d, 1.0);
}

Model::Model(const ModelConfig& config, Tokenizer tokenizer,
             std::vector<double> parameters)
    : config_(config),
      tokenizer_(std::move(tokenizer)),
      layout_((config.Validate(), config)),
      params_(std::move(parameters)),
      embed_layer_(DefaultEmbedLayer(config.num_layers)) {
  if (tokenizer_.vocab_size() != config_.vocab_size) {
    throw Error(ErrorKind::kParameter,
                "tokenizer vocabulary does not match config vocab_size");
  }
  if (params_.size() != layout_.total) {
    throw Error(ErrorKind::kInput,
                "parameter count " + std::to_string(params_.size()) +
                    " does not match layout " + std::to_string(layout_.total));
  }
}

void Model::set_embed_layer(int layer) {
  if (layer < 1 || layer > config_.num_layers) {
    throw Error(ErrorKind::kIndex,
                "embed layer " + std::to_string(layer) + " outside [1, " +
                    std::to_string(config_.num_layers) + "]");
  }
  embed_layer_ = layer;
}

std::string Model::Hash() const {
  ContentHasher h;
  h.UpdateValue<int64_t>(config_.vocab_size)
      .UpdateValue<int64_t>(config_.num_layers)
      .UpdateValue<int64_t>(config_.hidden_dim)
      .UpdateValue<int64_t>(config_.num_heads)
      .UpdateValue<int64_t>(config_.context_len)
      .UpdateValue<uint64_t>(config_.seed)
      .UpdateField(tokenizer_.alphabet());
  h.Update(std::string_view(reinterpret_cast<const char*>(params_.data()),
                            params_.size() * sizeof(double)));
  return h.hex();
}

void CheckTokens(const Model& model, std::span<const int> tokens) {
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] >= model.config().vocab_size) {
      throw Error(ErrorKind::kVocabulary,
                  "token id " + std::to_string(tokens[i]) + " at position " +
                      std::to_string(i) + " outside vocabulary of size " +
                      std::to_string(model.config().vocab_size));
    }
  }
}

DecodeSession::DecodeSession(const Model& model,
                             std::vector<ResidualShift> shifts, int steer_from)
    : model_(model), shifts_(std::move(shifts)), steer_from_(steer_from) {
  const auto& c = model_.config();
  for (const auto& s : shifts_) {
    if (s.layer < 1 || s.layer > c.num_layers) {
      throw Error(
          ErrorKind::kIndex,
          "steering layer " + std::to_string(s.layer) + " outside the model");
    }
    if (static_cast<int>(s.direction.size()) != c.hidden_dim) {
      throw Error(ErrorKind::kInput, "steering direction has dimension " +
                                         std::to_string(s.direction.size()) +
                                         ", model has " +
                                         std::to_string(c.hidden_dim));
    }
  }
  keys_.assign(c.num_layers, Matrix(c.context_len, c.hidden_dim));
  values_.assign(c.num_layers, Matrix(c.context_len, c.hidden_dim));
}

Matrix DecodeSession::Append(std::span<const int> tokens,
                             std::vector<Matrix>* activations) {
  const auto& c = model_.config();
  const auto& lay = model_.layout();
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return Matrix(0, c.vocab_size);
  if (position_ + n > c.context_len) {
    throw Error(ErrorKind::kLength,
                "sequence of length " + std::to_string(position_ + n) +
                    " exceeds context " + std::to_string(c.context_len));
  }
  CheckTokens(model_, tokens);

  const int d = c.hidden_dim;
  const int f = c.ffn_dim();
  const int hd = c.head_dim();
  Matrix x(n, d), a(n, d), qkv(n, 3 * d), y(n, d), o(n, d), m(n, d), fc(n, f),
      o2(n, d);
  std::vector<double> probs(c.context_len);

  for (int r = 0; r < n; ++r) {
    const double* te =
        model_.param(lay.token_embedding) + static_cast<long>(tokens[r]) * d;
    const double* pe = model_.param(lay.position_embedding) +
                       static_cast<long>(position_ + r) * d;
    for (int i = 0; i < d; ++i) x(r, i) = te[i] + pe[i];
  }
  if (activations) activations->resize(c.num_layers);

  for (int l = 0; l < c.num_layers; ++l) {
    const auto& b = lay.blocks[l];
    LayerNorm(x.data.data(), n, d, model_.param(b.ln1_gain),
              model_.param(b.ln1_bias), a.data.data(), nullptr, nullptr);
    Affine(a.data.data(), n, d, model_.param(b.w_qkv), model_.param(b.b_qkv),
           3 * d, qkv.data.data());
    Matrix& kc = keys_[l];
    Matrix& vc = values_[l];
    for (int r = 0; r < n; ++r) {
      std::copy_n(qkv.row(r) + d, d, kc.row(position_ + r));
      std::copy_n(qkv.row(r) + 2 * d, d, vc.row(position_ + r));
    }
    for (int r = 0; r < n; ++r) {
      for (int h = 0; h < c.num_heads; ++h) {
        AttendRow(qkv.row(r) + h * hd, kc.data.data() + h * hd,
                  vc.data.data() + h * hd, d, position_ + r + 1, hd,
                  probs.data(), y.row(r) + h * hd);
      }
    }
    Affine(y.data.data(), n, d, model_.param(b.w_proj), model_.param(b.b_proj),
           d, o.data.data());
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += o.data[i];
    LayerNorm(x.data.data(), n, d, model_.param(b.ln2_gain),
              model_.param(b.ln2_bias), m.data.data(), nullptr, nullptr);
    Affine(m.data.data(), n, d, model_.param(b.w_fc), model_.param(b.b_fc), f,
           fc.data.data());
    for (double& v : fc.data) v = Gelu(v);
    Affine(fc.data.data(), n, f, model_.param(b.w_out), model_.param(b.b_out),
           d, o2.data.data());
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += o2.data[i];

    for (const auto& s : shifts_) {
      if (s.layer != l + 1) continue;
      for (int r = 0; r < n; ++r) {
        if (position_ + r < steer_from_) continue;
        double* xr = x.row(r);
        for (int i = 0; i < d; ++i) xr[i] = xr[i] + s.beta * s.direction[i];
      }
    }
    if (activations) {
      Matrix& dst = (*activations)[l];
      if (dst.cols == 0) dst = Matrix(0, d);
      dst.data.insert(dst.data.end(), x.data.begin(), x.data.end());
      dst.rows += n;
    }
  }

  LayerNorm(x.data.data(), n, d, model_.param(lay.lnf_gain),
            model_.param(lay.lnf_bias), a.data.data(), nullptr, nullptr);
  Matrix logits(n, c.vocab_size);
  const double* emb = model_.param(lay.token_embedding);
  for (int r = 0; r < n; ++r) {
    for (int v = 0; v < c.vocab_size; ++v) {
      logits(r, v) = Dot4(a.row(r), emb + static_cast<long>(v) * d, d);
    }
  }
  position_ += n;
  return logits;
}

ForwardResult Forward(const Model& model, const TokenSequence& tokens) {
  if (tokens.empty()) {
    throw Error(ErrorKind::kInput, "forward requires at least one token");
  }
  DecodeSession session(model);
  ForwardResult result;
  result.logits = session.Append(tokens, &result.activations);
  return result;
}

Vector MeanPoolRange(const LayerActivations& activations, int layer, int begin,
                     int end) {
  if (layer < 1 || layer > static_cast<int>(activations.size())) {
    throw Error(ErrorKind::kIndex,
                "layer " + std::to_string(layer) + " outside [1, " +
                    std::to_string(activations.size()) + "]");
  }
  const Matrix& a = activations[layer - 1];
  if (begin < 0 || end > a.rows || begin >= end) {
    throw Error(ErrorKind::kIndex, "empty or out-of-range pooling window");
  }
  Vector mean(a.cols, 0.0);
  for (int t = begin; t < end; ++t) {
    const double* row = a.row(t);
    for (int i = 0; i < a.cols; ++i) mean[i] += row[i];
  }
  const double inv = 1.0 / (end - begin);
  for (double& v : mean) v *= inv;
  return mean;
}

Vector MeanPool(const LayerActivations& activations, int layer) {
  if (layer < 1 || layer > static_cast<int>(activations.size())) {
    throw Error(ErrorKind::kIndex,
                "layer " + std::to_string(layer) + " outside [1, " +
                    std::to_string(activations.size()) + "]");
  }
  return MeanPoolRange(activations, layer, 0, activations[layer - 1].rows);
}

Vector EmbedText(const Model& model, std::string_view text) {
  if (text.empty()) {
    throw Error(ErrorKind::kInput, "cannot embed empty text");
  }
  TokenSequence tokens = model.tokenizer().Encode(text);
  if (static_cast<int>(tokens.size()) > model.config().context_len) {
    tokens.resize(model.config().context_len);
  }
  return MeanPool(Forward(model, tokens).activations, model.embed_layer());
}

Matrix EmbedTexts(const Model& model, const std::vector<std::string>& texts) {
  Matrix out(static_cast<int>(texts.size()), model.config().hidden_dim);
  for (size_t i = 0; i < texts.size(); ++i) {
    Vector e = EmbedText(model, texts[i]);
    std::copy(e.begin(), e.end(), out.row(static_cast<int>(i)));
  }
  return out;
}

int SampleNextToken(std::span<const double> logits, double temperature,
                    Rng& rng) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorKind::kParameter, "temperature must be > 0");
  }
  if (logits.empty()) throw Error(ErrorKind::kInput, "empty logits row");
  double max_logit = -INFINITY;
  for (double v : logits) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNumerical, "non-finite logit");
    }
    max_logit = std::max(max_logit, v);
  }
  std::vector<double> weights(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    weights[i] = std::exp((logits[i] - max_logit) / temperature);
    total += weights[i];
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double target = unit(rng) * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return static_cast<int>(i);
  }
  // Rounding can leave target == total; fall back to the last positive bin.
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

}  // namespace dpsteer
