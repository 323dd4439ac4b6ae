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

#include "dpsteer/trainer.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dpsteer/error.h"
#include "kernels.h"

namespace dpsteer {

using internal::Affine;
using internal::AttendRow;
using internal::Dot4;
using internal::Gelu;
using internal::GeluGrad;
using internal::LayerNorm;

namespace {

struct BlockTrace {
  Matrix x_in, ln1, qkv, y, x_mid, ln2, fc_pre, fc_act;
  std::vector<double> mean1, rstd1, mean2, rstd2;
  std::vector<Matrix> probs;  // per head, T x T (lower triangle used)
};

struct Trace {
  std::vector<BlockTrace> blocks;
  Matrix x_final, lnf;
  std::vector<double> meanf, rstdf;
  Matrix softmax;
};

// dx = dy W^T (overwrite); dW += x^T dy; db += colsum(dy).
void AffineBackward(const double* x, int rows, int in, const double* w, int out,
                    const double* dy, double* dx, double* dw, double* db) {
  for (int r = 0; r < rows; ++r) {
    const double* dyr = dy + static_cast<long>(r) * out;
    if (dx) {
      double* dxr = dx + static_cast<long>(r) * in;
      for (int k = 0; k < in; ++k) {
        dxr[k] = Dot4(dyr, w + static_cast<long>(k) * out, out);
      }
    }
    const double* xr = x + static_cast<long>(r) * in;
    for (int k = 0; k < in; ++k) {
      const double xv = xr[k];
      double* dwk = dw + static_cast<long>(k) * out;
      for (int j = 0; j < out; ++j) dwk[j] += xv * dyr[j];
    }
    if (db) {
      for (int j = 0; j < out; ++j) db[j] += dyr[j];
    }
  }
}

// Accumulates into dx.
void LayerNormBackward(const double* x, int rows, int d, const double* gain,
                       const double* mean, const double* rstd, const double* dy,
                       double* dx, double* dgain, double* dbias) {
  std::vector<double> dxhat(d);
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<long>(r) * d;
    const double* dyr = dy + static_cast<long>(r) * d;
    double* dxr = dx + static_cast<long>(r) * d;
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int i = 0; i < d; ++i) {
      const double xhat = (xr[i] - mean[r]) * rstd[r];
      dgain[i] += dyr[i] * xhat;
      dbias[i] += dyr[i];
      dxhat[i] = dyr[i] * gain[i];
      mean_dxhat += dxhat[i];
      mean_dxhat_xhat += dxhat[i] * xhat;
    }
    mean_dxhat /= d;
    mean_dxhat_xhat /= d;
    for (int i = 0; i < d; ++i) {
      const double xhat = (xr[i] - mean[r]) * rstd[r];
      dxr[i] += rstd[r] * (dxhat[i] - mean_dxhat - xhat * mean_dxhat_xhat);
    }
  }
}

double ForwardWithTrace(const Model& model, const TokenSequence& tokens,
                        Trace& tr) {
  const auto& c = model.config();
  const auto& lay = model.layout();
  const int T = static_cast<int>(tokens.size());
  const int d = c.hidden_dim, f = c.ffn_dim(), hd = c.head_dim();
  const int H = c.num_heads;

  Matrix x(T, d);
  for (int t = 0; t < T; ++t) {
    const double* te =
        model.param(lay.token_embedding) + static_cast<long>(tokens[t]) * d;
    const double* pe =
        model.param(lay.position_embedding) + static_cast<long>(t) * d;
    for (int i = 0; i < d; ++i) x(t, i) = te[i] + pe[i];
  }
  tr.blocks.resize(c.num_layers);
  Matrix o(T, d);
  for (int l = 0; l < c.num_layers; ++l) {
    const auto& b = lay.blocks[l];
    BlockTrace& bt = tr.blocks[l];
    bt.x_in = x;
    bt.ln1 = Matrix(T, d);
    bt.mean1.resize(T);
    bt.rstd1.resize(T);
    LayerNorm(x.data.data(), T, d, model.param(b.ln1_gain),
              model.param(b.ln1_bias), bt.ln1.data.data(), bt.mean1.data(),
              bt.rstd1.data());
    bt.qkv = Matrix(T, 3 * d);
    Affine(bt.ln1.data.data(), T, d, model.param(b.w_qkv), model.param(b.b_qkv),
           3 * d, bt.qkv.data.data());
    bt.y = Matrix(T, d);
    bt.probs.assign(H, Matrix(T, T));
    for (int t = 0; t < T; ++t) {
      for (int h = 0; h < H; ++h) {
        const double* base = bt.qkv.data.data();
        AttendRow(bt.qkv.row(t) + h * hd, base + d + h * hd,
                  base + 2 * d + h * hd, 3 * d, t + 1, hd, bt.probs[h].row(t),
                  bt.y.row(t) + h * hd);
      }
    }
    Affine(bt.y.data.data(), T, d, model.param(b.w_proj), model.param(b.b_proj),
           d, o.data.data());
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += o.data[i];
    bt.x_mid = x;
    bt.ln2 = Matrix(T, d);
    bt.mean2.resize(T);
    bt.rstd2.resize(T);
    LayerNorm(x.data.data(), T, d, model.param(b.ln2_gain),
              model.param(b.ln2_bias), bt.ln2.data.data(), bt.mean2.data(),
              bt.rstd2.data());
    bt.fc_pre = Matrix(T, f);
    Affine(bt.ln2.data.data(), T, d, model.param(b.w_fc), model.param(b.b_fc),
           f, bt.fc_pre.data.data());
    bt.fc_act = bt.fc_pre;
    for (double& v : bt.fc_act.data) v = Gelu(v);
    Affine(bt.fc_act.data.data(), T, f, model.param(b.w_out),
           model.param(b.b_out), d, o.data.data());
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += o.data[i];
  }
  tr.x_final = x;
  tr.lnf = Matrix(T, d);
  tr.meanf.resize(T);
  tr.rstdf.resize(T);
  LayerNorm(x.data.data(), T, d, model.param(lay.lnf_gain),
            model.param(lay.lnf_bias), tr.lnf.data.data(), tr.meanf.data(),
            tr.rstdf.data());

  const int V = c.vocab_size;
  tr.softmax = Matrix(T, V);
  const double* emb = model.param(lay.token_embedding);
  double loss = 0.0;
  for (int t = 0; t + 1 < T; ++t) {
    double* p = tr.softmax.row(t);
    double mx = -INFINITY;
    for (int v = 0; v < V; ++v) {
      p[v] = Dot4(tr.lnf.row(t), emb + static_cast<long>(v) * d, d);
      mx = std::max(mx, p[v]);
    }
    double total = 0.0;
    for (int v = 0; v < V; ++v) {
      p[v] = std::exp(p[v] - mx);
      total += p[v];
    }
    for (int v = 0; v < V; ++v) p[v] /= total;
    loss -= std::log(p[tokens[t + 1]]);
  }
  return loss;
}

void Backward(const Model& model, const TokenSequence& tokens, Trace& tr,
              double scale, std::span<double> grad) {
  const auto& c = model.config();
  const auto& lay = model.layout();
  const int T = static_cast<int>(tokens.size());
  const int d = c.hidden_dim, f = c.ffn_dim(), hd = c.head_dim();
  const int H = c.num_heads, V = c.vocab_size;
  double* g = grad.data();
  const double* emb = model.param(lay.token_embedding);

  // Logits -> final norm input.
  Matrix dlnf(T, d);
  for (int t = 0; t + 1 < T; ++t) {
    const double* p = tr.softmax.row(t);
    double* dl = dlnf.row(t);
    for (int v = 0; v < V; ++v) {
      const double dz = scale * (p[v] - (v == tokens[t + 1] ? 1.0 : 0.0));
      const double* ev = emb + static_cast<long>(v) * d;
      double* gev = g + lay.token_embedding + static_cast<long>(v) * d;
      const double* xf = tr.lnf.row(t);
      for (int i = 0; i < d; ++i) {
        dl[i] += dz * ev[i];
        gev[i] += dz * xf[i];
      }
    }
  }
  Matrix dx(T, d);
  LayerNormBackward(tr.x_final.data.data(), T, d, model.param(lay.lnf_gain),
                    tr.meanf.data(), tr.rstdf.data(), dlnf.data.data(),
                    dx.data.data(), g + lay.lnf_gain, g + lay.lnf_bias);

  Matrix dact(T, f), dfc(T, f), dln(T, d), dy(T, d), dqkv(T, 3 * d);
  std::vector<double> dprob(T);
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (int l = c.num_layers - 1; l >= 0; --l) {
    const auto& b = lay.blocks[l];
    BlockTrace& bt = tr.blocks[l];

    // MLP branch.
    AffineBackward(bt.fc_act.data.data(), T, f, model.param(b.w_out), d,
                   dx.data.data(), dact.data.data(), g + b.w_out, g + b.b_out);
    for (size_t i = 0; i < dfc.data.size(); ++i) {
      dfc.data[i] = dact.data[i] * GeluGrad(bt.fc_pre.data[i]);
    }
    AffineBackward(bt.ln2.data.data(), T, d, model.param(b.w_fc), f,
                   dfc.data.data(), dln.data.data(), g + b.w_fc, g + b.b_fc);
    LayerNormBackward(bt.x_mid.data.data(), T, d, model.param(b.ln2_gain),
                      bt.mean2.data(), bt.rstd2.data(), dln.data.data(),
                      dx.data.data(), g + b.ln2_gain, g + b.ln2_bias);

    // Attention branch.
    AffineBackward(bt.y.data.data(), T, d, model.param(b.w_proj), d,
                   dx.data.data(), dy.data.data(), g + b.w_proj, g + b.b_proj);
    std::fill(dqkv.data.begin(), dqkv.data.end(), 0.0);
    for (int h = 0; h < H; ++h) {
      const Matrix& P = bt.probs[h];
      for (int t = 0; t < T; ++t) {
        const double* dyt = dy.row(t) + h * hd;
        const double* qt = bt.qkv.row(t) + h * hd;
        double* dqt = dqkv.row(t) + h * hd;
        double s = 0.0;
        for (int j = 0; j <= t; ++j) {
          const double* vj = bt.qkv.row(j) + 2 * d + h * hd;
          dprob[j] = Dot4(dyt, vj, hd);
          s += P(t, j) * dprob[j];
          double* dvj = dqkv.row(j) + 2 * d + h * hd;
          for (int i = 0; i < hd; ++i) dvj[i] += P(t, j) * dyt[i];
        }
        for (int j = 0; j <= t; ++j) {
          const double ds = P(t, j) * (dprob[j] - s) * att_scale;
          const double* kj = bt.qkv.row(j) + d + h * hd;
          double* dkj = dqkv.row(j) + d + h * hd;
          for (int i = 0; i < hd; ++i) {
            dqt[i] += ds * kj[i];
            dkj[i] += ds * qt[i];
          }
        }
      }
    }
    AffineBackward(bt.ln1.data.data(), T, d, model.param(b.w_qkv), 3 * d,
                   dqkv.data.data(), dln.data.data(), g + b.w_qkv, g + b.b_qkv);
    LayerNormBackward(bt.x_in.data.data(), T, d, model.param(b.ln1_gain),
                      bt.mean1.data(), bt.rstd1.data(), dln.data.data(),
                      dx.data.data(), g + b.ln1_gain, g + b.ln1_bias);
  }

  for (int t = 0; t < T; ++t) {
    double* gte = g + lay.token_embedding + static_cast<long>(tokens[t]) * d;
    double* gpe = g + lay.position_embedding + static_cast<long>(t) * d;
    for (int i = 0; i < d; ++i) {
      gte[i] += dx(t, i);
      gpe[i] += dx(t, i);
    }
  }
}

void CheckSequence(const Model& model, const TokenSequence& tokens) {
  if (tokens.size() < 2) {
    throw Error(ErrorKind::kInput, "training sequences need at least 2 tokens");
  }
  if (static_cast<int>(tokens.size()) > model.config().context_len) {
    throw Error(ErrorKind::kLength,
                "training sequence of length " + std::to_string(tokens.size()) +
                    " exceeds context " +
                    std::to_string(model.config().context_len));
  }
  CheckTokens(model, tokens);
}

}  // namespace

double SequenceLossAndGradient(const Model& model, const TokenSequence& tokens,
                               std::span<double> grad, double scale) {
  CheckSequence(model, tokens);
  Trace tr;
  const double loss = ForwardWithTrace(model, tokens, tr);
  if (!grad.empty()) {
    if (grad.size() != model.parameters().size()) {
      throw Error(ErrorKind::kParameter, "gradient buffer size mismatch");
    }
    Backward(model, tokens, tr, scale, grad);
  }
  return loss;
}

double BatchLossAndGradient(const Model& model,
                            std::span<const TokenSequence> batch,
                            std::span<double> grad) {
  size_t predicted = 0;
  for (const auto& s : batch) predicted += s.size() - 1;
  if (predicted == 0) throw Error(ErrorKind::kInput, "empty batch");
  std::fill(grad.begin(), grad.end(), 0.0);
  const double scale = 1.0 / static_cast<double>(predicted);
  double total = 0.0;
  for (const auto& s : batch) {
    total += SequenceLossAndGradient(model, s, grad, scale);
  }
  return total * scale;
}

class Trainer {
 public:
  static std::vector<double>& Params(Model& m) { return m.params_; }
};

TrainResult TrainToyLm(const ModelConfig& config, const Tokenizer& tokenizer,
                       const std::vector<TokenSequence>& corpus,
                       const TrainOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::kInput, "empty training corpus");
  if (options.steps < 0) throw Error(ErrorKind::kParameter, "steps < 0");
  if (!(options.learning_rate > 0.0)) {
    throw Error(ErrorKind::kParameter, "learning_rate must be > 0");
  }
  if (options.batch_size < 1) {
    throw Error(ErrorKind::kParameter, "batch_size must be >= 1");
  }
  TrainResult result{Model(config, tokenizer), {}};
  for (const auto& s : corpus) CheckSequence(result.model, s);

  std::vector<double>& params = Trainer::Params(result.model);
  const size_t n = params.size();
  std::vector<double> grad(n), m(n, 0.0), v(n, 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.99, kEps = 1e-8;
  Rng rng(options.seed);
  std::uniform_int_distribution<size_t> pick(0, corpus.size() - 1);
  std::vector<TokenSequence> batch(options.batch_size);
  double beta1_pow = 1.0, beta2_pow = 1.0;

  for (int step = 0; step < options.steps; ++step) {
    for (auto& s : batch) s = corpus[pick(rng)];
    const double loss = BatchLossAndGradient(result.model, batch, grad);
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::kDivergence,
                  "non-finite training loss at step " + std::to_string(step));
    }
    result.losses.push_back(loss);

    if (options.grad_clip > 0.0) {
      double sq = 0.0;
      for (double gv : grad) sq += gv * gv;
      const double norm = std::sqrt(sq);
      if (norm > options.grad_clip) {
        const double k = options.grad_clip / norm;
        for (double& gv : grad) gv *= k;
      }
    }
    beta1_pow *= kBeta1;
    beta2_pow *= kBeta2;
    const double progress =
        options.steps > 1 ? static_cast<double>(step) / (options.steps - 1)
                          : 0.0;
    const double lr = options.learning_rate *
                      (1.0 - (1.0 - options.final_lr_fraction) * progress);
    const double lr_t = lr * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
    for (size_t i = 0; i < n; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_t * m[i] / (std::sqrt(v[i]) + kEps);
    }
  }
  return result;
}

}  // namespace dpsteer
