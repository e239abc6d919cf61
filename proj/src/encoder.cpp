#include "veritext/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "veritext/errors.hpp"
#include "veritext/rng.hpp"

namespace veritext {

namespace {

constexpr double kLnEps = 1e-5;

// Exact GELU and its derivative; smooth, so finite differences stay clean.
double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
}

double gelu_grad(double x) {
  const double phi = 0.5 * (1.0 + std::erf(x * 0.70710678118654752440));
  const double pdf = 0.39894228040143267794 * std::exp(-0.5 * x * x);
  return phi + x * pdf;
}

// out[r,:] = in[r,:] * w + b, w is d x e row-major
void affine(const double* in, int64_t rows, int64_t d, int64_t e,
            const double* w, const double* b, double* out) {
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = in + r * d;
    double* y = out + r * e;
    for (int64_t c = 0; c < e; ++c) y[c] = b[c];
    for (int64_t k = 0; k < d; ++k) {
      const double xv = x[k];
      if (xv == 0.0) continue;
      const double* wrow = w + k * e;
      for (int64_t c = 0; c < e; ++c) y[c] += xv * wrow[c];
    }
  }
}

// accumulates into d_in, dw, db
void affine_backward(const double* in, const double* d_out, int64_t rows,
                     int64_t d, int64_t e, const double* w, double* d_in,
                     double* dw, double* db) {
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = in + r * d;
    const double* dy = d_out + r * e;
    double* dx = d_in + r * d;
    for (int64_t c = 0; c < e; ++c) db[c] += dy[c];
    for (int64_t k = 0; k < d; ++k) {
      const double* wrow = w + k * e;
      double* dwrow = dw + k * e;
      double acc = 0.0;
      const double xv = x[k];
      for (int64_t c = 0; c < e; ++c) {
        acc += dy[c] * wrow[c];
        dwrow[c] += xv * dy[c];
      }
      dx[k] += acc;
    }
  }
}

struct LayerCache {
  std::vector<double> x_in, n1, xhat1, rstd1;
  std::vector<double> q, k, v, attn, ctx;
  std::vector<double> x_mid, n2, xhat2, rstd2;
  std::vector<double> z1, h1;
};

struct Cache {
  std::vector<LayerCache> layers;
  std::vector<double> x_final;
  std::vector<double> pooled;     // B * d
  std::vector<double> inv_count;  // B
  std::vector<double> logits;     // B * 2
};

void layer_norm_forward(const double* x, int64_t positions, int64_t d,
                        const double* gain, const double* bias, double* out,
                        double* xhat, double* rstd) {
  for (int64_t p = 0; p < positions; ++p) {
    const double* xi = x + p * d;
    double mu = 0.0;
    for (int64_t j = 0; j < d; ++j) mu += xi[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      const double c = xi[j] - mu;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + kLnEps);
    rstd[p] = r;
    double* xh = xhat + p * d;
    double* y = out + p * d;
    for (int64_t j = 0; j < d; ++j) {
      xh[j] = (xi[j] - mu) * r;
      y[j] = gain[j] * xh[j] + bias[j];
    }
  }
}

// accumulates into d_x, d_gain, d_bias
void layer_norm_backward(const double* d_out, const double* xhat,
                         const double* rstd, int64_t positions, int64_t d,
                         const double* gain, double* d_x, double* d_gain,
                         double* d_bias) {
  for (int64_t p = 0; p < positions; ++p) {
    const double* dy = d_out + p * d;
    const double* xh = xhat + p * d;
    double* dx = d_x + p * d;
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      const double dxh = dy[j] * gain[j];
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * xh[j];
      d_gain[j] += dy[j] * xh[j];
      d_bias[j] += dy[j];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    const double r = rstd[p];
    for (int64_t j = 0; j < d; ++j) {
      const double dxh = dy[j] * gain[j];
      dx[j] += r * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
    }
  }
}

// Multi-head scaled dot-product attention with key padding mask.
// attn rows are softmax over non-pad keys; pad keys get exactly zero.
void attention_forward(const double* q, const double* k, const double* v,
                       const uint8_t* pad, int64_t b_count, int64_t len,
                       int64_t d, int64_t heads, double* attn, double* ctx) {
  const int64_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> scores(len);
  for (int64_t b = 0; b < b_count; ++b) {
    const uint8_t* pb = pad + b * len;
    for (int64_t h = 0; h < heads; ++h) {
      double* attn_bh = attn + ((b * heads + h) * len) * len;
      for (int64_t i = 0; i < len; ++i) {
        const double* qi = q + (b * len + i) * d + h * dh;
        double maxs = -std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < len; ++j) {
          if (pb[j]) continue;
          const double* kj = k + (b * len + j) * d + h * dh;
          double s = 0.0;
          for (int64_t t = 0; t < dh; ++t) s += qi[t] * kj[t];
          s *= scale;
          scores[j] = s;
          maxs = std::max(maxs, s);
        }
        double z = 0.0;
        double* row = attn_bh + i * len;
        for (int64_t j = 0; j < len; ++j) {
          if (pb[j]) {
            row[j] = 0.0;
          } else {
            row[j] = std::exp(scores[j] - maxs);
            z += row[j];
          }
        }
        for (int64_t j = 0; j < len; ++j) row[j] /= z;
        double* ci = ctx + (b * len + i) * d + h * dh;
        for (int64_t t = 0; t < dh; ++t) ci[t] = 0.0;
        for (int64_t j = 0; j < len; ++j) {
          const double a = row[j];
          if (a == 0.0) continue;
          const double* vj = v + (b * len + j) * d + h * dh;
          for (int64_t t = 0; t < dh; ++t) ci[t] += a * vj[t];
        }
      }
    }
  }
}

void attention_backward(const double* q, const double* k, const double* v,
                        const double* attn, const double* d_ctx,
                        const uint8_t* pad, int64_t b_count, int64_t len,
                        int64_t d, int64_t heads, double* d_q, double* d_k,
                        double* d_v) {
  const int64_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> d_attn(len), d_scores(len);
  for (int64_t b = 0; b < b_count; ++b) {
    const uint8_t* pb = pad + b * len;
    for (int64_t h = 0; h < heads; ++h) {
      const double* attn_bh = attn + ((b * heads + h) * len) * len;
      for (int64_t i = 0; i < len; ++i) {
        const double* row = attn_bh + i * len;
        const double* dci = d_ctx + (b * len + i) * d + h * dh;
        // dV and dA
        double dot = 0.0;
        for (int64_t j = 0; j < len; ++j) {
          if (pb[j]) {
            d_attn[j] = 0.0;
            continue;
          }
          const double* vj = v + (b * len + j) * d + h * dh;
          double da = 0.0;
          for (int64_t t = 0; t < dh; ++t) da += dci[t] * vj[t];
          d_attn[j] = da;
          dot += da * row[j];
          double* dvj = d_v + (b * len + j) * d + h * dh;
          const double a = row[j];
          for (int64_t t = 0; t < dh; ++t) dvj[t] += a * dci[t];
        }
        // softmax backward, then accumulate dQ, dK
        const double* qi = q + (b * len + i) * d + h * dh;
        double* dqi = d_q + (b * len + i) * d + h * dh;
        for (int64_t j = 0; j < len; ++j) {
          if (pb[j]) continue;
          const double ds = row[j] * (d_attn[j] - dot) * scale;
          if (ds == 0.0) continue;
          const double* kj = k + (b * len + j) * d + h * dh;
          double* dkj = d_k + (b * len + j) * d + h * dh;
          for (int64_t t = 0; t < dh; ++t) {
            dqi[t] += ds * kj[t];
            dkj[t] += ds * qi[t];
          }
        }
      }
    }
  }
}

Cache run_forward(const EncoderModel& model, const Batch& batch) {
  const EncoderConfig& cfg = model.config;
  const int64_t b_count = batch.size;
  const int64_t len = batch.len;
  const int64_t d = cfg.d_model;
  const int64_t f = cfg.d_ff;
  const int64_t positions = b_count * len;

  Cache cache;
  cache.layers.resize(cfg.layers);

  std::vector<double> x(positions * d);
  for (int64_t b = 0; b < b_count; ++b) {
    for (int64_t i = 0; i < len; ++i) {
      const int32_t tok = batch.tokens[b * len + i];
      const double* te = model.token_embedding.data() + static_cast<int64_t>(tok) * d;
      const double* pe = model.positional.data() + i * d;
      double* xi = x.data() + (b * len + i) * d;
      for (int64_t j = 0; j < d; ++j) xi[j] = te[j] + pe[j];
    }
  }

  for (int l = 0; l < cfg.layers; ++l) {
    const EncoderLayer& layer = model.layers[l];
    LayerCache& lc = cache.layers[l];
    lc.x_in = x;
    lc.n1.resize(positions * d);
    lc.xhat1.resize(positions * d);
    lc.rstd1.resize(positions);
    layer_norm_forward(lc.x_in.data(), positions, d, layer.ln1_g.data(),
                       layer.ln1_b.data(), lc.n1.data(), lc.xhat1.data(),
                       lc.rstd1.data());
    lc.q.resize(positions * d);
    lc.k.resize(positions * d);
    lc.v.resize(positions * d);
    affine(lc.n1.data(), positions, d, d, layer.wq.data(), layer.bq.data(),
           lc.q.data());
    affine(lc.n1.data(), positions, d, d, layer.wk.data(), layer.bk.data(),
           lc.k.data());
    affine(lc.n1.data(), positions, d, d, layer.wv.data(), layer.bv.data(),
           lc.v.data());
    lc.attn.assign(b_count * cfg.heads * len * len, 0.0);
    lc.ctx.resize(positions * d);
    attention_forward(lc.q.data(), lc.k.data(), lc.v.data(), batch.pad.data(),
                      b_count, len, d, cfg.heads, lc.attn.data(), lc.ctx.data());
    std::vector<double> attn_out(positions * d);
    affine(lc.ctx.data(), positions, d, d, layer.wo.data(), layer.bo.data(),
           attn_out.data());
    lc.x_mid.resize(positions * d);
    for (int64_t p = 0; p < positions * d; ++p)
      lc.x_mid[p] = lc.x_in[p] + attn_out[p];

    lc.n2.resize(positions * d);
    lc.xhat2.resize(positions * d);
    lc.rstd2.resize(positions);
    layer_norm_forward(lc.x_mid.data(), positions, d, layer.ln2_g.data(),
                       layer.ln2_b.data(), lc.n2.data(), lc.xhat2.data(),
                       lc.rstd2.data());
    lc.z1.resize(positions * f);
    affine(lc.n2.data(), positions, d, f, layer.w1.data(), layer.b1.data(),
           lc.z1.data());
    lc.h1.resize(positions * f);
    for (int64_t p = 0; p < positions * f; ++p) lc.h1[p] = gelu(lc.z1[p]);
    std::vector<double> ff_out(positions * d);
    affine(lc.h1.data(), positions, f, d, layer.w2.data(), layer.b2.data(),
           ff_out.data());
    for (int64_t p = 0; p < positions * d; ++p) x[p] = lc.x_mid[p] + ff_out[p];
  }

  cache.x_final = x;
  cache.pooled.assign(b_count * d, 0.0);
  cache.inv_count.resize(b_count);
  for (int64_t b = 0; b < b_count; ++b) {
    int64_t n = 0;
    double* pb = cache.pooled.data() + b * d;
    for (int64_t i = 0; i < len; ++i) {
      if (batch.pad[b * len + i]) continue;
      ++n;
      const double* xi = x.data() + (b * len + i) * d;
      for (int64_t j = 0; j < d; ++j) pb[j] += xi[j];
    }
    cache.inv_count[b] = 1.0 / static_cast<double>(n);
    for (int64_t j = 0; j < d; ++j) pb[j] *= cache.inv_count[b];
  }
  cache.logits.resize(b_count * 2);
  affine(cache.pooled.data(), b_count, d, 2, model.head_w.data(),
         model.head_b.data(), cache.logits.data());
  return cache;
}

double batch_loss(const Cache& cache, const Batch& batch,
                  std::vector<double>* d_logits) {
  const int64_t b_count = batch.size;
  double loss = 0.0;
  if (d_logits) d_logits->assign(b_count * 2, 0.0);
  for (int64_t b = 0; b < b_count; ++b) {
    const double z0 = cache.logits[b * 2 + 0];
    const double z1 = cache.logits[b * 2 + 1];
    const double m = std::max(z0, z1);
    const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    const int64_t target = batch.labels[b] == Label::Fake ? 0 : 1;
    loss += lse - cache.logits[b * 2 + target];
    if (d_logits) {
      const double p0 = std::exp(z0 - lse);
      const double p1 = std::exp(z1 - lse);
      (*d_logits)[b * 2 + 0] = (p0 - (target == 0 ? 1.0 : 0.0)) / b_count;
      (*d_logits)[b * 2 + 1] = (p1 - (target == 1 ? 1.0 : 0.0)) / b_count;
    }
  }
  return loss / static_cast<double>(b_count);
}

}  // namespace

EncoderModel encoder_init(const EncoderConfig& config) {
  if (config.d_model % config.heads != 0)
    throw DomainError("encoder: d_model must be divisible by heads");
  if (config.max_len < 1) throw DomainError("encoder: max_len must be >= 1");
  EncoderModel model;
  model.config = config;
  const int64_t d = config.d_model;
  const int64_t f = config.d_ff;
  model.token_embedding.resize(config.vocab_size * d);
  model.positional.resize(config.max_len * d);
  model.layers.resize(config.layers);
  for (EncoderLayer& layer : model.layers) {
    layer.wq.resize(d * d); layer.bq.assign(d, 0.0);
    layer.wk.resize(d * d); layer.bk.assign(d, 0.0);
    layer.wv.resize(d * d); layer.bv.assign(d, 0.0);
    layer.wo.resize(d * d); layer.bo.assign(d, 0.0);
    layer.w1.resize(d * f); layer.b1.assign(f, 0.0);
    layer.w2.resize(f * d); layer.b2.assign(d, 0.0);
    layer.ln1_g.assign(d, 1.0); layer.ln1_b.assign(d, 0.0);
    layer.ln2_g.assign(d, 1.0); layer.ln2_b.assign(d, 0.0);
  }
  model.head_w.resize(d * 2);
  model.head_b.assign(2, 0.0);

  Rng rng(mix_seed(config.seed, 0xe2c0de));
  auto fill_normal = [&rng](std::vector<double>& m) {
    for (double& x : m) x = rng.normal(0.0, 0.02);
  };
  fill_normal(model.token_embedding);
  fill_normal(model.positional);
  for (EncoderLayer& layer : model.layers) {
    fill_normal(layer.wq);
    fill_normal(layer.wk);
    fill_normal(layer.wv);
    fill_normal(layer.wo);
    fill_normal(layer.w1);
    fill_normal(layer.w2);
  }
  fill_normal(model.head_w);
  return model;
}

EncoderModel zeros_like(const EncoderModel& model) {
  EncoderModel z;
  z.config = model.config;
  z.token_embedding.assign(model.token_embedding.size(), 0.0);
  z.positional.assign(model.positional.size(), 0.0);
  z.layers.resize(model.layers.size());
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const EncoderLayer& src = model.layers[l];
    EncoderLayer& dst = z.layers[l];
    dst.wq.assign(src.wq.size(), 0.0); dst.bq.assign(src.bq.size(), 0.0);
    dst.wk.assign(src.wk.size(), 0.0); dst.bk.assign(src.bk.size(), 0.0);
    dst.wv.assign(src.wv.size(), 0.0); dst.bv.assign(src.bv.size(), 0.0);
    dst.wo.assign(src.wo.size(), 0.0); dst.bo.assign(src.bo.size(), 0.0);
    dst.w1.assign(src.w1.size(), 0.0); dst.b1.assign(src.b1.size(), 0.0);
    dst.w2.assign(src.w2.size(), 0.0); dst.b2.assign(src.b2.size(), 0.0);
    dst.ln1_g.assign(src.ln1_g.size(), 0.0); dst.ln1_b.assign(src.ln1_b.size(), 0.0);
    dst.ln2_g.assign(src.ln2_g.size(), 0.0); dst.ln2_b.assign(src.ln2_b.size(), 0.0);
  }
  z.head_w.assign(model.head_w.size(), 0.0);
  z.head_b.assign(model.head_b.size(), 0.0);
  return z;
}

int64_t encoder_param_count(const EncoderConfig& c) {
  const int64_t d = c.d_model, f = c.d_ff;
  const int64_t per_layer = 4 * (d * d + d) + (d * f + f) + (f * d + d) + 4 * d;
  return c.vocab_size * d + c.max_len * d + c.layers * per_layer + d * 2 + 2;
}

std::vector<ParamBlock> param_blocks(EncoderModel& model) {
  std::vector<ParamBlock> blocks;
  blocks.push_back({"token_embedding", &model.token_embedding});
  blocks.push_back({"positional", &model.positional});
  for (size_t l = 0; l < model.layers.size(); ++l) {
    EncoderLayer& layer = model.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    blocks.push_back({p + "attn_wq", &layer.wq});
    blocks.push_back({p + "attn_bq", &layer.bq});
    blocks.push_back({p + "attn_wk", &layer.wk});
    blocks.push_back({p + "attn_bk", &layer.bk});
    blocks.push_back({p + "attn_wv", &layer.wv});
    blocks.push_back({p + "attn_bv", &layer.bv});
    blocks.push_back({p + "attn_wo", &layer.wo});
    blocks.push_back({p + "attn_bo", &layer.bo});
    blocks.push_back({p + "ff_w1", &layer.w1});
    blocks.push_back({p + "ff_b1", &layer.b1});
    blocks.push_back({p + "ff_w2", &layer.w2});
    blocks.push_back({p + "ff_b2", &layer.b2});
    blocks.push_back({p + "ln1_gain", &layer.ln1_g});
    blocks.push_back({p + "ln1_bias", &layer.ln1_b});
    blocks.push_back({p + "ln2_gain", &layer.ln2_g});
    blocks.push_back({p + "ln2_bias", &layer.ln2_b});
  }
  blocks.push_back({"head_w", &model.head_w});
  blocks.push_back({"head_b", &model.head_b});
  return blocks;
}

Batch make_batch(const std::vector<TokenSequence>& docs,
                 const Vocabulary& vocab, int max_len,
                 const std::vector<Label>* labels) {
  Batch batch;
  batch.size = static_cast<int64_t>(docs.size());
  int64_t longest = 1;
  for (const TokenSequence& doc : docs) {
    longest = std::max<int64_t>(longest,
                                std::max<size_t>(doc.tokens.size(), size_t{1}));
  }
  batch.len = std::min<int64_t>(longest, max_len);
  batch.tokens.assign(batch.size * batch.len, 0);
  batch.pad.assign(batch.size * batch.len, 1);
  for (int64_t b = 0; b < batch.size; ++b) {
    const auto& toks = docs[b].tokens;
    int64_t n = std::min<int64_t>(static_cast<int64_t>(toks.size()), batch.len);
    if (n == 0) {
      batch.tokens[b * batch.len] = 1;  // UNK sentinel for an empty post
      batch.pad[b * batch.len] = 0;
      continue;
    }
    for (int64_t i = 0; i < n; ++i) {
      const int32_t t = vocab.find(toks[i]);
      batch.tokens[b * batch.len + i] = t >= 0 ? t + 2 : 1;
      batch.pad[b * batch.len + i] = 0;
    }
  }
  if (labels) batch.labels = *labels;
  return batch;
}

ForwardResult encode_forward(const EncoderModel& model, const Batch& batch,
                             bool want_attention) {
  Cache cache = run_forward(model, batch);
  ForwardResult result;
  result.logits = std::move(cache.logits);
  if (want_attention) {
    result.has_attention = true;
    result.attention.reserve(cache.layers.size() * cache.layers[0].attn.size());
    for (const LayerCache& lc : cache.layers)
      result.attention.insert(result.attention.end(), lc.attn.begin(),
                              lc.attn.end());
  }
  return result;
}

double encoder_loss(const EncoderModel& model, const Batch& batch) {
  Cache cache = run_forward(model, batch);
  return batch_loss(cache, batch, nullptr);
}

double encoder_loss_and_grads(const EncoderModel& model, const Batch& batch,
                              EncoderModel& grads) {
  const EncoderConfig& cfg = model.config;
  const int64_t b_count = batch.size;
  const int64_t len = batch.len;
  const int64_t d = cfg.d_model;
  const int64_t f = cfg.d_ff;
  const int64_t positions = b_count * len;

  Cache cache = run_forward(model, batch);
  std::vector<double> d_logits;
  const double loss = batch_loss(cache, batch, &d_logits);

  // head
  std::vector<double> d_pooled(b_count * d, 0.0);
  affine_backward(cache.pooled.data(), d_logits.data(), b_count, d, 2,
                  model.head_w.data(), d_pooled.data(), grads.head_w.data(),
                  grads.head_b.data());

  // masked mean-pool
  std::vector<double> d_x(positions * d, 0.0);
  for (int64_t b = 0; b < b_count; ++b) {
    const double* dp = d_pooled.data() + b * d;
    for (int64_t i = 0; i < len; ++i) {
      if (batch.pad[b * len + i]) continue;
      double* dxi = d_x.data() + (b * len + i) * d;
      for (int64_t j = 0; j < d; ++j) dxi[j] += dp[j] * cache.inv_count[b];
    }
  }

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const EncoderLayer& layer = model.layers[l];
    EncoderLayer& dlayer = grads.layers[l];
    const LayerCache& lc = cache.layers[l];

    // feed-forward sublayer: x_out = x_mid + W2 relu(W1 n2 + b1) + b2
    std::vector<double> d_h1(positions * f, 0.0);
    affine_backward(lc.h1.data(), d_x.data(), positions, f, d, layer.w2.data(),
                    d_h1.data(), dlayer.w2.data(), dlayer.b2.data());
    for (int64_t p = 0; p < positions * f; ++p) d_h1[p] *= gelu_grad(lc.z1[p]);
    std::vector<double> d_n2(positions * d, 0.0);
    affine_backward(lc.n2.data(), d_h1.data(), positions, d, f, layer.w1.data(),
                    d_n2.data(), dlayer.w1.data(), dlayer.b1.data());
    // residual: d_x (upstream) flows to x_mid directly plus through LN2
    std::vector<double> d_x_mid = d_x;
    layer_norm_backward(d_n2.data(), lc.xhat2.data(), lc.rstd2.data(), positions,
                        d, layer.ln2_g.data(), d_x_mid.data(),
                        dlayer.ln2_g.data(), dlayer.ln2_b.data());

    // attention sublayer: x_mid = x_in + Wo ctx + bo
    std::vector<double> d_ctx(positions * d, 0.0);
    affine_backward(lc.ctx.data(), d_x_mid.data(), positions, d, d,
                    layer.wo.data(), d_ctx.data(), dlayer.wo.data(),
                    dlayer.bo.data());
    std::vector<double> d_q(positions * d, 0.0), d_k(positions * d, 0.0),
        d_v(positions * d, 0.0);
    attention_backward(lc.q.data(), lc.k.data(), lc.v.data(), lc.attn.data(),
                       d_ctx.data(), batch.pad.data(), b_count, len, d,
                       cfg.heads, d_q.data(), d_k.data(), d_v.data());
    std::vector<double> d_n1(positions * d, 0.0);
    affine_backward(lc.n1.data(), d_q.data(), positions, d, d, layer.wq.data(),
                    d_n1.data(), dlayer.wq.data(), dlayer.bq.data());
    affine_backward(lc.n1.data(), d_k.data(), positions, d, d, layer.wk.data(),
                    d_n1.data(), dlayer.wk.data(), dlayer.bk.data());
    affine_backward(lc.n1.data(), d_v.data(), positions, d, d, layer.wv.data(),
                    d_n1.data(), dlayer.wv.data(), dlayer.bv.data());
    std::vector<double> d_x_in = d_x_mid;
    layer_norm_backward(d_n1.data(), lc.xhat1.data(), lc.rstd1.data(), positions,
                        d, layer.ln1_g.data(), d_x_in.data(),
                        dlayer.ln1_g.data(), dlayer.ln1_b.data());
    d_x = std::move(d_x_in);
  }

  // embeddings
  for (int64_t b = 0; b < b_count; ++b) {
    for (int64_t i = 0; i < len; ++i) {
      const double* dxi = d_x.data() + (b * len + i) * d;
      const int32_t tok = batch.tokens[b * len + i];
      double* dte = grads.token_embedding.data() + static_cast<int64_t>(tok) * d;
      double* dpe = grads.positional.data() + i * d;
      for (int64_t j = 0; j < d; ++j) {
        dte[j] += dxi[j];
        dpe[j] += dxi[j];
      }
    }
  }
  return loss;
}

double train_step(EncoderModel& model, const Batch& batch, AdamState& state,
                  const EncoderTrainParams& params) {
  if (state.step == 0) {
    state.m = zeros_like(model);
    state.v = zeros_like(model);
  }
  EncoderModel grads = zeros_like(model);
  const double loss = encoder_loss_and_grads(model, batch, grads);
  if (!std::isfinite(loss))
    throw TrainError("encoder train_step: non-finite loss at step " +
                     std::to_string(state.step));
  state.step += 1;
  const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.step));

  std::vector<ParamBlock> p = param_blocks(model);
  std::vector<ParamBlock> g = param_blocks(grads);
  std::vector<ParamBlock> m = param_blocks(state.m);
  std::vector<ParamBlock> v = param_blocks(state.v);
  for (size_t blk = 0; blk < p.size(); ++blk) {
    std::vector<double>& pw = *p[blk].data;
    std::vector<double>& gw = *g[blk].data;
    std::vector<double>& mw = *m[blk].data;
    std::vector<double>& vw = *v[blk].data;
    for (size_t j = 0; j < pw.size(); ++j) {
      mw[j] = params.beta1 * mw[j] + (1.0 - params.beta1) * gw[j];
      vw[j] = params.beta2 * vw[j] + (1.0 - params.beta2) * gw[j] * gw[j];
      const double mhat = mw[j] / bc1;
      const double vhat = vw[j] / bc2;
      pw[j] -= params.lr * mhat / (std::sqrt(vhat) + params.eps);
    }
  }
  return loss;
}

std::vector<Label> encoder_predict(const EncoderModel& model,
                                   const std::vector<TokenSequence>& docs,
                                   const Vocabulary& vocab) {
  std::vector<Label> out;
  out.reserve(docs.size());
  constexpr size_t kChunk = 64;
  for (size_t start = 0; start < docs.size(); start += kChunk) {
    const size_t end = std::min(docs.size(), start + kChunk);
    std::vector<TokenSequence> slice(docs.begin() + start, docs.begin() + end);
    Batch batch = make_batch(slice, vocab, model.config.max_len);
    ForwardResult result = encode_forward(model, batch);
    for (int64_t b = 0; b < batch.size; ++b) {
      const double fake = result.logits[b * 2 + 0];
      const double real = result.logits[b * 2 + 1];
      out.push_back(fake > real ? Label::Fake : Label::Real);
    }
  }
  return out;
}

}  // namespace veritext
