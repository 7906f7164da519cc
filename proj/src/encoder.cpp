#include "xlsent/encoder.hpp"

#include <cmath>

#include <json.hpp>

#include "xlsent/errors.hpp"
#include "xlsent/rng.hpp"

namespace xlsent {

using nlohmann::json;

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInitStd = 0.02;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = std::exp(-0.5 * x * x) * kInvSqrt2Pi;
  return cdf + x * pdf;
}

struct LnStats {
  std::vector<double> mean;
  std::vector<double> rstd;
};

Matrix layernorm_fwd(const Matrix& x, const Matrix& gain, const Matrix& bias, LnStats& stats) {
  const std::size_t rows = x.rows(), d = x.cols();
  Matrix out(rows, d);
  stats.mean.resize(rows);
  stats.rstd.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.row(r);
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xr[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + kLnEps);
    stats.mean[r] = mean;
    stats.rstd[r] = rstd;
    double* orow = out.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      orow[j] = gain(0, j) * ((xr[j] - mean) * rstd) + bias(0, j);
    }
  }
  return out;
}

Matrix layernorm_bwd(const Matrix& dy, const Matrix& x, const LnStats& stats, const Matrix& gain,
                     Matrix& dgain, Matrix& dbias) {
  const std::size_t rows = x.rows(), d = x.cols();
  Matrix dx(rows, d);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.row(r);
    const double* dyr = dy.row(r);
    double* dxr = dx.row(r);
    const double mean = stats.mean[r];
    const double rstd = stats.rstd[r];
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      const double dxhat = dyr[j] * gain(0, j);
      dgain(0, j) += dyr[j] * xhat;
      dbias(0, j) += dyr[j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
    }
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      const double dxhat = dyr[j] * gain(0, j);
      dxr[j] = rstd * (dxhat - inv_d * sum_dxhat - xhat * inv_d * sum_dxhat_xhat);
    }
  }
  return dx;
}

void apply_dropout(Matrix& x, double p, Rng& rng, std::vector<std::uint8_t>& mask) {
  mask.assign(x.size(), 1);
  if (p <= 0.0) return;
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  auto& data = x.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (rng.next_double() < p) {
      mask[i] = 0;
      data[i] = 0.0;
    } else {
      data[i] *= scale;
    }
  }
}

void dropout_bwd(Matrix& grad, const std::vector<std::uint8_t>& mask, double p) {
  if (p <= 0.0) return;
  const double scale = 1.0 / (1.0 - p);
  auto& data = grad.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = mask[i] ? data[i] * scale : 0.0;
  }
}

struct LayerCache {
  Matrix x_in;
  LnStats ln1_stats, ln2_stats;
  Matrix ln1_out, ln2_out;
  Matrix q, k, v;
  Matrix attn_probs;  // (B*H*S) x S
  Matrix attn_ctx;    // (B*S) x d, heads concatenated, before the output projection
  Matrix resid1;
  Matrix ff_pre, ff_act;
  std::vector<std::uint8_t> attn_drop_mask, ffn_drop_mask;
  Matrix q_grad, k_grad, v_grad;  // filled by attention_bwd
};

struct ForwardCache {
  std::size_t batch = 0, seq = 0;
  Matrix x0;
  std::vector<std::uint8_t> emb_drop_mask;
  std::vector<LayerCache> layers;
  Matrix x_final;  // input to the final layer norm
  LnStats lnf_stats;
  Matrix h;  // (B*S) x d
};

void attention_fwd(const EncoderParameters& params, const LayerParameters& layer, const MaskedBatch& batch,
                   LayerCache& cache) {
  const EncoderConfig& cfg = params.config;
  const std::size_t B = batch.batch_size(), S = batch.seq_len();
  const std::size_t H = static_cast<std::size_t>(cfg.n_heads);
  const std::size_t dh = static_cast<std::size_t>(cfg.head_dim());
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.q = affine(cache.ln1_out, layer.wq, layer.bq);
  cache.k = affine(cache.ln1_out, layer.wk, layer.bk);
  cache.v = affine(cache.ln1_out, layer.wv, layer.bv);
  cache.attn_probs = Matrix(B * H * S, S, 0.0);
  cache.attn_ctx = Matrix(B * S, d, 0.0);

  std::vector<double> scores(S);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t col = h * dh;
      for (std::size_t s = 0; s < S; ++s) {
        if (!batch.attention_mask[b][s]) continue;
        const double* qrow = cache.q.row(b * S + s) + col;
        double max_score = -1e308;
        for (std::size_t t = 0; t < S; ++t) {
          if (!batch.attention_mask[b][t]) continue;
          const double* krow = cache.k.row(b * S + t) + col;
          double dot = 0.0;
          for (std::size_t j = 0; j < dh; ++j) dot += qrow[j] * krow[j];
          scores[t] = dot * scale;
          if (scores[t] > max_score) max_score = scores[t];
        }
        double denom = 0.0;
        double* prow = cache.attn_probs.row((b * H + h) * S + s);
        for (std::size_t t = 0; t < S; ++t) {
          if (!batch.attention_mask[b][t]) continue;
          prow[t] = std::exp(scores[t] - max_score);
          denom += prow[t];
        }
        double* crow = cache.attn_ctx.row(b * S + s) + col;
        for (std::size_t t = 0; t < S; ++t) {
          if (!batch.attention_mask[b][t]) continue;
          prow[t] /= denom;
          const double* vrow = cache.v.row(b * S + t) + col;
          for (std::size_t j = 0; j < dh; ++j) crow[j] += prow[t] * vrow[j];
        }
      }
    }
  }
}

void attention_bwd(const EncoderParameters& params, const LayerParameters& layer, const MaskedBatch& batch,
                   LayerCache& cache, const Matrix& d_ctx, Matrix& d_ln1) {
  const EncoderConfig& cfg = params.config;
  const std::size_t B = batch.batch_size(), S = batch.seq_len();
  const std::size_t H = static_cast<std::size_t>(cfg.n_heads);
  const std::size_t dh = static_cast<std::size_t>(cfg.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix dq(cache.q.rows(), cache.q.cols(), 0.0);
  Matrix dk(cache.k.rows(), cache.k.cols(), 0.0);
  Matrix dv(cache.v.rows(), cache.v.cols(), 0.0);

  std::vector<double> dprobs(S), dscores(S);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t col = h * dh;
      for (std::size_t s = 0; s < S; ++s) {
        if (!batch.attention_mask[b][s]) continue;
        const double* dcrow = d_ctx.row(b * S + s) + col;
        const double* prow = cache.attn_probs.row((b * H + h) * S + s);
        // dV and dP
        double dot_dp_p = 0.0;
        for (std::size_t t = 0; t < S; ++t) {
          if (!batch.attention_mask[b][t]) {
            dprobs[t] = 0.0;
            continue;
          }
          const double* vrow = cache.v.row(b * S + t) + col;
          double acc = 0.0;
          for (std::size_t j = 0; j < dh; ++j) acc += dcrow[j] * vrow[j];
          dprobs[t] = acc;
          dot_dp_p += acc * prow[t];
          double* dvrow = dv.row(b * S + t) + col;
          for (std::size_t j = 0; j < dh; ++j) dvrow[j] += prow[t] * dcrow[j];
        }
        // softmax backward, then dq / dk
        const double* qrow = cache.q.row(b * S + s) + col;
        double* dqrow = dq.row(b * S + s) + col;
        for (std::size_t t = 0; t < S; ++t) {
          if (!batch.attention_mask[b][t]) continue;
          dscores[t] = prow[t] * (dprobs[t] - dot_dp_p);
          const double g = dscores[t] * scale;
          const double* krow = cache.k.row(b * S + t) + col;
          double* dkrow = dk.row(b * S + t) + col;
          for (std::size_t j = 0; j < dh; ++j) {
            dqrow[j] += g * krow[j];
            dkrow[j] += g * qrow[j];
          }
        }
      }
    }
  }

  // back through the three input projections
  add_matmul_nt(d_ln1, dq, layer.wq);
  add_matmul_nt(d_ln1, dk, layer.wk);
  add_matmul_nt(d_ln1, dv, layer.wv);
  // kept for the caller's weight-gradient accumulation
  cache.q_grad = std::move(dq);
  cache.k_grad = std::move(dk);
  cache.v_grad = std::move(dv);
}

}  // namespace

void EncoderConfig::validate() const {
  if (vocab_size < Vocabulary::kNumReserved) throw DataError("encoder config: vocab_size must be >= 5");
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0) {
    throw DataError("encoder config: dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw DataError("encoder config: d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                    std::to_string(n_heads));
  }
  if (max_seq_len < 2) throw DataError("encoder config: max_seq_len must be >= 2");
  if (dropout < 0.0 || dropout >= 1.0) throw DataError("encoder config: dropout must be in [0,1)");
}

std::string EncoderConfig::to_json() const {
  json j;
  j["vocab_size"] = vocab_size;
  j["d_model"] = d_model;
  j["n_layers"] = n_layers;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["max_seq_len"] = max_seq_len;
  j["dropout"] = dropout;
  j["seed"] = seed;
  j["tie_mlm"] = tie_mlm;
  return j.dump();
}

EncoderConfig EncoderConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("encoder config: malformed JSON: ") + e.what());
  }
  EncoderConfig cfg;
  cfg.vocab_size = j.at("vocab_size").get<int>();
  cfg.d_model = j.at("d_model").get<int>();
  cfg.n_layers = j.at("n_layers").get<int>();
  cfg.n_heads = j.at("n_heads").get<int>();
  cfg.d_ff = j.at("d_ff").get<int>();
  cfg.max_seq_len = j.at("max_seq_len").get<int>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.tie_mlm = j.value("tie_mlm", false);
  cfg.validate();
  return cfg;
}

EncoderParameters init_parameters(const EncoderConfig& config) {
  config.validate();
  const std::size_t V = static_cast<std::size_t>(config.vocab_size);
  const std::size_t d = static_cast<std::size_t>(config.d_model);
  const std::size_t ff = static_cast<std::size_t>(config.d_ff);
  const std::size_t S = static_cast<std::size_t>(config.max_seq_len);

  EncoderParameters p;
  p.config = config;
  Rng rng(Rng::mix(config.seed, 0x1717));
  auto normal_fill = [&rng](Matrix& m) {
    for (double& v : m.data()) v = kInitStd * rng.next_normal();
  };

  p.tok_emb = Matrix(V, d);
  normal_fill(p.tok_emb);
  p.pos_emb = Matrix(S, d);
  normal_fill(p.pos_emb);
  p.layers.resize(static_cast<std::size_t>(config.n_layers));
  for (auto& l : p.layers) {
    l.ln1_g = Matrix(1, d, 1.0);
    l.ln1_b = Matrix(1, d, 0.0);
    l.ln2_g = Matrix(1, d, 1.0);
    l.ln2_b = Matrix(1, d, 0.0);
    l.wq = Matrix(d, d);
    normal_fill(l.wq);
    l.bq = Matrix(1, d, 0.0);
    l.wk = Matrix(d, d);
    normal_fill(l.wk);
    l.bk = Matrix(1, d, 0.0);
    l.wv = Matrix(d, d);
    normal_fill(l.wv);
    l.bv = Matrix(1, d, 0.0);
    l.wo = Matrix(d, d);
    normal_fill(l.wo);
    l.bo = Matrix(1, d, 0.0);
    l.w1 = Matrix(d, ff);
    normal_fill(l.w1);
    l.b1 = Matrix(1, ff, 0.0);
    l.w2 = Matrix(ff, d);
    normal_fill(l.w2);
    l.b2 = Matrix(1, d, 0.0);
  }
  p.lnf_g = Matrix(1, d, 1.0);
  p.lnf_b = Matrix(1, d, 0.0);
  p.mlm_w = Matrix(d, V);
  normal_fill(p.mlm_w);
  p.mlm_b = Matrix(1, V, 0.0);
  p.sent_w = Matrix(d, 3);
  normal_fill(p.sent_w);
  p.sent_b = Matrix(1, 3, 0.0);
  p.poa_w = Matrix(d, 3);
  normal_fill(p.poa_w);
  p.poa_b = Matrix(1, 3, 0.0);
  p.doc_w = Matrix(d, 3);
  normal_fill(p.doc_w);
  p.doc_b = Matrix(1, 3, 0.0);
  return p;
}

EncoderParameters zeros_like(const EncoderParameters& like) {
  EncoderParameters z = like;
  z.for_each_tensor([](const std::string&, Matrix& m) { m.fill(0.0); });
  return z;
}

std::vector<double> softmax_row(const double* logits, std::size_t n) {
  double max_v = logits[0];
  for (std::size_t i = 1; i < n; ++i) max_v = std::max(max_v, logits[i]);
  std::vector<double> out(n);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - max_v);
    denom += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
  return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (logits.rows() == 0) throw DataError("cross_entropy: empty logits");
  if (logits.cols() < 2) throw DataError("cross_entropy: need at least 2 classes");
  if (labels.size() != logits.rows()) throw DataError("cross_entropy: labels/logits row mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= logits.cols()) {
      throw DataError("cross_entropy: label " + std::to_string(label) + " out of range");
    }
    const double* row = logits.row(r);
    double max_v = row[0];
    for (std::size_t c = 1; c < logits.cols(); ++c) max_v = std::max(max_v, row[c]);
    double denom = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) denom += std::exp(row[c] - max_v);
    total += (max_v + std::log(denom)) - row[static_cast<std::size_t>(label)];
  }
  return total / static_cast<double>(logits.rows());
}

double mlm_loss(const Matrix& per_position_logits, const MaskedBatch& batch) {
  const std::size_t S = batch.seq_len();
  Matrix masked_logits(batch.masked_count(), per_position_logits.cols());
  std::vector<int> targets;
  std::size_t out_row = 0;
  for (std::size_t b = 0; b < batch.batch_size(); ++b) {
    for (std::size_t t = 0; t < S; ++t) {
      if (!batch.mask_positions[b][t]) continue;
      const double* src = per_position_logits.row(b * S + t);
      double* dst = masked_logits.row(out_row++);
      for (std::size_t c = 0; c < per_position_logits.cols(); ++c) dst[c] = src[c];
      targets.push_back(batch.target_ids[b][t]);
    }
  }
  if (targets.empty()) throw DataError("mlm_loss: no masked positions");
  return cross_entropy(masked_logits, targets);
}

namespace {

void validate_batch(const EncoderParameters& params, const MaskedBatch& batch) {
  const EncoderConfig& cfg = params.config;
  if (batch.batch_size() == 0) throw DataError("encoder: empty batch");
  const std::size_t S = batch.seq_len();
  if (S == 0) throw DataError("encoder: zero-length sequences");
  if (S > static_cast<std::size_t>(cfg.max_seq_len)) {
    throw DataError("encoder: sequence length " + std::to_string(S) + " exceeds max_seq_len " +
                    std::to_string(cfg.max_seq_len));
  }
  for (const auto& row : batch.input_ids) {
    if (row.size() != S) throw DataError("encoder: ragged batch rows");
    for (int id : row) {
      if (id < 0 || id >= cfg.vocab_size) {
        throw DataError("encoder: token id " + std::to_string(id) + " outside vocabulary of size " +
                        std::to_string(cfg.vocab_size));
      }
    }
  }
}

void run_forward(const EncoderParameters& params, const MaskedBatch& batch, const ForwardOptions& opts,
                 ForwardCache& cache) {
  validate_batch(params, batch);
  const EncoderConfig& cfg = params.config;
  const std::size_t B = batch.batch_size(), S = batch.seq_len();
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  Rng drop_rng(Rng::mix(opts.dropout_seed, 0xd20));

  cache.batch = B;
  cache.seq = S;
  cache.x0 = Matrix(B * S, d);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t s = 0; s < S; ++s) {
      const int id = batch.input_ids[b][s];
      double* out = cache.x0.row(b * S + s);
      const double* tok = params.tok_emb.row(static_cast<std::size_t>(id));
      const double* pos = params.pos_emb.row(s);
      for (std::size_t j = 0; j < d; ++j) out[j] = tok[j] + pos[j];
    }
  }
  apply_dropout(cache.x0, opts.dropout, drop_rng, cache.emb_drop_mask);

  Matrix x = cache.x0;
  cache.layers.resize(params.layers.size());
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const LayerParameters& layer = params.layers[li];
    LayerCache& lc = cache.layers[li];
    lc.x_in = x;
    lc.ln1_out = layernorm_fwd(x, layer.ln1_g, layer.ln1_b, lc.ln1_stats);
    attention_fwd(params, layer, batch, lc);
    Matrix attn_out = affine(lc.attn_ctx, layer.wo, layer.bo);
    apply_dropout(attn_out, opts.dropout, drop_rng, lc.attn_drop_mask);
    lc.resid1 = x;
    for (std::size_t i = 0; i < lc.resid1.size(); ++i) lc.resid1.data()[i] += attn_out.data()[i];
    lc.ln2_out = layernorm_fwd(lc.resid1, layer.ln2_g, layer.ln2_b, lc.ln2_stats);
    lc.ff_pre = affine(lc.ln2_out, layer.w1, layer.b1);
    lc.ff_act = lc.ff_pre;
    for (double& v : lc.ff_act.data()) v = gelu(v);
    Matrix ff_out = affine(lc.ff_act, layer.w2, layer.b2);
    apply_dropout(ff_out, opts.dropout, drop_rng, lc.ffn_drop_mask);
    x = lc.resid1;
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += ff_out.data()[i];
  }
  cache.x_final = std::move(x);
  cache.h = layernorm_fwd(cache.x_final, params.lnf_g, params.lnf_b, cache.lnf_stats);
}

Matrix pooled_rows(const ForwardCache& cache) {
  const std::size_t B = cache.batch, S = cache.seq, d = cache.h.cols();
  Matrix pooled(B, d);
  for (std::size_t b = 0; b < B; ++b) {
    const double* src = cache.h.row(b * S);  // [CLS] sits at position 0
    double* dst = pooled.row(b);
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
  }
  return pooled;
}

const Matrix& mlm_weight(const EncoderParameters& params) {
  return params.config.tie_mlm ? params.tok_emb : params.mlm_w;
}

// logits = h_rows * W (d x V) + b, where W is the transpose of tok_emb when tied
Matrix mlm_logits_for_rows(const EncoderParameters& params, const Matrix& h_rows) {
  if (params.config.tie_mlm) {
    Matrix logits(h_rows.rows(), params.tok_emb.rows(), 0.0);
    add_matmul_nt(logits, h_rows, params.tok_emb);
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      double* row = logits.row(r);
      for (std::size_t c = 0; c < logits.cols(); ++c) row[c] += params.mlm_b(0, c);
    }
    return logits;
  }
  return affine(h_rows, params.mlm_w, params.mlm_b);
}

struct HeadLoss {
  double value = 0.0;
  Matrix dlogits;  // already scaled by weight / row count
};

HeadLoss softmax_ce_head(const Matrix& logits, const std::vector<int>& labels, double weight) {
  HeadLoss result;
  result.value = cross_entropy(logits, labels);
  result.dlogits = Matrix(logits.rows(), logits.cols());
  const double scale = weight / static_cast<double>(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const std::vector<double> probs = softmax_row(logits.row(r), logits.cols());
    double* drow = result.dlogits.row(r);
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      drow[c] = (probs[c] - (static_cast<int>(c) == labels[r] ? 1.0 : 0.0)) * scale;
    }
  }
  return result;
}

}  // namespace

namespace {

LossBreakdown losses_and_grads(const EncoderParameters& params, const TrainingBatch& batch,
                               const LossSpec& spec, EncoderParameters& grads, const ForwardOptions& opts,
                               bool want_grads) {
  const EncoderConfig& cfg = params.config;
  ForwardCache cache;
  run_forward(params, batch.tokens, opts, cache);
  const std::size_t B = cache.batch, S = cache.seq;
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);

  if (want_grads) grads = zeros_like(params);

  LossBreakdown losses;
  Matrix dh(B * S, d, 0.0);
  const Matrix pooled = pooled_rows(cache);
  Matrix dpooled(B, d, 0.0);

  auto run_cls_head = [&](double weight, const std::vector<int>& labels, const Matrix& w, const Matrix& b,
                          Matrix& dw, Matrix& db, const char* name) -> double {
    if (labels.size() != B) {
      throw DataError(std::string("compute_gradients: ") + name + " loss active but batch carries " +
                      std::to_string(labels.size()) + " labels for " + std::to_string(B) + " rows");
    }
    const Matrix logits = affine(pooled, w, b);
    HeadLoss head = softmax_ce_head(logits, labels, weight);
    if (!std::isfinite(head.value)) {
      throw NumericalError(std::string("compute_gradients: non-finite ") + name + " loss");
    }
    if (want_grads) {
      add_matmul_tn(dw, pooled, head.dlogits);
      for (std::size_t r = 0; r < B; ++r) {
        for (std::size_t c = 0; c < logits.cols(); ++c) db(0, c) += head.dlogits(r, c);
      }
      add_matmul_nt(dpooled, head.dlogits, w);
    }
    return head.value;
  };

  if (spec.w_doc != 0.0) {
    losses.doc = run_cls_head(spec.w_doc, batch.doc_labels, params.doc_w, params.doc_b, grads.doc_w,
                              grads.doc_b, "doc_sentiment");
    losses.total += spec.w_doc * losses.doc;
  }
  if (spec.w_para != 0.0) {
    losses.para = run_cls_head(spec.w_para, batch.para_labels, params.sent_w, params.sent_b, grads.sent_w,
                               grads.sent_b, "paragraph_sentiment");
    losses.total += spec.w_para * losses.para;
  }
  if (spec.w_mlm != 0.0) {
    // gather hidden rows at masked positions; logits are never materialized
    // for unmasked positions
    std::vector<std::size_t> rows;
    std::vector<int> targets;
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t t = 0; t < S; ++t) {
        if (!batch.tokens.mask_positions[b][t]) continue;
        rows.push_back(b * S + t);
        targets.push_back(batch.tokens.target_ids[b][t]);
      }
    }
    if (rows.empty()) throw DataError("compute_gradients: mlm loss active but no masked positions");
    Matrix h_rows(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* src = cache.h.row(rows[i]);
      double* dst = h_rows.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
    }
    const Matrix logits = mlm_logits_for_rows(params, h_rows);
    HeadLoss head = softmax_ce_head(logits, targets, spec.w_mlm);
    if (!std::isfinite(head.value)) throw NumericalError("compute_gradients: non-finite mlm loss");
    losses.mlm = head.value;
    losses.total += spec.w_mlm * losses.mlm;
    if (want_grads) {
      const Matrix& w = mlm_weight(params);
      Matrix dh_rows(rows.size(), d, 0.0);
      if (cfg.tie_mlm) {
        // logits = h * tok_emb^T: gradients reach both sides
        add_matmul_tn(grads.tok_emb, head.dlogits, h_rows);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const double* drow = head.dlogits.row(i);
          double* out = dh_rows.row(i);
          for (std::size_t v = 0; v < w.rows(); ++v) {
            const double g = drow[v];
            if (g == 0.0) continue;
            const double* wrow = w.row(v);
            for (std::size_t j = 0; j < d; ++j) out[j] += g * wrow[j];
          }
        }
      } else {
        add_matmul_tn(grads.mlm_w, h_rows, head.dlogits);
        add_matmul_nt(dh_rows, head.dlogits, params.mlm_w);
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < head.dlogits.cols(); ++c) grads.mlm_b(0, c) += head.dlogits(i, c);
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        double* dst = dh.row(rows[i]);
        const double* src = dh_rows.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    }
  }
  if (spec.w_poa != 0.0) {
    losses.poa = run_cls_head(spec.w_poa, batch.poa_labels, params.poa_w, params.poa_b, grads.poa_w,
                              grads.poa_b, "poa");
    losses.total += spec.w_poa * losses.poa;
  }
  if (!std::isfinite(losses.total)) throw NumericalError("compute_gradients: non-finite total loss");
  if (!want_grads) return losses;

  // scatter pooled-head gradients back to the [CLS] rows
  for (std::size_t b = 0; b < B; ++b) {
    double* dst = dh.row(b * S);
    const double* src = dpooled.row(b);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }

  // final layer norm
  Matrix dx = layernorm_bwd(dh, cache.x_final, cache.lnf_stats, params.lnf_g, grads.lnf_g, grads.lnf_b);

  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const LayerParameters& layer = params.layers[li];
    LayerCache& lc = cache.layers[li];
    LayerParameters& lg = grads.layers[li];

    // feed-forward branch
    Matrix dff_out = dx;
    dropout_bwd(dff_out, lc.ffn_drop_mask, opts.dropout);
    Matrix dff_act(dff_out.rows(), lc.ff_act.cols(), 0.0);
    add_matmul_tn(lg.w2, lc.ff_act, dff_out);
    for (std::size_t r = 0; r < dff_out.rows(); ++r) {
      for (std::size_t c = 0; c < dff_out.cols(); ++c) lg.b2(0, c) += dff_out(r, c);
    }
    add_matmul_nt(dff_act, dff_out, layer.w2);
    Matrix dff_pre = std::move(dff_act);
    for (std::size_t i = 0; i < dff_pre.size(); ++i) {
      dff_pre.data()[i] *= gelu_grad(lc.ff_pre.data()[i]);
    }
    add_matmul_tn(lg.w1, lc.ln2_out, dff_pre);
    for (std::size_t r = 0; r < dff_pre.rows(); ++r) {
      for (std::size_t c = 0; c < dff_pre.cols(); ++c) lg.b1(0, c) += dff_pre(r, c);
    }
    Matrix d_ln2(dff_pre.rows(), d, 0.0);
    add_matmul_nt(d_ln2, dff_pre, layer.w1);
    Matrix d_resid1 = layernorm_bwd(d_ln2, lc.resid1, lc.ln2_stats, layer.ln2_g, lg.ln2_g, lg.ln2_b);
    for (std::size_t i = 0; i < d_resid1.size(); ++i) d_resid1.data()[i] += dx.data()[i];

    // attention branch
    Matrix dattn_out = d_resid1;
    dropout_bwd(dattn_out, lc.attn_drop_mask, opts.dropout);
    add_matmul_tn(lg.wo, lc.attn_ctx, dattn_out);
    for (std::size_t r = 0; r < dattn_out.rows(); ++r) {
      for (std::size_t c = 0; c < dattn_out.cols(); ++c) lg.bo(0, c) += dattn_out(r, c);
    }
    Matrix d_ctx(dattn_out.rows(), d, 0.0);
    add_matmul_nt(d_ctx, dattn_out, layer.wo);

    Matrix d_ln1(dattn_out.rows(), d, 0.0);
    attention_bwd(params, layer, batch.tokens, lc, d_ctx, d_ln1);
    add_matmul_tn(lg.wq, lc.ln1_out, lc.q_grad);
    add_matmul_tn(lg.wk, lc.ln1_out, lc.k_grad);
    add_matmul_tn(lg.wv, lc.ln1_out, lc.v_grad);
    for (std::size_t r = 0; r < lc.q_grad.rows(); ++r) {
      for (std::size_t c = 0; c < lc.q_grad.cols(); ++c) {
        lg.bq(0, c) += lc.q_grad(r, c);
        lg.bk(0, c) += lc.k_grad(r, c);
        lg.bv(0, c) += lc.v_grad(r, c);
      }
    }
    Matrix dx_ln = layernorm_bwd(d_ln1, lc.x_in, lc.ln1_stats, layer.ln1_g, lg.ln1_g, lg.ln1_b);
    dx = std::move(d_resid1);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] += dx_ln.data()[i];
  }

  // embeddings
  dropout_bwd(dx, cache.emb_drop_mask, opts.dropout);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t s = 0; s < S; ++s) {
      const int id = batch.tokens.input_ids[b][s];
      const double* src = dx.row(b * S + s);
      double* tok = grads.tok_emb.row(static_cast<std::size_t>(id));
      double* pos = grads.pos_emb.row(s);
      for (std::size_t j = 0; j < d; ++j) {
        tok[j] += src[j];
        pos[j] += src[j];
      }
    }
  }
  return losses;
}

}  // namespace

HeadLogits forward(const EncoderParameters& params, const MaskedBatch& batch, const ForwardOptions& opts) {
  ForwardCache cache;
  run_forward(params, batch, opts, cache);
  HeadLogits out;
  const Matrix pooled = pooled_rows(cache);
  out.sentiment = affine(pooled, params.sent_w, params.sent_b);
  out.poa = affine(pooled, params.poa_w, params.poa_b);
  out.doc_sentiment = affine(pooled, params.doc_w, params.doc_b);
  if (opts.want_mlm) out.mlm = mlm_logits_for_rows(params, cache.h);
  return out;
}

Matrix encode_pooled(const EncoderParameters& params, const MaskedBatch& batch) {
  ForwardCache cache;
  run_forward(params, batch, ForwardOptions{}, cache);
  return pooled_rows(cache);
}

LossBreakdown compute_loss(const EncoderParameters& params, const TrainingBatch& batch, const LossSpec& spec,
                           const ForwardOptions& opts) {
  EncoderParameters scratch;
  return losses_and_grads(params, batch, spec, scratch, opts, /*want_grads=*/false);
}

LossBreakdown compute_gradients(const EncoderParameters& params, const TrainingBatch& batch,
                                const LossSpec& spec, EncoderParameters& grads, const ForwardOptions& opts) {
  return losses_and_grads(params, batch, spec, grads, opts, /*want_grads=*/true);
}

}  // namespace xlsent
