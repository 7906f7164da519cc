#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xlsent/tensor.hpp"
#include "xlsent/tokenizer.hpp"

namespace xlsent {

struct EncoderConfig {
  int vocab_size = 0;
  int d_model = 32;
  int n_layers = 2;
  int n_heads = 2;
  int d_ff = 64;
  int max_seq_len = 128;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  bool tie_mlm = false;  // reuse token embeddings as the MLM projection

  int head_dim() const { return d_model / n_heads; }
  void validate() const;
  std::string to_json() const;
  static EncoderConfig from_json(const std::string& text);
};

struct LayerParameters {
  Matrix ln1_g, ln1_b, ln2_g, ln2_b;  // 1 x d
  Matrix wq, wk, wv, wo;              // d x d
  Matrix bq, bk, bv, bo;              // 1 x d
  Matrix w1, b1;                      // d x ff, 1 x ff
  Matrix w2, b2;                      // ff x d, 1 x d
};

struct EncoderParameters {
  EncoderConfig config;
  Matrix tok_emb;  // V x d
  Matrix pos_emb;  // max_seq x d
  std::vector<LayerParameters> layers;
  Matrix lnf_g, lnf_b;      // 1 x d
  Matrix mlm_w, mlm_b;      // d x V, 1 x V (mlm_w unused when tied)
  Matrix sent_w, sent_b;    // d x 3: paragraph sentiment head
  Matrix poa_w, poa_b;      // d x 3
  Matrix doc_w, doc_b;      // d x 3: document sentiment head

  // Visits every trainable tensor in a fixed order; names are stable and
  // used by the checkpoint format and the optimizer.
  template <typename Self, typename F>
  static void visit(Self& p, F&& f) {
    f("tok_emb", p.tok_emb);
    f("pos_emb", p.pos_emb);
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
      const std::string prefix = "layer" + std::to_string(i) + ".";
      auto& l = p.layers[i];
      f(prefix + "ln1_g", l.ln1_g);
      f(prefix + "ln1_b", l.ln1_b);
      f(prefix + "wq", l.wq);
      f(prefix + "bq", l.bq);
      f(prefix + "wk", l.wk);
      f(prefix + "bk", l.bk);
      f(prefix + "wv", l.wv);
      f(prefix + "bv", l.bv);
      f(prefix + "wo", l.wo);
      f(prefix + "bo", l.bo);
      f(prefix + "ln2_g", l.ln2_g);
      f(prefix + "ln2_b", l.ln2_b);
      f(prefix + "w1", l.w1);
      f(prefix + "b1", l.b1);
      f(prefix + "w2", l.w2);
      f(prefix + "b2", l.b2);
    }
    f("lnf_g", p.lnf_g);
    f("lnf_b", p.lnf_b);
    f("mlm_w", p.mlm_w);
    f("mlm_b", p.mlm_b);
    f("sent_w", p.sent_w);
    f("sent_b", p.sent_b);
    f("poa_w", p.poa_w);
    f("poa_b", p.poa_b);
    f("doc_w", p.doc_w);
    f("doc_b", p.doc_b);
  }

  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, std::forward<F>(f));
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(*this, std::forward<F>(f));
  }
};

// Scaled-normal(0, 0.02) init for embeddings and projections, zeros for
// biases, ones for normalization gains. Deterministic per config.seed.
EncoderParameters init_parameters(const EncoderConfig& config);

// Same shapes as `like`, all zeros (gradient / moment accumulators).
EncoderParameters zeros_like(const EncoderParameters& like);

struct HeadLogits {
  Matrix mlm;            // (B*S) x V when requested, otherwise empty
  Matrix sentiment;      // B x 3, read at the [CLS] position
  Matrix poa;            // B x 3
  Matrix doc_sentiment;  // B x 3
};

struct ForwardOptions {
  bool want_mlm = true;
  double dropout = 0.0;  // 0 disables; training passes config.dropout
  std::uint64_t dropout_seed = 0;
};

HeadLogits forward(const EncoderParameters& params, const MaskedBatch& batch,
                   const ForwardOptions& opts = {});

// Final hidden state at the [CLS] position for every row (B x d_model);
// the representation the classification heads read, useful as a document
// embedding.
Matrix encode_pooled(const EncoderParameters& params, const MaskedBatch& batch);

// Training batch: token rows plus whichever per-row targets are active.
struct TrainingBatch {
  MaskedBatch tokens;
  std::vector<int> doc_labels;   // empty or one class index per row
  std::vector<int> para_labels;  // paragraph sentiment
  std::vector<int> poa_labels;
};

struct LossSpec {
  double w_doc = 0.0;
  double w_para = 0.0;
  double w_mlm = 0.0;
  double w_poa = 0.0;

  static LossSpec document() { return {1.0, 0.0, 0.0, 0.0}; }
  static LossSpec pse() { return {0.0, 1.0, 1.0, 0.0}; }
  static LossSpec poa_regime() { return {0.0, 1.0, 1.0, 1.0}; }
};

struct LossBreakdown {
  double doc = 0.0;
  double para = 0.0;
  double mlm = 0.0;
  double poa = 0.0;
  double total = 0.0;  // weighted components added in fixed order: doc, para, mlm, poa
};

// Mean over rows of -log softmax(logits)[label].
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Mean cross-entropy over masked positions only.
double mlm_loss(const Matrix& per_position_logits, const MaskedBatch& batch);

// Loss of the selected objectives plus exact gradients for every parameter
// tensor. `grads` is reset before accumulation.
LossBreakdown compute_gradients(const EncoderParameters& params, const TrainingBatch& batch,
                                const LossSpec& spec, EncoderParameters& grads,
                                const ForwardOptions& opts = {});

// Forward-only evaluation of the same objectives.
LossBreakdown compute_loss(const EncoderParameters& params, const TrainingBatch& batch,
                           const LossSpec& spec, const ForwardOptions& opts = {});

std::vector<double> softmax_row(const double* logits, std::size_t n);

}  // namespace xlsent
