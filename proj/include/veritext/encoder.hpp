#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "veritext/corpus.hpp"
#include "veritext/features.hpp"

namespace veritext {

struct EncoderConfig {
  int64_t vocab_size = 0;  // includes the PAD (0) and UNK (1) rows
  int d_model = 64;
  int heads = 4;
  int layers = 2;
  int d_ff = 128;
  int max_len = 128;
  uint64_t seed = 0;
};

struct EncoderLayer {
  std::vector<double> wq, bq, wk, bk, wv, bv, wo, bo;  // d*d projections + biases
  std::vector<double> w1, b1, w2, b2;                  // d*F and F*d feed-forward
  std::vector<double> ln1_g, ln1_b, ln2_g, ln2_b;      // pre-norm gains/biases
};

/// Pre-norm transformer encoder classifier:
/// token + learned positional embeddings, `layers` blocks of
/// (x += MHSA(LN(x)); x += FF(LN(x))), masked mean-pool, linear head.
struct EncoderModel {
  EncoderConfig config;
  std::vector<double> token_embedding;  // V * d
  std::vector<double> positional;       // max_len * d
  std::vector<EncoderLayer> layers;
  std::vector<double> head_w;  // d * 2
  std::vector<double> head_b;  // 2
};

/// Seeded initialization: normal(0, 0.02) matrices, zero biases, unit
/// layer-norm gains.
EncoderModel encoder_init(const EncoderConfig& config);

/// All parameters zeroed but same shapes; used for gradients and Adam state.
EncoderModel zeros_like(const EncoderModel& model);

/// V*d + max_len*d + layers*(4(d^2+d) + dF+F + Fd+d + 4d) + 2d + 2.
int64_t encoder_param_count(const EncoderConfig& config);

/// Named views over every parameter tensor, in a fixed order. The same order
/// is used for serialization, Adam and the gradient check.
struct ParamBlock {
  std::string name;
  std::vector<double>* data;
};
std::vector<ParamBlock> param_blocks(EncoderModel& model);

struct Batch {
  int64_t size = 0;  // B
  int64_t len = 0;   // L
  std::vector<int32_t> tokens;  // B*L, row-major, PAD = 0
  std::vector<uint8_t> pad;     // B*L, 1 marks padding
  std::vector<Label> labels;    // B entries when supervised, else empty
};

/// Token ids for the encoder: 0 = PAD, 1 = UNK, vocabulary tokens from 2.
/// Empty documents become a single UNK sentinel. Sequences longer than
/// max_len are truncated.
Batch make_batch(const std::vector<TokenSequence>& docs,
                 const Vocabulary& vocab, int max_len,
                 const std::vector<Label>* labels = nullptr);

struct ForwardResult {
  std::vector<double> logits;     // B * 2
  std::vector<double> attention;  // layers*heads*B*L*L when requested
  bool has_attention = false;
};

ForwardResult encode_forward(const EncoderModel& model, const Batch& batch,
                             bool want_attention = false);

/// Mean cross-entropy of the batch (forward only; finite-difference oracle).
double encoder_loss(const EncoderModel& model, const Batch& batch);

/// Loss plus exact gradients for every parameter (grads must be zeros_like
/// shaped; values are accumulated into it).
double encoder_loss_and_grads(const EncoderModel& model, const Batch& batch,
                              EncoderModel& grads);

struct AdamState {
  EncoderModel m;
  EncoderModel v;
  int64_t step = 0;
};

struct EncoderTrainParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One full train step (backprop + adaptive-moment update). Returns the batch
/// loss; throws TrainError with the step index if it goes non-finite.
double train_step(EncoderModel& model, const Batch& batch, AdamState& state,
                  const EncoderTrainParams& params);

/// Batched argmax prediction over RAW-pipeline token sequences; ties go to
/// REAL.
std::vector<Label> encoder_predict(const EncoderModel& model,
                                   const std::vector<TokenSequence>& docs,
                                   const Vocabulary& vocab);

}  // namespace veritext
