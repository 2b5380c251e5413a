#pragma once

// GRU encoder / additive-attention GRU decoder with hand-derived gradients.
//
// The encoder reads the embedded goal-area entities. The decoder starts from
// s0 = [h_final ; raw features (masked) ; object embedding], attends over the
// encoder states with query s_{i-1}, and consumes [word embedding ; context].

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fexp/masked_input.hpp"
#include "fexp/tensor.hpp"

namespace fexp {

enum class AttentionKeys {
  Encoder,            // keys = H
  EncoderAndInitial,  // keys = H plus a learned projection of s0
};

struct ModelDims {
  std::size_t entity_vocab = 0;
  std::size_t n_objects = 0;
  std::size_t vocab = 0;
  std::size_t entity_dim = 20;
  std::size_t encoder_hidden = 20;
  std::size_t n_raw = 12;
  std::size_t object_dim = 17;
  std::size_t word_dim = 16;
  std::size_t attention_dim = 20;
  AttentionKeys keys = AttentionKeys::Encoder;

  std::size_t decoder_hidden() const { return encoder_hidden + n_raw + object_dim; }
  std::size_t decoder_input() const { return word_dim + encoder_hidden; }
  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct GruParams {
  Tensor w_z, u_z, b_z;  // update gate
  Tensor w_r, u_r, b_r;  // reset gate
  Tensor w_h, u_h, b_h;  // candidate

  static GruParams zeros(std::size_t input, std::size_t hidden);
  std::size_t input_dim() const { return w_z.cols(); }
  std::size_t hidden_dim() const { return w_z.rows(); }
  friend bool operator==(const GruParams&, const GruParams&) = default;
};

struct AttentionParams {
  Tensor w_query;   // attention x decoder_hidden
  Tensor w_key;     // attention x encoder_hidden
  Tensor score;     // attention
  Tensor w_memory;  // encoder_hidden x decoder_hidden; only with EncoderAndInitial
  friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

struct ModelParams {
  ModelDims dims;
  Tensor entity_embed;  // entity_vocab x entity_dim
  Tensor object_embed;  // n_objects x object_dim
  Tensor word_embed;    // vocab x word_dim
  GruParams encoder;
  GruParams decoder;
  AttentionParams attention;
  Tensor out_w;  // vocab x decoder_hidden
  Tensor out_b;  // vocab

  static ModelParams zeros(const ModelDims& dims);
  /// Weights uniform in [-scale, scale], biases zero.
  static ModelParams initialize(const ModelDims& dims, std::uint64_t seed, double scale = 0.08);

  /// Every learnable tensor with a stable name. Empty tensors are skipped.
  std::vector<std::pair<std::string, Tensor*>> tensors();
  std::vector<std::pair<std::string, const Tensor*>> tensors() const;
  std::size_t parameter_count() const;
  void set_zero();
  /// this += scale * other
  void add_scaled(const ModelParams& other, double scale);
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

bool is_bias(const std::string& tensor_name);

// ---------------------------------------------------------------------------
// Forward building blocks

struct GruStep {
  Vec x, h_prev;
  Vec z, r, candidate, reset_h;
  Vec h;
};

Vec gru_cell(std::span<const double> x, std::span<const double> h_prev, const GruParams& p);
GruStep gru_forward(std::span<const double> x, std::span<const double> h_prev, const GruParams& p);
/// Accumulates parameter gradients into `grad`, input gradients into dx and dh_prev.
void gru_backward(const GruStep& step, std::span<const double> dh, const GruParams& p, GruParams& grad,
                  std::span<double> dx, std::span<double> dh_prev);

struct AttentionStep {
  Vec query;                        // W_query s_prev
  std::vector<Vec> activations;     // tanh(query + W_key m_j), per memory slot
  Vec weights;                      // softmax of scores
  Vec context;
};

AttentionStep attend(std::span<const double> s_prev, const std::vector<Vec>& memory, const AttentionParams& p);

struct EncoderPass {
  std::vector<GruStep> steps;
  std::vector<Vec> states;  // H
  const Vec& final_state() const { return states.back(); }
};

EncoderPass encode(std::span<const int> entities, const ModelParams& p);

Vec init_decoder_state(std::span<const double> h_final, std::span<const double> raw, const std::vector<bool>& mask,
                       std::span<const double> object_embedding);

struct DecodeStep {
  int y_prev = 0;
  Vec s_prev;
  AttentionStep attention;
  GruStep gru;
  Vec logits;
};

DecodeStep decode_step(std::span<const double> s_prev, int y_prev, const std::vector<Vec>& memory,
                       const ModelParams& p);

Vec softmax(std::span<const double> logits);
Vec log_softmax(std::span<const double> logits);
std::size_t argmax(std::span<const double> values);

// ---------------------------------------------------------------------------
// Loss and gradients

struct ForwardPass {
  MaskedInput input;
  std::vector<int> target;
  EncoderPass encoder;
  Vec s0;
  std::vector<Vec> memory;  // attention memory: H, optionally followed by W_memory s0
  std::vector<DecodeStep> steps;
  std::vector<Vec> probabilities;
  double loss = 0.0;
};

/// Teacher-forced cross-entropy averaged over non-<pad> target positions.
ForwardPass forward_loss(const MaskedInput& input, std::span<const int> target, const ModelParams& p);

struct Gradients {
  ModelParams params;
  Vec raw;  // d loss / d raw input value (0 at masked slots)
};

Gradients backward(const ForwardPass& pass, const ModelParams& p);
/// Adds this example's gradients into `grad` (which must be shaped like p).
void backward_into(const ForwardPass& pass, const ModelParams& p, ModelParams& grad, Vec* d_raw = nullptr);

/// Greedy argmax decoding from <sos> until <eos> or `max_len` tokens; <eos> is not returned.
std::vector<int> greedy_decode(const MaskedInput& input, const ModelParams& p, std::size_t max_len = 24);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  AdamConfig config;
  ModelParams first_moment;
  ModelParams second_moment;
  std::int64_t step = 0;

  static AdamState for_params(const ModelParams& p, const AdamConfig& config);
};

void adam_step(ModelParams& p, const ModelParams& grad, AdamState& state);

}  // namespace fexp
