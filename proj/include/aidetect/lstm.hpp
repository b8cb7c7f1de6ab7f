#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aidetect/kernels.hpp"
#include "aidetect/numerics.hpp"
#include "aidetect/text_features.hpp"

namespace aidetect {

struct LstmConfig {
  std::size_t embed_dim = 64;
  std::size_t hidden = 64;
  double lr = 1e-3;
  int epochs = 40;
  std::size_t batch_size = 32;
  double dropout = 0.3;
  std::uint64_t seed = 42;
  std::size_t max_len = 128;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

/// Unigram and bigram index sequences for one document, both max_len long.
struct SequencePair {
  std::vector<int> uni;
  std::vector<int> bi;
};

/// Bigram-vocabulary indices over consecutive token pairs (unknown -> 1),
/// truncated / zero-padded to max_len.
std::vector<int> build_bigram_sequence(const Tokens& tokens, const Vocabulary& bigram_vocab, std::size_t max_len);

/// Bigram "tokens" of a token list (pairs joined by a space), used to build
/// the bigram vocabulary.
Tokens bigram_tokens(const Tokens& tokens);

/// Two embedding tables, each feeding two stacked LSTM layers; the top-layer
/// hidden states at each stream's last non-padding position are concatenated,
/// passed through dropout and a dense layer to a single logit.
///
/// Each layer stores its four gates stacked in rows of W [4H x D], U [4H x H]
/// and b [1 x 4H], in the order input, forget, output, candidate.
class DualStreamLstmModel {
 public:
  struct LayerSlots {
    std::size_t w, u, b;
  };

  DualStreamLstmModel() = default;
  DualStreamLstmModel(std::size_t uni_rows, std::size_t bi_rows, std::size_t embed_dim, std::size_t hidden,
                      double dropout_p, std::size_t max_len);

  /// Glorot-uniform weights, zero biases, N(0, 0.1) embeddings with a zero
  /// padding row. Draw order: uni embedding, bi embedding, then per stream and
  /// layer W then U, then the dense weights.
  void initialize(Rng& rng);

  std::size_t embed_dim() const noexcept { return embed_dim_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t max_len() const noexcept { return max_len_; }
  double dropout() const noexcept { return dropout_; }
  std::size_t uni_rows() const { return params.slot(uni_embedding).rows; }
  std::size_t bi_rows() const { return params.slot(bi_embedding).rows; }

  ParameterSet params;
  double threshold = 0.5;

  std::size_t uni_embedding = 0;
  std::size_t bi_embedding = 0;
  LayerSlots uni_layers[2]{};
  LayerSlots bi_layers[2]{};
  std::size_t fc_w = 0;
  std::size_t fc_b = 0;

 private:
  std::size_t embed_dim_ = 0;
  std::size_t hidden_ = 0;
  double dropout_ = 0.0;
  std::size_t max_len_ = 0;
};

/// Number of positions the recurrence runs over: one past the last non-zero
/// index, at least 1.
std::size_t effective_length(std::span<const int> seq);

/// Raw logit; dropout is applied only when `training` (then `rng` is required).
/// Throws LengthMismatch when a sequence is not max_len long.
double lstm_forward(const DualStreamLstmModel& model, const SequencePair& input, bool training = false,
                    Rng* rng = nullptr);

/// Mean BCE-with-logits over the batch; accumulates d(loss)/d(params) into
/// `grad` when non-null (grad must be sized like model.params).
double lstm_loss(const DualStreamLstmModel& model, std::span<const SequencePair> batch, std::span<const int> labels,
                 std::vector<double>* grad, bool training = false, Rng* rng = nullptr);

/// Gate activations of every layer and step, grouped per step as
/// [i | f | o | candidate] (4H values), streams and layers in model order.
std::vector<double> lstm_gate_activations(const DualStreamLstmModel& model, const SequencePair& input);

struct LstmTrainResult {
  DualStreamLstmModel model;
  LossHistory history;
};

struct LstmData {
  std::span<const SequencePair> sequences;
  std::span<const int> labels;
};

/// Adam on mean BCE-with-logits. The padding rows of both embedding tables get
/// no updates. Rng draw order: initialization, then per epoch one shuffle
/// followed by the dropout masks of each sample in batch order.
LstmTrainResult train_lstm(const LstmData& train, std::size_t uni_rows, std::size_t bi_rows,
                           const LstmConfig& config, std::optional<LstmData> valid = std::nullopt);

std::vector<double> lstm_predict_proba(const DualStreamLstmModel& model, std::span<const SequencePair> inputs,
                                       Exec exec = Exec::Parallel);

/// Youden threshold from validation scores, stored into the model. Throws
/// SingleClass when the validation labels contain only one class.
double calibrate_threshold(DualStreamLstmModel& model, std::span<const double> scores, std::span<const int> labels);

}  // namespace aidetect
