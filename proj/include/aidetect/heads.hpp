#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aidetect/kernels.hpp"
#include "aidetect/numerics.hpp"

namespace aidetect {

enum class HeadKind { BertNgram, BertCustom, DistilbertHead };

/// "bert-ngram", "bert-custom", "distilbert-head".
std::string_view to_string(HeadKind kind);
std::optional<HeadKind> parse_head_kind(std::string_view name);

struct HeadConfig {
  double lr = 1e-3;
  int epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  bool relu_on_logits = true;  // BertNgram only
  std::size_t hidden = 512;    // BertCustom intermediate width
};

/// Two-logit classifier over a frozen encoder vector.
///
///   BertNgram:      [embedding | n-gram counts] -> dense -> 2 (ReLU on the
///                   logits when relu_on_logits)
///   BertCustom:     dropout 0.1 -> dense D->hidden -> ReLU -> dense -> 2
///   DistilbertHead: dense D->D -> ReLU -> dropout 0.2 -> dense -> 2
struct HeadModel {
  HeadKind kind = HeadKind::DistilbertHead;
  std::size_t input_dim = 0;
  std::size_t ngram_dim = 0;
  std::size_t hidden = 0;  // 0 for BertNgram
  double dropout_p = 0.0;
  bool relu_on_logits = false;
  ParameterSet params;
  /// Unset: label is the argmax of the logits with ties going to AI.
  std::optional<double> threshold;
  std::string embedding_model_id;

  /// Zero-valued parameters. `hidden` is only used by BertCustom; the
  /// DistilbertHead hidden width is the input width.
  static HeadModel create(HeadKind kind, std::size_t input_dim, std::size_t ngram_dim = 0, std::size_t hidden = 512,
                          bool relu_on_logits = true);

  /// Glorot-uniform weights (slot order), zero biases.
  void initialize(Rng& rng);

  bool expects_ngrams() const noexcept { return kind == HeadKind::BertNgram; }
};

struct HeadInputs {
  const Tensor2& embeddings;
  const Tensor2* ngrams = nullptr;
};

/// Mean softmax cross-entropy; fills `grad` (laid out like model.params) when
/// non-null. Dropout only when `training`.
double head_loss(const HeadModel& model, const HeadInputs& inputs, std::span<const int> labels,
                 std::vector<double>* grad, bool training = false, Rng* rng = nullptr);

/// Raw logits, n x 2, evaluation mode.
Tensor2 head_logits(const HeadModel& model, const HeadInputs& inputs, Exec exec = Exec::Parallel);
/// Softmax of the logits, n x 2 (column 1 is AI).
Tensor2 head_forward(const HeadModel& model, const HeadInputs& inputs, Exec exec = Exec::Parallel);

struct HeadPrediction {
  std::vector<double> scores;  // P(AI)
  std::vector<int> labels;
};
HeadPrediction head_predict(const HeadModel& model, const HeadInputs& inputs, Exec exec = Exec::Parallel);

struct HeadTrainResult {
  HeadModel model;
  LossHistory history;
};

struct HeadData {
  HeadInputs inputs;
  std::span<const int> labels;
};

/// Adam on softmax cross-entropy. Rng draw order: initialization, then per
/// epoch one shuffle followed by each batch's dropout mask.
HeadTrainResult train_head(HeadKind kind, const HeadData& train, const HeadConfig& config,
                           std::optional<HeadData> valid = std::nullopt);

}  // namespace aidetect
