#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aidetect/kernels.hpp"
#include "aidetect/numerics.hpp"
#include "aidetect/text_features.hpp"

namespace aidetect {

struct LogRegConfig {
  double lr = 0.05;
  int epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double l2 = 0.0;
};

/// Linear layer + sigmoid over standardized features.
struct LogRegModel {
  ParameterSet params;  // "weight" [1 x F], "bias" [1 x 1]
  double threshold = 0.5;
  ScalerStats scaler;
  std::vector<std::string> feature_fingerprints;

  static LogRegModel zeros(std::size_t width);

  std::size_t width() const { return params.slot(0).cols; }
  std::span<const double> weights() const { return params.span(0); }
  double bias() const { return params.values().back(); }
};

struct LogRegTrainResult {
  LogRegModel model;
  LossHistory history;
};

struct LabeledMatrix {
  const FeatureMatrix& features;
  std::span<const int> labels;
};

/// Mean BCE of sigmoid(w.x + b) plus (l2/2)|w|^2; fills `grad` (same layout as
/// the parameter vector) when non-null.
double logreg_loss(std::span<const double> params, ConstMatrixView x, std::span<const int> labels, double l2,
                   std::vector<double>* grad = nullptr);

/// Mini-batch SGD from zero weights; batches come from a seeded shuffle each
/// epoch. Throws EmptyTrainingSet / NonFiniteLoss / WidthMismatch.
LogRegTrainResult train_logreg(const LabeledMatrix& train, const LogRegConfig& config,
                               std::optional<LabeledMatrix> valid = std::nullopt);

std::vector<double> predict_proba(const LogRegModel& model, const FeatureMatrix& features,
                                  Exec exec = Exec::Parallel);
/// score >= threshold -> 1 (AI).
std::vector<int> predict(const LogRegModel& model, const FeatureMatrix& features, Exec exec = Exec::Parallel);

}  // namespace aidetect
