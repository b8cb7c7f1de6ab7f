#include "aidetect/logreg.hpp"

#include <cmath>
#include <numeric>

#include "aidetect/error.hpp"

namespace aidetect {

LogRegModel LogRegModel::zeros(std::size_t width) {
  LogRegModel m;
  m.params.add("weight", 1, width);
  m.params.add("bias", 1, 1);
  return m;
}

double logreg_loss(std::span<const double> params, ConstMatrixView x, std::span<const int> labels, double l2,
                   std::vector<double>* grad) {
  const std::size_t width = x.cols;
  if (params.size() != width + 1) throw Error(ErrorKind::WidthMismatch, "parameter vector does not match features");
  if (x.rows != labels.size()) throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ");
  const auto w = params.first(width);
  const double b = params[width];
  if (grad) grad->assign(width + 1, 0.0);
  const double n = static_cast<double>(x.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    double z = b;
    for (std::size_t j = 0; j < width; ++j) z += w[j] * row[j];
    loss += bce_with_logits(z, labels[i]);
    if (grad) {
      const double dz = (sigmoid(z) - static_cast<double>(labels[i])) / n;
      for (std::size_t j = 0; j < width; ++j) (*grad)[j] += dz * row[j];
      (*grad)[width] += dz;
    }
  }
  loss /= n;
  if (l2 > 0.0) {
    double sq = 0.0;
    for (std::size_t j = 0; j < width; ++j) sq += w[j] * w[j];
    loss += 0.5 * l2 * sq;
    if (grad) {
      for (std::size_t j = 0; j < width; ++j) (*grad)[j] += l2 * w[j];
    }
  }
  return loss;
}

LogRegTrainResult train_logreg(const LabeledMatrix& train, const LogRegConfig& config,
                               std::optional<LabeledMatrix> valid) {
  const auto& x = train.features.data;
  if (x.rows() == 0) throw Error(ErrorKind::EmptyTrainingSet, "logistic regression needs training rows");
  if (x.rows() != train.labels.size()) throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ");
  if (valid && valid->features.cols() != x.cols()) {
    throw Error(ErrorKind::WidthMismatch, "validation features differ in width from training features");
  }
  LogRegTrainResult result{LogRegModel::zeros(x.cols()), {}};
  auto& params = result.model.params.values();
  Rng rng(config.seed);
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Tensor2 xb;
  std::vector<int> yb;
  std::vector<double> grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      xb = Tensor2(end - start, x.cols());
      yb.assign(end - start, 0);
      for (std::size_t k = start; k < end; ++k) {
        const auto src = x.row(order[k]);
        std::copy(src.begin(), src.end(), xb.row(k - start).begin());
        yb[k - start] = train.labels[order[k]];
      }
      const double loss = logreg_loss(params, xb.view(), yb, config.l2, &grad);
      if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "epoch " + std::to_string(epoch + 1));
      epoch_loss += loss * static_cast<double>(end - start);
      sgd_step(params, grad, config.lr);
    }
    epoch_loss /= static_cast<double>(order.size());
    if (valid) {
      result.history.record(epoch_loss, logreg_loss(params, valid->features.data.view(), valid->labels, config.l2));
    } else {
      result.history.record(epoch_loss);
    }
  }
  return result;
}

std::vector<double> predict_proba(const LogRegModel& model, const FeatureMatrix& features, Exec exec) {
  if (features.cols() != model.width()) {
    throw Error(ErrorKind::WidthMismatch, "model expects " + std::to_string(model.width()) + " features, got " +
                                              std::to_string(features.cols()));
  }
  std::vector<double> z(features.rows());
  const ConstMatrixView w{model.weights().data(), 1, model.width()};
  // z = X w^T + b, computed as one gemm so rows spread over threads.
  kernels::gemm_nt(exec, features.data.view(), w, MatrixView{z.data(), z.size(), 1},
                   std::span<const double>(&model.params.values().back(), 1));
  for (double& v : z) v = sigmoid(v);
  return z;
}

std::vector<int> predict(const LogRegModel& model, const FeatureMatrix& features, Exec exec) {
  const auto scores = predict_proba(model, features, exec);
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= model.threshold ? 1 : 0;
  return labels;
}

}  // namespace aidetect
