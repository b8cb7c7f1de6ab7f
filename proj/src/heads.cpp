#include "aidetect/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aidetect/error.hpp"

namespace aidetect {

namespace {

constexpr double kBertCustomDropout = 0.1;
constexpr double kDistilbertDropout = 0.2;

// Slots: 0 = first weight, 1 = first bias, 2/3 = second layer (two-layer kinds).
struct Pass {
  Tensor2 input;   // after concat / input dropout
  Tensor2 in_mask;
  Tensor2 h_pre;
  Tensor2 h;       // after ReLU (and dropout for DistilbertHead)
  Tensor2 h_mask;
  Tensor2 z_pre;   // logits before the optional ReLU
  Tensor2 logits;
};

ConstMatrixView weights(const HeadModel& m, std::size_t slot) { return m.params.mat(slot); }
std::span<const double> bias(const HeadModel& m, std::size_t slot) { return m.params.span(slot); }

void check_inputs(const HeadModel& m, const HeadInputs& in) {
  if (in.embeddings.cols() != m.input_dim) {
    throw Error(ErrorKind::WidthMismatch, "embedding width " + std::to_string(in.embeddings.cols()) +
                                              " does not match head input " + std::to_string(m.input_dim));
  }
  if (m.expects_ngrams()) {
    if (!in.ngrams) throw Error(ErrorKind::MissingNgramFeatures, "bert-ngram head needs n-gram features");
    if (in.ngrams->cols() != m.ngram_dim) {
      throw Error(ErrorKind::WidthMismatch, "n-gram width " + std::to_string(in.ngrams->cols()) +
                                                " does not match head " + std::to_string(m.ngram_dim));
    }
    if (in.ngrams->rows() != in.embeddings.rows()) {
      throw Error(ErrorKind::RowMismatch, "n-gram rows differ from embedding rows");
    }
  }
}

void apply_mask(Tensor2& t, const Tensor2& mask) {
  auto v = t.values();
  const auto mv = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mv[i];
}

void relu_inplace(Tensor2& t) {
  for (double& v : t.values()) v = relu(v);
}

Pass forward(const HeadModel& m, const HeadInputs& in, bool training, Rng* rng, Exec exec) {
  check_inputs(m, in);
  const std::size_t n = in.embeddings.rows();
  Pass p;
  if (m.expects_ngrams()) {
    p.input = Tensor2(n, m.input_dim + m.ngram_dim);
    for (std::size_t r = 0; r < n; ++r) {
      auto dst = p.input.row(r);
      const auto e = in.embeddings.row(r);
      const auto g = in.ngrams->row(r);
      std::copy(e.begin(), e.end(), dst.begin());
      std::copy(g.begin(), g.end(), dst.begin() + static_cast<std::ptrdiff_t>(m.input_dim));
    }
  } else {
    p.input = in.embeddings;
  }
  const bool dropout = training && m.dropout_p > 0.0;
  if (dropout && !rng) throw Error(ErrorKind::BadConfig, "training forward with dropout needs an rng");

  switch (m.kind) {
    case HeadKind::BertNgram:
      p.z_pre = Tensor2(n, 2);
      kernels::gemm_nt(exec, p.input.view(), weights(m, 0), p.z_pre.view(), bias(m, 1));
      p.logits = p.z_pre;
      if (m.relu_on_logits) relu_inplace(p.logits);
      break;
    case HeadKind::BertCustom:
      if (dropout) {
        p.in_mask = dropout_mask(n, m.input_dim, m.dropout_p, *rng);
        apply_mask(p.input, p.in_mask);
      }
      p.h_pre = Tensor2(n, m.hidden);
      kernels::gemm_nt(exec, p.input.view(), weights(m, 0), p.h_pre.view(), bias(m, 1));
      p.h = p.h_pre;
      relu_inplace(p.h);
      p.logits = Tensor2(n, 2);
      kernels::gemm_nt(exec, p.h.view(), weights(m, 2), p.logits.view(), bias(m, 3));
      break;
    case HeadKind::DistilbertHead:
      p.h_pre = Tensor2(n, m.hidden);
      kernels::gemm_nt(exec, p.input.view(), weights(m, 0), p.h_pre.view(), bias(m, 1));
      p.h = p.h_pre;
      relu_inplace(p.h);
      if (dropout) {
        p.h_mask = dropout_mask(n, m.hidden, m.dropout_p, *rng);
        apply_mask(p.h, p.h_mask);
      }
      p.logits = Tensor2(n, 2);
      kernels::gemm_nt(exec, p.h.view(), weights(m, 2), p.logits.view(), bias(m, 3));
      break;
  }
  return p;
}

void add_column_sums(const Tensor2& d, std::span<double> out) {
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const auto row = d.row(r);
    for (std::size_t c = 0; c < d.cols(); ++c) out[c] += row[c];
  }
}

void backward(const HeadModel& m, const Pass& p, Tensor2 dlogits, std::vector<double>& grad) {
  const Exec exec = Exec::Serial;
  auto g = [&](std::size_t slot) { return grad_mat(grad, m.params, slot); };
  if (m.kind == HeadKind::BertNgram) {
    if (m.relu_on_logits) {
      // Subgradient 0 at z = 0.
      for (std::size_t i = 0; i < dlogits.size(); ++i) {
        if (!(p.z_pre.values()[i] > 0.0)) dlogits.values()[i] = 0.0;
      }
    }
    kernels::gemm_tn_acc(exec, dlogits.view(), p.input.view(), g(0));
    add_column_sums(dlogits, g(1).row(0));
    return;
  }
  kernels::gemm_tn_acc(exec, dlogits.view(), p.h.view(), g(2));
  add_column_sums(dlogits, g(3).row(0));
  Tensor2 dh(dlogits.rows(), m.hidden);
  kernels::gemm_nn(exec, dlogits.view(), weights(m, 2), dh.view());
  if (!p.h_mask.empty()) apply_mask(dh, p.h_mask);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    if (!(p.h_pre.values()[i] > 0.0)) dh.values()[i] = 0.0;
  }
  kernels::gemm_tn_acc(exec, dh.view(), p.input.view(), g(0));
  add_column_sums(dh, g(1).row(0));
}

double loss_and_dlogits(const Tensor2& logits, std::span<const int> labels, Tensor2* dlogits) {
  const std::size_t n = logits.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  if (dlogits) *dlogits = Tensor2(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    const auto z = logits.row(r);
    const int y = labels[r];
    if (y != 0 && y != 1) throw Error(ErrorKind::InvalidLabel, "head labels must be 0 or 1");
    const double mx = std::max(z[0], z[1]);
    const double lse = mx + std::log(std::exp(z[0] - mx) + std::exp(z[1] - mx));
    total += lse - z[static_cast<std::size_t>(y)];
    if (dlogits) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double pc = std::exp(z[c] - lse);
        (*dlogits)(r, c) = (pc - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_n;
      }
    }
  }
  return total * inv_n;
}

Tensor2 gather_rows(const Tensor2& src, std::span<const std::size_t> idx) {
  Tensor2 out(idx.size(), src.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto row = src.row(idx[k]);
    std::copy(row.begin(), row.end(), out.row(k).begin());
  }
  return out;
}

}  // namespace

std::string_view to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::BertNgram:
      return "bert-ngram";
    case HeadKind::BertCustom:
      return "bert-custom";
    case HeadKind::DistilbertHead:
      return "distilbert-head";
  }
  return "unknown";
}

std::optional<HeadKind> parse_head_kind(std::string_view name) {
  for (HeadKind k : {HeadKind::BertNgram, HeadKind::BertCustom, HeadKind::DistilbertHead}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

HeadModel HeadModel::create(HeadKind kind, std::size_t input_dim, std::size_t ngram_dim, std::size_t hidden,
                            bool relu_on_logits) {
  if (input_dim == 0) throw Error(ErrorKind::ShapeMismatch, "head input width must be positive");
  HeadModel m;
  m.kind = kind;
  m.input_dim = input_dim;
  switch (kind) {
    case HeadKind::BertNgram:
      m.ngram_dim = ngram_dim;
      m.relu_on_logits = relu_on_logits;
      m.params.add("dense.weight", 2, input_dim + ngram_dim);
      m.params.add("dense.bias", 1, 2);
      break;
    case HeadKind::BertCustom:
      if (hidden == 0) throw Error(ErrorKind::ShapeMismatch, "head hidden width must be positive");
      m.hidden = hidden;
      m.dropout_p = kBertCustomDropout;
      m.params.add("dense1.weight", hidden, input_dim);
      m.params.add("dense1.bias", 1, hidden);
      m.params.add("dense2.weight", 2, hidden);
      m.params.add("dense2.bias", 1, 2);
      break;
    case HeadKind::DistilbertHead:
      m.hidden = input_dim;
      m.dropout_p = kDistilbertDropout;
      m.params.add("pre_classifier.weight", input_dim, input_dim);
      m.params.add("pre_classifier.bias", 1, input_dim);
      m.params.add("classifier.weight", 2, input_dim);
      m.params.add("classifier.bias", 1, 2);
      break;
  }
  return m;
}

void HeadModel::initialize(Rng& rng) {
  for (std::size_t id = 0; id < params.slot_count(); id += 2) {
    const auto& s = params.slot(id);
    glorot_uniform(params.span(id), s.cols, s.rows, rng);
    auto b = params.span(id + 1);
    std::fill(b.begin(), b.end(), 0.0);
  }
}

double head_loss(const HeadModel& model, const HeadInputs& inputs, std::span<const int> labels,
                 std::vector<double>* grad, bool training, Rng* rng) {
  if (inputs.embeddings.rows() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "embedding rows and labels differ");
  }
  if (labels.empty()) throw Error(ErrorKind::EmptyTrainingSet, "empty batch");
  if (grad && grad->size() != model.params.size()) throw Error(ErrorKind::ShapeMismatch, "gradient size mismatch");
  const Pass p = forward(model, inputs, training, rng, Exec::Serial);
  Tensor2 dlogits;
  const double loss = loss_and_dlogits(p.logits, labels, grad ? &dlogits : nullptr);
  if (grad) backward(model, p, std::move(dlogits), *grad);
  return loss;
}

Tensor2 head_logits(const HeadModel& model, const HeadInputs& inputs, Exec exec) {
  return forward(model, inputs, false, nullptr, exec).logits;
}

Tensor2 head_forward(const HeadModel& model, const HeadInputs& inputs, Exec exec) {
  return softmax_rows(head_logits(model, inputs, exec));
}

HeadPrediction head_predict(const HeadModel& model, const HeadInputs& inputs, Exec exec) {
  const Tensor2 logits = head_logits(model, inputs, exec);
  const Tensor2 probs = softmax_rows(logits);
  HeadPrediction out;
  out.scores.resize(logits.rows());
  out.labels.resize(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    out.scores[r] = probs(r, 1);
    out.labels[r] = model.threshold ? (probs(r, 1) >= *model.threshold ? 1 : 0) : (logits(r, 1) >= logits(r, 0) ? 1 : 0);
  }
  return out;
}

HeadTrainResult train_head(HeadKind kind, const HeadData& train, const HeadConfig& config,
                           std::optional<HeadData> valid) {
  const Tensor2& x = train.inputs.embeddings;
  if (x.rows() == 0) throw Error(ErrorKind::EmptyTrainingSet, "head training needs rows");
  if (x.rows() != train.labels.size()) throw Error(ErrorKind::LengthMismatch, "embedding rows and labels differ");
  if (config.batch_size == 0 || config.epochs < 1) throw Error(ErrorKind::BadConfig, "batch_size and epochs must be positive");
  const std::size_t ngram_dim = kind == HeadKind::BertNgram && train.inputs.ngrams ? train.inputs.ngrams->cols() : 0;
  if (kind == HeadKind::BertNgram && !train.inputs.ngrams) {
    throw Error(ErrorKind::MissingNgramFeatures, "bert-ngram head needs n-gram features");
  }

  Rng rng(config.seed);
  HeadTrainResult result{HeadModel::create(kind, x.cols(), ngram_dim, config.hidden, config.relu_on_logits), {}};
  auto& model = result.model;
  model.initialize(rng);
  check_inputs(model, train.inputs);
  if (valid) check_inputs(model, valid->inputs);

  AdamState adam(model.params.size(), config.lr);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> yb;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Tensor2 xb = gather_rows(x, idx);
      Tensor2 nb;
      if (train.inputs.ngrams) nb = gather_rows(*train.inputs.ngrams, idx);
      yb.clear();
      for (std::size_t i : idx) yb.push_back(train.labels[i]);
      auto grad = model.params.zeros_like();
      const double loss =
          head_loss(model, HeadInputs{xb, train.inputs.ngrams ? &nb : nullptr}, yb, &grad, true, &rng);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "non-finite loss in epoch " + std::to_string(epoch));
      }
      weighted += loss * static_cast<double>(idx.size());
      adam_step(adam, model.params.values(), grad);
    }
    const double train_loss = weighted / static_cast<double>(order.size());
    if (valid) {
      result.history.record(train_loss, head_loss(model, valid->inputs, valid->labels, nullptr));
    } else {
      result.history.record(train_loss);
    }
  }
  return result;
}

}  // namespace aidetect
