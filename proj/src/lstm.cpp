#include "aidetect/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aidetect/error.hpp"
#include "aidetect/evaluation.hpp"

namespace aidetect {

namespace {

// Activations and states of one layer over `steps` positions.
struct LayerCache {
  std::vector<double> gates;  // steps x 4H, activated: i f o g
  std::vector<double> c;      // steps x H
  std::vector<double> tc;     // steps x H, tanh(c)
  std::vector<double> h;      // steps x H
};

struct StreamCache {
  std::size_t steps = 0;
  std::vector<double> emb;  // steps x E
  LayerCache layers[2];
};

struct SampleCache {
  StreamCache streams[2];
  std::vector<double> features;  // 2H, before dropout
  std::vector<double> mask;      // 2H, empty when dropout is off
  double logit = 0.0;
};

void layer_forward(const DualStreamLstmModel& m, const DualStreamLstmModel::LayerSlots& s, const double* input,
                   std::size_t steps, std::size_t in_dim, LayerCache& out) {
  const std::size_t H = m.hidden();
  const auto W = m.params.mat(s.w);
  const auto U = m.params.mat(s.u);
  const auto b = m.params.span(s.b);
  out.gates.assign(steps * 4 * H, 0.0);
  out.c.assign(steps * H, 0.0);
  out.tc.assign(steps * H, 0.0);
  out.h.assign(steps * H, 0.0);
  std::vector<double> a(4 * H);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* x = input + t * in_dim;
    const double* h_prev = t > 0 ? &out.h[(t - 1) * H] : nullptr;
    const double* c_prev = t > 0 ? &out.c[(t - 1) * H] : nullptr;
    for (std::size_t r = 0; r < 4 * H; ++r) {
      double acc = b[r];
      const auto wr = W.row(r);
      for (std::size_t k = 0; k < in_dim; ++k) acc += wr[k] * x[k];
      if (h_prev) {
        const auto ur = U.row(r);
        for (std::size_t k = 0; k < H; ++k) acc += ur[k] * h_prev[k];
      }
      a[r] = acc;
    }
    double* g = &out.gates[t * 4 * H];
    for (std::size_t j = 0; j < 3 * H; ++j) g[j] = sigmoid(a[j]);
    for (std::size_t j = 3 * H; j < 4 * H; ++j) g[j] = std::tanh(a[j]);
    for (std::size_t j = 0; j < H; ++j) {
      const double ig = g[j], fg = g[H + j], og = g[2 * H + j], cg = g[3 * H + j];
      const double c = (c_prev ? fg * c_prev[j] : 0.0) + ig * cg;
      out.c[t * H + j] = c;
      out.tc[t * H + j] = std::tanh(c);
      out.h[t * H + j] = og * out.tc[t * H + j];
    }
  }
}

// dh_out holds d(loss)/d(h_t) from above for every step; it is consumed.
void layer_backward(const DualStreamLstmModel& m, const DualStreamLstmModel::LayerSlots& s, const double* input,
                    std::size_t steps, std::size_t in_dim, const LayerCache& cache, std::vector<double>& dh_out,
                    std::vector<double>& grad, double* dinput) {
  const std::size_t H = m.hidden();
  const auto W = m.params.mat(s.w);
  const auto U = m.params.mat(s.u);
  auto dW = grad_mat(grad, m.params, s.w);
  auto dU = grad_mat(grad, m.params, s.u);
  auto db = grad_mat(grad, m.params, s.b).row(0);
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), da(4 * H);
  for (std::size_t t = steps; t-- > 0;) {
    const double* g = &cache.gates[t * 4 * H];
    for (std::size_t j = 0; j < H; ++j) {
      const double ig = g[j], fg = g[H + j], og = g[2 * H + j], cg = g[3 * H + j];
      const double tc = cache.tc[t * H + j];
      const double c_prev = t > 0 ? cache.c[(t - 1) * H + j] : 0.0;
      const double dh = dh_out[t * H + j] + dh_next[j];
      const double dc = dh * og * (1.0 - tc * tc) + dc_next[j];
      da[j] = dc * cg * ig * (1.0 - ig);
      da[H + j] = dc * c_prev * fg * (1.0 - fg);
      da[2 * H + j] = dh * tc * og * (1.0 - og);
      da[3 * H + j] = dc * ig * (1.0 - cg * cg);
      dc_next[j] = dc * fg;
    }
    const double* x = input + t * in_dim;
    const double* h_prev = t > 0 ? &cache.h[(t - 1) * H] : nullptr;
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double d = da[r];
      db[r] += d;
      const auto wr = W.row(r);
      auto dwr = dW.row(r);
      for (std::size_t k = 0; k < in_dim; ++k) dwr[k] += d * x[k];
      if (dinput) {
        double* dx = dinput + t * in_dim;
        for (std::size_t k = 0; k < in_dim; ++k) dx[k] += wr[k] * d;
      }
      if (h_prev) {
        const auto ur = U.row(r);
        auto dur = dU.row(r);
        for (std::size_t k = 0; k < H; ++k) {
          dur[k] += d * h_prev[k];
          dh_next[k] += ur[k] * d;
        }
      }
    }
  }
}

void check_lengths(const DualStreamLstmModel& m, const SequencePair& in) {
  if (in.uni.size() != m.max_len() || in.bi.size() != m.max_len()) {
    throw Error(ErrorKind::LengthMismatch, "sequence length " + std::to_string(in.uni.size()) + "/" +
                                               std::to_string(in.bi.size()) + " does not match max_len " +
                                               std::to_string(m.max_len()));
  }
}

void stream_forward(const DualStreamLstmModel& m, std::size_t emb_slot, const DualStreamLstmModel::LayerSlots* layers,
                    std::span<const int> seq, StreamCache& sc) {
  const std::size_t E = m.embed_dim();
  const auto table = m.params.mat(emb_slot);
  sc.steps = effective_length(seq);
  sc.emb.assign(sc.steps * E, 0.0);
  for (std::size_t t = 0; t < sc.steps; ++t) {
    const int idx = seq[t];
    if (idx < 0 || static_cast<std::size_t>(idx) >= table.rows) {
      throw Error(ErrorKind::IndexOutOfRange, "token index " + std::to_string(idx) + " outside embedding table");
    }
    const auto row = table.row(static_cast<std::size_t>(idx));
    std::copy(row.begin(), row.end(), sc.emb.begin() + static_cast<std::ptrdiff_t>(t * E));
  }
  layer_forward(m, layers[0], sc.emb.data(), sc.steps, E, sc.layers[0]);
  layer_forward(m, layers[1], sc.layers[0].h.data(), sc.steps, m.hidden(), sc.layers[1]);
}

void sample_forward(const DualStreamLstmModel& m, const SequencePair& in, bool training, Rng* rng, SampleCache& sc) {
  check_lengths(m, in);
  stream_forward(m, m.uni_embedding, m.uni_layers, in.uni, sc.streams[0]);
  stream_forward(m, m.bi_embedding, m.bi_layers, in.bi, sc.streams[1]);
  const std::size_t H = m.hidden();
  sc.features.assign(2 * H, 0.0);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& top = sc.streams[s].layers[1];
    std::copy_n(top.h.end() - static_cast<std::ptrdiff_t>(H), H, sc.features.begin() + static_cast<std::ptrdiff_t>(s * H));
  }
  sc.mask.clear();
  if (training && m.dropout() > 0.0) {
    if (!rng) throw Error(ErrorKind::BadConfig, "training forward with dropout needs an rng");
    const Tensor2 mask = dropout_mask(1, 2 * H, m.dropout(), *rng);
    sc.mask.assign(mask.values().begin(), mask.values().end());
  }
  const auto w = m.params.span(m.fc_w);
  double z = m.params.span(m.fc_b)[0];
  for (std::size_t k = 0; k < 2 * H; ++k) z += w[k] * (sc.mask.empty() ? sc.features[k] : sc.features[k] * sc.mask[k]);
  sc.logit = z;
}

void stream_backward(const DualStreamLstmModel& m, std::size_t emb_slot, const DualStreamLstmModel::LayerSlots* layers,
                     std::span<const int> seq, const StreamCache& sc, std::span<const double> dh_final,
                     std::vector<double>& grad) {
  const std::size_t H = m.hidden();
  const std::size_t E = m.embed_dim();
  std::vector<double> dh_top(sc.steps * H, 0.0);
  std::copy(dh_final.begin(), dh_final.end(), dh_top.end() - static_cast<std::ptrdiff_t>(H));
  std::vector<double> dh_low(sc.steps * H, 0.0);
  layer_backward(m, layers[1], sc.layers[0].h.data(), sc.steps, H, sc.layers[1], dh_top, grad, dh_low.data());
  std::vector<double> demb(sc.steps * E, 0.0);
  layer_backward(m, layers[0], sc.emb.data(), sc.steps, E, sc.layers[0], dh_low, grad, demb.data());
  auto dtable = grad_mat(grad, m.params, emb_slot);
  for (std::size_t t = 0; t < sc.steps; ++t) {
    auto row = dtable.row(static_cast<std::size_t>(seq[t]));
    for (std::size_t k = 0; k < E; ++k) row[k] += demb[t * E + k];
  }
}

// Propagates d(loss)/d(logit) into `grad`.
void sample_backward(const DualStreamLstmModel& m, const SequencePair& in, const SampleCache& sc, double dlogit,
                     std::vector<double>& grad) {
  const std::size_t H = m.hidden();
  const auto w = m.params.span(m.fc_w);
  auto dw = grad_mat(grad, m.params, m.fc_w).row(0);
  grad_mat(grad, m.params, m.fc_b)(0, 0) += dlogit;
  std::vector<double> dfeat(2 * H);
  for (std::size_t k = 0; k < 2 * H; ++k) {
    const double mk = sc.mask.empty() ? 1.0 : sc.mask[k];
    dw[k] += dlogit * sc.features[k] * mk;
    dfeat[k] = dlogit * w[k] * mk;
  }
  stream_backward(m, m.uni_embedding, m.uni_layers, in.uni, sc.streams[0], std::span(dfeat).first(H), grad);
  stream_backward(m, m.bi_embedding, m.bi_layers, in.bi, sc.streams[1], std::span(dfeat).subspan(H), grad);
}

void zero_padding_rows(const DualStreamLstmModel& m, std::vector<double>& grad) {
  for (std::size_t slot : {m.uni_embedding, m.bi_embedding}) {
    auto row = grad_mat(grad, m.params, slot).row(0);
    std::fill(row.begin(), row.end(), 0.0);
  }
}

double mean_loss(const DualStreamLstmModel& m, const LstmData& data) {
  std::vector<double> logits(data.sequences.size());
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = lstm_forward(m, data.sequences[i]);
  return bce_with_logits(logits, data.labels);
}

}  // namespace

Tokens bigram_tokens(const Tokens& tokens) {
  Tokens out;
  if (tokens.size() < 2) return out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.push_back(tokens[i] + " " + tokens[i + 1]);
  return out;
}

std::vector<int> build_bigram_sequence(const Tokens& tokens, const Vocabulary& bigram_vocab, std::size_t max_len) {
  return encode_sequence(bigram_tokens(tokens), bigram_vocab, max_len);
}

DualStreamLstmModel::DualStreamLstmModel(std::size_t uni_rows, std::size_t bi_rows, std::size_t embed_dim,
                                         std::size_t hidden, double dropout_p, std::size_t max_len)
    : embed_dim_(embed_dim), hidden_(hidden), dropout_(dropout_p), max_len_(max_len) {
  if (uni_rows < 2 || bi_rows < 2 || embed_dim == 0 || hidden == 0 || max_len == 0) {
    throw Error(ErrorKind::ShapeMismatch, "LSTM dimensions must be positive and tables hold pad + OOV rows");
  }
  uni_embedding = params.add("uni.embedding", uni_rows, embed_dim);
  bi_embedding = params.add("bi.embedding", bi_rows, embed_dim);
  for (const char* stream : {"uni", "bi"}) {
    auto* layers = std::string_view(stream) == "uni" ? uni_layers : bi_layers;
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string p = std::string(stream) + ".l" + std::to_string(l) + ".";
      const std::size_t in = l == 0 ? embed_dim : hidden;
      layers[l].w = params.add(p + "W", 4 * hidden, in);
      layers[l].u = params.add(p + "U", 4 * hidden, hidden);
      layers[l].b = params.add(p + "b", 1, 4 * hidden);
    }
  }
  fc_w = params.add("fc.w", 1, 2 * hidden);
  fc_b = params.add("fc.b", 1, 1);
}

void DualStreamLstmModel::initialize(Rng& rng) {
  for (std::size_t slot : {uni_embedding, bi_embedding}) {
    normal_fill(params.span(slot), 0.1, rng);
    auto pad = params.mat(slot).row(0);
    std::fill(pad.begin(), pad.end(), 0.0);
  }
  for (auto* layers : {uni_layers, bi_layers}) {
    for (std::size_t l = 0; l < 2; ++l) {
      const std::size_t in = l == 0 ? embed_dim_ : hidden_;
      glorot_uniform(params.span(layers[l].w), in, 4 * hidden_, rng);
      glorot_uniform(params.span(layers[l].u), hidden_, 4 * hidden_, rng);
      auto b = params.span(layers[l].b);
      std::fill(b.begin(), b.end(), 0.0);
    }
  }
  glorot_uniform(params.span(fc_w), 2 * hidden_, 1, rng);
  params.span(fc_b)[0] = 0.0;
}

std::size_t effective_length(std::span<const int> seq) {
  std::size_t len = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t] != Vocabulary::kPad) len = t + 1;
  }
  return std::max<std::size_t>(len, 1);
}

double lstm_forward(const DualStreamLstmModel& model, const SequencePair& input, bool training, Rng* rng) {
  SampleCache sc;
  sample_forward(model, input, training, rng, sc);
  return sc.logit;
}

double lstm_loss(const DualStreamLstmModel& model, std::span<const SequencePair> batch, std::span<const int> labels,
                 std::vector<double>* grad, bool training, Rng* rng) {
  if (batch.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "batch and labels differ in length");
  if (batch.empty()) throw Error(ErrorKind::EmptyTrainingSet, "empty batch");
  if (grad && grad->size() != model.params.size()) throw Error(ErrorKind::ShapeMismatch, "gradient size mismatch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  SampleCache sc;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    sample_forward(model, batch[i], training, rng, sc);
    total += bce_with_logits(sc.logit, labels[i]);
    if (grad) sample_backward(model, batch[i], sc, (sigmoid(sc.logit) - labels[i]) * inv_n, *grad);
  }
  return total * inv_n;
}

std::vector<double> lstm_gate_activations(const DualStreamLstmModel& model, const SequencePair& input) {
  SampleCache sc;
  sample_forward(model, input, false, nullptr, sc);
  std::vector<double> out;
  for (const auto& stream : sc.streams) {
    for (const auto& layer : stream.layers) out.insert(out.end(), layer.gates.begin(), layer.gates.end());
  }
  return out;
}

LstmTrainResult train_lstm(const LstmData& train, std::size_t uni_rows, std::size_t bi_rows,
                           const LstmConfig& config, std::optional<LstmData> valid) {
  if (train.sequences.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training sequences");
  if (train.sequences.size() != train.labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "sequences and labels differ in length");
  }
  if (config.batch_size == 0 || config.epochs < 1) throw Error(ErrorKind::BadConfig, "batch_size and epochs must be positive");

  Rng rng(config.seed);
  LstmTrainResult result{DualStreamLstmModel(uni_rows, bi_rows, config.embed_dim, config.hidden, config.dropout,
                                             config.max_len),
                         {}};
  auto& model = result.model;
  model.initialize(rng);

  AdamState adam(model.params.size(), config.lr);
  std::vector<std::size_t> order(train.sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<SequencePair> batch;
  std::vector<int> batch_labels;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(train.sequences[order[k]]);
        batch_labels.push_back(train.labels[order[k]]);
      }
      auto grad = model.params.zeros_like();
      const double loss = lstm_loss(model, batch, batch_labels, &grad, true, &rng);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "non-finite loss in epoch " + std::to_string(epoch));
      }
      weighted += loss * static_cast<double>(end - start);
      zero_padding_rows(model, grad);
      clip_grad_norm(grad, config.max_grad_norm);
      adam_step(adam, model.params.values(), grad);
    }
    const double train_loss = weighted / static_cast<double>(order.size());
    if (valid) {
      result.history.record(train_loss, mean_loss(model, *valid));
    } else {
      result.history.record(train_loss);
    }
  }
  return result;
}

std::vector<double> lstm_predict_proba(const DualStreamLstmModel& model, std::span<const SequencePair> inputs,
                                       Exec exec) {
  // Validate up front: nothing may throw inside the parallel loop.
  for (const auto& in : inputs) {
    check_lengths(model, in);
    for (auto [seq, rows] : {std::pair{&in.uni, model.uni_rows()}, std::pair{&in.bi, model.bi_rows()}}) {
      for (int idx : *seq) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= rows) {
          throw Error(ErrorKind::IndexOutOfRange, "token index " + std::to_string(idx) + " outside embedding table");
        }
      }
    }
  }
  std::vector<double> out(inputs.size());
  for_each_index(inputs.size(), exec, [&](std::size_t i) { out[i] = sigmoid(lstm_forward(model, inputs[i])); });
  return out;
}

double calibrate_threshold(DualStreamLstmModel& model, std::span<const double> scores, std::span<const int> labels) {
  const auto curve = roc_curve(scores, labels);
  model.threshold = youden_threshold(curve).threshold;
  return model.threshold;
}

}  // namespace aidetect
