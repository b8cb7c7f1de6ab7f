#include <cmath>

#include "aidetect/lstm.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aidetect;

namespace {

DualStreamLstmModel small_model(std::uint64_t seed, std::size_t max_len = 4, std::size_t E = 2, std::size_t H = 3) {
  DualStreamLstmModel m(6, 5, E, H, 0.0, max_len);
  Rng rng(seed);
  m.initialize(rng);
  // Non-zero biases so their gradients are exercised.
  for (double& v : m.params.span(m.fc_b)) v = 0.1;
  for (const auto* layers : {m.uni_layers, m.bi_layers}) {
    for (int l = 0; l < 2; ++l) {
      for (double& v : m.params.span(layers[l].b)) v = rng.normal(0.0, 0.2);
    }
  }
  return m;
}

SequencePair random_pair(Rng& rng, std::size_t max_len, std::size_t uni_rows, std::size_t bi_rows) {
  SequencePair p{std::vector<int>(max_len, 0), std::vector<int>(max_len, 0)};
  const std::size_t lu = 1 + rng.uniform_index(max_len);
  const std::size_t lb = rng.uniform_index(max_len + 1);
  for (std::size_t t = 0; t < lu; ++t) p.uni[t] = 1 + static_cast<int>(rng.uniform_index(uni_rows - 1));
  for (std::size_t t = 0; t < lb; ++t) p.bi[t] = 1 + static_cast<int>(rng.uniform_index(bi_rows - 1));
  return p;
}

std::vector<SequencePair> separable_sequences(std::size_t n, std::size_t max_len, std::vector<int>& labels) {
  // Label 1 documents use tokens 2..3, label 0 documents tokens 4..5.
  Rng rng(8);
  std::vector<SequencePair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    SequencePair p{std::vector<int>(max_len, 0), std::vector<int>(max_len, 0)};
    const std::size_t len = 2 + rng.uniform_index(max_len - 1);
    for (std::size_t t = 0; t < len; ++t) p.uni[t] = (y ? 2 : 4) + static_cast<int>(rng.uniform_index(2));
    for (std::size_t t = 0; t + 1 < len; ++t) p.bi[t] = y ? 2 : 3;
    out.push_back(std::move(p));
    labels.push_back(y);
  }
  return out;
}

}  // namespace

TEST_CASE("bigram sequences") {
  const Vocabulary bv({"a b"}, CleaningProfile::lstm());
  CHECK(bigram_tokens({"a", "b", "c"}) == Tokens{"a b", "b c"});
  CHECK(bigram_tokens({"a"}).empty());
  CHECK(build_bigram_sequence({"a", "b", "c"}, bv, 4) == std::vector<int>{2, 1, 0, 0});
  CHECK(build_bigram_sequence({"a"}, bv, 3) == std::vector<int>{0, 0, 0});
}

TEST_CASE("effective length") {
  CHECK(effective_length(std::vector<int>{0, 0, 0}) == 1);
  CHECK(effective_length(std::vector<int>{3, 1, 0}) == 2);
  CHECK(effective_length(std::vector<int>{3, 1, 2}) == 3);
}

TEST_CASE("all-zero parameters give the dense bias as logit") {
  DualStreamLstmModel m(6, 5, 2, 3, 0.3, 4);
  m.params.span(m.fc_b)[0] = 0.7;
  const SequencePair in{{2, 3, 0, 0}, {2, 0, 0, 0}};
  CHECK(lstm_forward(m, in) == 0.7);
  const SequencePair pad{{0, 0, 0, 0}, {0, 0, 0, 0}};
  CHECK(lstm_forward(m, pad) == 0.7);
  const auto p = lstm_predict_proba(m, std::vector<SequencePair>{in});
  CHECK(p[0] == doctest::Approx(sigmoid(0.7)));
}

TEST_CASE("gate activations stay in range") {
  DualStreamLstmModel m = small_model(3, 6);
  for (double& v : m.params.values()) v *= 20.0;
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_pair(rng, 6, 6, 5);
    const auto gates = lstm_gate_activations(m, in);
    const std::size_t H = m.hidden();
    REQUIRE(gates.size() % (4 * H) == 0);
    for (std::size_t k = 0; k < gates.size(); ++k) {
      const std::size_t pos = k % (4 * H);
      if (pos < 3 * H) {
        CHECK(gates[k] >= 0.0);
        CHECK(gates[k] <= 1.0);
      } else {
        CHECK(gates[k] >= -1.0);
        CHECK(gates[k] <= 1.0);
      }
    }
  }
}

TEST_CASE("trailing padding does not change the output") {
  const DualStreamLstmModel short_m = small_model(5, 4);
  DualStreamLstmModel long_m(6, 5, 2, 3, 0.0, 9);
  long_m.params.values() = short_m.params.values();
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_pair(rng, 4, 6, 5);
    SequencePair padded = in;
    padded.uni.resize(9, 0);
    padded.bi.resize(9, 0);
    CHECK(lstm_forward(short_m, in) == lstm_forward(long_m, padded));
  }
}

TEST_CASE("backpropagation through time matches finite differences") {
  // Weights of order one keep every coordinate's gradient well above the
  // round-off floor of the central difference.
  DualStreamLstmModel base = small_model(7);
  Rng rng(9);
  for (double& v : base.params.values()) v = rng.normal(0.0, 0.6);
  std::vector<SequencePair> batch;
  std::vector<int> labels;
  for (int i = 0; i < 3; ++i) {
    batch.push_back(random_pair(rng, 4, 6, 5));
    labels.push_back(i % 2);
  }
  const LossFn loss = [&](std::span<const double> p) {
    DualStreamLstmModel m = base;
    m.params.values().assign(p.begin(), p.end());
    return lstm_loss(m, batch, labels, nullptr);
  };
  const GradFn grad = [&](std::span<const double> p) {
    DualStreamLstmModel m = base;
    m.params.values().assign(p.begin(), p.end());
    std::vector<double> g = m.params.zeros_like();
    lstm_loss(m, batch, labels, &g);
    return g;
  };
  const auto r = grad_check(loss, grad, base.params.values(), 3e-5);
  std::string where;
  for (const auto& s : base.params.slots()) {
    if (r.worst_index >= s.offset && r.worst_index < s.offset + s.size()) where = s.name;
  }
  CHECK_MESSAGE(r.max_rel_error <= 1e-5, where << " index " << r.worst_index << " analytic " << r.analytic
                                                << " numeric " << r.numeric);
}

TEST_CASE("input validation") {
  const DualStreamLstmModel m = small_model(1);
  CHECK_THROWS_KIND(lstm_forward(m, SequencePair{{2, 0, 0}, {0, 0, 0, 0}}), ErrorKind::LengthMismatch);
  CHECK_THROWS_KIND(lstm_forward(m, SequencePair{{2, 9, 0, 0}, {0, 0, 0, 0}}), ErrorKind::IndexOutOfRange);
  const std::vector<SequencePair> bad = {SequencePair{{2, 0, 0, 0}, {7, 0, 0, 0}}};
  CHECK_THROWS_KIND(lstm_predict_proba(m, bad), ErrorKind::IndexOutOfRange);
  CHECK_THROWS_KIND(DualStreamLstmModel(1, 5, 2, 3, 0.0, 4), ErrorKind::ShapeMismatch);
}

TEST_CASE("training is deterministic and leaves padding rows at zero") {
  std::vector<int> labels;
  const auto seqs = separable_sequences(16, 6, labels);
  LstmConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden = 4;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.max_len = 6;
  const auto a = train_lstm({seqs, labels}, 6, 5, cfg, LstmData{seqs, labels});
  const auto b = train_lstm({seqs, labels}, 6, 5, cfg, LstmData{seqs, labels});
  CHECK(a.model.params == b.model.params);
  CHECK(a.history == b.history);
  CHECK(a.history.epochs.size() == 3);
  CHECK(a.history.epochs[0].has_valid);
  for (std::size_t slot : {a.model.uni_embedding, a.model.bi_embedding}) {
    for (double v : a.model.params.mat(slot).row(0)) CHECK(v == 0.0);
  }
  CHECK(lstm_predict_proba(a.model, seqs, Exec::Serial) == lstm_predict_proba(a.model, seqs, Exec::Parallel));
}

TEST_CASE("training reduces the loss on separable sequences") {
  std::vector<int> labels;
  const auto seqs = separable_sequences(16, 6, labels);
  LstmConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden = 4;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.max_len = 6;
  cfg.lr = 0.01;
  cfg.dropout = 0.0;
  const auto r = train_lstm({seqs, labels}, 6, 5, cfg);
  CHECK(r.history.epochs.back().train_loss < 0.5 * r.history.epochs.front().train_loss);
}

TEST_CASE("threshold calibration") {
  DualStreamLstmModel m = small_model(2);
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> labels = {0, 0, 1, 1};
  const double t = calibrate_threshold(m, scores, labels);
  CHECK(m.threshold == t);
  // J is 0.5 at both cut 0.8 and cut 0.35; the smaller FPR wins, so the
  // threshold is the midpoint of 0.8 and 0.4.
  CHECK(t == doctest::Approx(0.6));

  const std::vector<double> sep = {0.2, 0.3, 0.7, 0.9};
  CHECK(calibrate_threshold(m, sep, labels) == doctest::Approx(0.5));
  CHECK_THROWS_KIND(calibrate_threshold(m, sep, std::vector<int>{1, 1, 1, 1}), ErrorKind::SingleClass);
}
