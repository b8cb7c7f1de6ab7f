#include <cmath>
#include <cstring>

#include "aidetect/evaluation.hpp"
#include "aidetect/heads.hpp"
#include "doctest.h"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace aidetect;

namespace {

constexpr HeadKind kAllKinds[] = {HeadKind::BertNgram, HeadKind::BertCustom, HeadKind::DistilbertHead};

struct Fixture {
  Tensor2 emb;
  Tensor2 ngrams;
  std::vector<int> labels;
};

// n rows; class means differ by `separation` along axis 0.
Fixture gaussian_fixture(std::size_t n, std::size_t dim, std::size_t ngram_dim, double separation,
                         std::uint64_t seed) {
  Rng rng(seed);
  Fixture f{Tensor2(n, dim), Tensor2(n, ngram_dim), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    f.labels[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < dim; ++j) {
      f.emb(i, j) = rng.normal(0.0, 1.0) + (j == 0 ? (f.labels[i] ? 0.5 : -0.5) * separation : 0.0);
    }
    for (std::size_t j = 0; j < ngram_dim; ++j) f.ngrams(i, j) = static_cast<double>(rng.uniform_index(3));
  }
  return f;
}

HeadInputs inputs_for(HeadKind kind, const Fixture& f) {
  return {f.emb, kind == HeadKind::BertNgram ? &f.ngrams : nullptr};
}

HeadModel random_model(HeadKind kind, std::size_t dim, std::size_t ngram_dim, std::uint64_t seed, bool relu) {
  HeadModel m = HeadModel::create(kind, dim, kind == HeadKind::BertNgram ? ngram_dim : 0, 5, relu);
  Rng rng(seed);
  for (double& v : m.params.values()) v = rng.normal(0.0, 0.5);
  return m;
}

}  // namespace

TEST_CASE("kind names round-trip") {
  for (HeadKind k : kAllKinds) CHECK(parse_head_kind(to_string(k)) == k);
  CHECK_FALSE(parse_head_kind("bert").has_value());
}

TEST_CASE("architecture shapes") {
  const HeadModel ng = HeadModel::create(HeadKind::BertNgram, 768, 100);
  CHECK(ng.params.size() == 2 * 868 + 2);
  CHECK(ng.expects_ngrams());
  CHECK(ng.relu_on_logits);
  const HeadModel custom = HeadModel::create(HeadKind::BertCustom, 768);
  CHECK(custom.params.size() == 512 * 768 + 512 + 2 * 512 + 2);
  CHECK(custom.dropout_p == 0.1);
  const HeadModel distil = HeadModel::create(HeadKind::DistilbertHead, 768);
  CHECK(distil.params.size() == 768 * 768 + 768 + 2 * 768 + 2);
  CHECK(distil.dropout_p == 0.2);
}

TEST_CASE("zero weights give even probabilities for every kind") {
  const Fixture f = gaussian_fixture(6, 4, 3, 2.0, 1);
  for (HeadKind k : kAllKinds) {
    const HeadModel m = HeadModel::create(k, 4, k == HeadKind::BertNgram ? 3 : 0, 5);
    const Tensor2 p = head_forward(m, inputs_for(k, f));
    for (std::size_t r = 0; r < p.rows(); ++r) {
      CHECK(p(r, 0) == 0.5);
      CHECK(p(r, 1) == 0.5);
    }
    for (int l : head_predict(m, inputs_for(k, f)).labels) CHECK(l == 1);
  }
}

TEST_CASE("relu on logits clamps negative logits") {
  // Two features, no n-grams: logits = W x + b = [-1, -2] for x = [1, 1].
  HeadModel m = HeadModel::create(HeadKind::BertNgram, 2, 0, 0, true);
  auto& v = m.params.values();
  v = {-0.5, -0.5, -1.0, -1.0, 0.0, 0.0};
  const Tensor2 x(1, 2, 1.0);
  const Tensor2 none(1, 0);
  const HeadInputs in{x, &none};
  const Tensor2 logits = head_logits(m, in);
  CHECK(logits(0, 0) == 0.0);
  CHECK(logits(0, 1) == 0.0);
  CHECK(head_forward(m, in)(0, 1) == 0.5);

  m.relu_on_logits = false;
  const Tensor2 raw = head_logits(m, in);
  CHECK(raw(0, 0) == -1.0);
  CHECK(raw(0, 1) == -2.0);
  CHECK(head_forward(m, in)(0, 0) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))));
  CHECK(head_predict(m, in).labels[0] == 0);
}

TEST_CASE("tied logits predict AI unless a threshold is set") {
  HeadModel m = HeadModel::create(HeadKind::BertNgram, 1, 0, 0, false);
  m.params.values() = {0.0, 0.0, 2.0, 2.0};
  const Tensor2 x(1, 1, 3.0);
  const Tensor2 none(1, 0);
  const auto p = head_predict(m, {x, &none});
  CHECK(p.scores[0] == 0.5);
  CHECK(p.labels[0] == 1);
  m.threshold = 0.6;
  CHECK(head_predict(m, {x, &none}).labels[0] == 0);
}

TEST_CASE("gradients match finite differences with relu_on_logits off") {
  const Fixture f = gaussian_fixture(6, 4, 3, 1.0, 2);
  for (HeadKind k : kAllKinds) {
    const HeadModel base = random_model(k, 4, 3, 3, false);
    const HeadInputs in = inputs_for(k, f);
    const LossFn loss = [&](std::span<const double> p) {
      HeadModel m = base;
      m.params.values().assign(p.begin(), p.end());
      return head_loss(m, in, f.labels, nullptr);
    };
    const GradFn grad = [&](std::span<const double> p) {
      HeadModel m = base;
      m.params.values().assign(p.begin(), p.end());
      std::vector<double> g = m.params.zeros_like();
      head_loss(m, in, f.labels, &g);
      return g;
    };
    CHECK_MESSAGE(grad_check(loss, grad, base.params.values(), 1e-5).max_rel_error <= 1e-5, to_string(k));
  }
}

TEST_CASE("clamped logits pass no gradient") {
  const Fixture f = gaussian_fixture(6, 4, 3, 1.0, 5);
  HeadModel m = random_model(HeadKind::BertNgram, 4, 3, 6, true);
  // Push logit 0 negative and logit 1 positive for every row.
  m.params.values()[m.params.slot(1).offset] = -100.0;
  m.params.values()[m.params.slot(1).offset + 1] = 100.0;
  const HeadInputs in{f.emb, &f.ngrams};
  std::vector<double> g = m.params.zeros_like();
  head_loss(m, in, f.labels, &g);
  const auto w = m.params.slot(0);
  for (std::size_t j = 0; j < w.cols; ++j) CHECK(g[w.offset + j] == 0.0);
  CHECK(g[m.params.slot(1).offset] == 0.0);
  double row1 = 0.0;
  for (std::size_t j = 0; j < w.cols; ++j) row1 += std::abs(g[w.offset + w.cols + j]);
  CHECK(row1 > 0.0);
}

TEST_CASE("input validation") {
  const Fixture f = gaussian_fixture(4, 4, 3, 1.0, 1);
  const HeadModel ng = HeadModel::create(HeadKind::BertNgram, 4, 3);
  CHECK_THROWS_KIND(head_forward(ng, {f.emb, nullptr}), ErrorKind::MissingNgramFeatures);
  const Tensor2 narrow(4, 2);
  CHECK_THROWS_KIND(head_forward(ng, {f.emb, &narrow}), ErrorKind::WidthMismatch);
  const HeadModel custom = HeadModel::create(HeadKind::BertCustom, 5);
  CHECK_THROWS_KIND(head_forward(custom, {f.emb, nullptr}), ErrorKind::WidthMismatch);
  const Tensor2 short_ngrams(3, 3);
  CHECK_THROWS_KIND(head_forward(ng, {f.emb, &short_ngrams}), ErrorKind::RowMismatch);
}

TEST_CASE("training leaves embeddings untouched and is deterministic") {
  const Fixture f = gaussian_fixture(40, 6, 4, 4.0, 8);
  const Tensor2 before = f.emb;
  HeadConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.hidden = 8;
  for (HeadKind k : kAllKinds) {
    const HeadData data{inputs_for(k, f), f.labels};
    const auto a = train_head(k, data, cfg, data);
    const auto b = train_head(k, data, cfg, data);
    CHECK(a.model.params == b.model.params);
    CHECK(a.history == b.history);
    CHECK(a.history.epochs.back().has_valid);
    CHECK(std::memcmp(before.values().data(), f.emb.values().data(), before.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("probabilities sum to one and rows permute with inputs") {
  const Fixture f = gaussian_fixture(12, 4, 3, 1.0, 4);
  for (HeadKind k : kAllKinds) {
    const HeadModel m = random_model(k, 4, 3, 7, false);
    const Tensor2 p = head_forward(m, inputs_for(k, f));
    for (std::size_t r = 0; r < p.rows(); ++r) CHECK(std::abs(p(r, 0) + p(r, 1) - 1.0) <= 1e-12);

    Fixture rev = f;
    for (std::size_t r = 0; r < f.emb.rows(); ++r) {
      const std::size_t s = f.emb.rows() - 1 - r;
      std::copy(f.emb.row(s).begin(), f.emb.row(s).end(), rev.emb.row(r).begin());
      std::copy(f.ngrams.row(s).begin(), f.ngrams.row(s).end(), rev.ngrams.row(r).begin());
    }
    const Tensor2 q = head_forward(m, inputs_for(k, rev));
    for (std::size_t r = 0; r < p.rows(); ++r) CHECK(q(r, 1) == p(p.rows() - 1 - r, 1));
    CHECK(head_forward(m, inputs_for(k, f), Exec::Serial) == head_forward(m, inputs_for(k, f), Exec::Parallel));
  }
}

TEST_CASE("argmax is invariant to a shared logit shift") {
  HeadModel m = HeadModel::create(HeadKind::BertNgram, 1, 0, 0, false);
  const Tensor2 x(3, 1, std::vector<double>{-1.0, 0.0, 2.0});
  const Tensor2 none(3, 0);
  m.params.values() = {1.0, -1.0, 0.0, 0.0};
  const auto base = head_predict(m, {x, &none}).labels;
  m.params.values() = {1.0, -1.0, 7.5, 7.5};
  CHECK(head_predict(m, {x, &none}).labels == base);
}

TEST_CASE("separable gaussian embeddings are learned by every head") {
  const Fixture f = gaussian_fixture(1000, 32, 16, 4.0, 21);
  HeadConfig cfg;
  cfg.hidden = 64;
  for (HeadKind k : kAllKinds) {
    const auto r = train_head(k, {inputs_for(k, f), f.labels}, cfg);
    const auto p = head_predict(r.model, inputs_for(k, f));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.labels.size(); ++i) correct += p.labels[i] == f.labels[i];
    const double acc = static_cast<double>(correct) / static_cast<double>(p.labels.size());
    CHECK_MESSAGE(acc >= 0.95, to_string(k) << " accuracy " << acc);
    CHECK(auc(roc_curve(p.scores, f.labels)) >= 0.99);
  }
}
