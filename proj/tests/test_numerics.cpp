#include <cmath>
#include <limits>

#include "aidetect/logreg.hpp"
#include "aidetect/numerics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aidetect;

TEST_CASE("sigmoid is stable at the extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(std::isfinite(sigmoid(-800.0)));
  CHECK(sigmoid(2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  CHECK(sigmoid(-3.0) + sigmoid(3.0) == doctest::Approx(1.0));
}

TEST_CASE("softmax rows sum to one and survive large logits") {
  Tensor2 logits(3, 2, std::vector<double>{0, 0, 1000, -1000, 3, 1});
  const Tensor2 p = softmax_rows(logits);
  CHECK(p(0, 0) == 0.5);
  CHECK(p(1, 0) == 1.0);
  CHECK(p(1, 1) == 0.0);
  CHECK(p(2, 0) == doctest::Approx(std::exp(2.0) / (1.0 + std::exp(2.0))));
  for (std::size_t r = 0; r < 3; ++r) CHECK(p(r, 0) + p(r, 1) == doctest::Approx(1.0));
}

TEST_CASE("bce from logits matches bce from probabilities") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z(5), p(5);
    std::vector<int> y(5);
    for (std::size_t i = 0; i < 5; ++i) {
      z[i] = rng.normal(0.0, 4.0);
      p[i] = sigmoid(z[i]);
      y[i] = static_cast<int>(rng.uniform_index(2));
    }
    CHECK(bce_with_logits(z, y) == doctest::Approx(bce_loss(p, y)).epsilon(1e-9));
  }
  CHECK(bce_with_logits(0.0, 1) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(bce_with_logits(-1e4, 1)));
  CHECK(bce_with_logits(-1e4, 1) == doctest::Approx(1e4));
}

TEST_CASE("cross entropy fixture") {
  Tensor2 probs(2, 2, std::vector<double>{0.9, 0.1, 0.2, 0.8});
  const std::vector<int> labels = {0, 1};
  // -(ln 0.9 + ln 0.8) / 2
  CHECK(std::abs(cross_entropy(probs, labels) - 0.164252033486018) < 1e-12);
  Tensor2 uniform(1, 2, 0.5);
  CHECK(std::abs(cross_entropy(uniform, std::vector<int>{1}) - 0.6931471805599453) < 1e-12);
  Tensor2 zero(1, 2, std::vector<double>{1.0, 0.0});
  CHECK(cross_entropy(zero, std::vector<int>{1}) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("sgd and adam single steps") {
  std::vector<double> p = {1.0};
  const std::vector<double> g = {0.5};
  sgd_step(p, g, 0.1);
  CHECK(p[0] == doctest::Approx(0.95));

  std::vector<double> q = {0.0, 1.0};
  AdamState adam(2, 1e-3);
  adam_step(adam, q, std::vector<double>{2.0, -0.3});
  CHECK(adam.t == 1);
  CHECK(q[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  CHECK(q[1] == doctest::Approx(1.0 + 1e-3).epsilon(1e-6));
}

TEST_CASE("dropout mask zero fraction and scale") {
  Rng rng(17);
  const Tensor2 mask = dropout_mask(200, 100, 0.3, rng);
  std::size_t zeros = 0;
  for (double x : mask.values()) {
    if (x == 0.0) ++zeros;
    else CHECK(x == doctest::Approx(1.0 / 0.7));
  }
  const double frac = static_cast<double>(zeros) / static_cast<double>(mask.size());
  CHECK(std::abs(frac - 0.3) < 0.02);
  Rng r2(1);
  const Tensor2 ones = dropout_mask(4, 4, 0.0, r2);
  for (double x : ones.values()) CHECK(x == 1.0);
}

TEST_CASE("clip_grad_norm scales to the limit") {
  std::vector<double> g = {3.0, 4.0};
  CHECK(clip_grad_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));
  std::vector<double> h = {3.0, 4.0};
  clip_grad_norm(h, 0.0);
  CHECK(h[0] == 3.0);
}

TEST_CASE("grad_check accepts a correct quadratic gradient") {
  const LossFn loss = [](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(i + 1) * x[i] * x[i];
    return s;
  };
  const GradFn grad = [](std::span<const double> x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * static_cast<double>(i + 1) * x[i];
    return g;
  };
  const std::vector<double> x = {0.3, -1.2, 2.0};
  CHECK(grad_check(loss, grad, x, 1e-5).max_rel_error < 1e-8);
}

TEST_CASE("grad_check flags a corrupted coordinate") {
  const LossFn loss = [](std::span<const double> x) { return x[0] * x[0] + 3.0 * x[1]; };
  const GradFn grad = [](std::span<const double> x) {
    return std::vector<double>{2.0 * x[0], 3.0 * 1.1};
  };
  const std::vector<double> x = {0.5, 0.25};
  const auto r = grad_check(loss, grad, x, 1e-5);
  CHECK(r.worst_index == 1);
  CHECK(r.max_rel_error > 0.04);
}

TEST_CASE("logistic regression gradient on a 4x3 fixture") {
  Tensor2 x(4, 3, std::vector<double>{0.5, -1.0, 2.0, 1.5, 0.0, -0.5, -2.0, 1.0, 0.25, 0.0, 0.75, -1.25});
  const std::vector<int> y = {1, 0, 0, 1};
  const std::vector<double> params = {0.1, -0.2, 0.3, 0.05};
  for (double l2 : {0.0, 0.1}) {
    const LossFn loss = [&](std::span<const double> p) { return logreg_loss(p, x.view(), y, l2); };
    const GradFn grad = [&](std::span<const double> p) {
      std::vector<double> g(p.size(), 0.0);
      logreg_loss(p, x.view(), y, l2, &g);
      return g;
    };
    CHECK(grad_check(loss, grad, params, 1e-6).max_rel_error <= 1e-6);
  }
}

TEST_CASE("rng is deterministic per seed") {
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    if (i == 0) CHECK(x != c.next_u64());
  }
  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.uniform_index(7) < 7);
  }
}

TEST_CASE("normal draws consume two outputs") {
  Rng a(5), b(5);
  (void)a.normal(0.0, 1.0);
  (void)b.next_u64();
  (void)b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("glorot bounds and parameter slots") {
  Rng rng(2);
  std::vector<double> w(60);
  glorot_uniform(w, 6, 10, rng);
  const double limit = std::sqrt(6.0 / 16.0);
  for (double x : w) CHECK(std::abs(x) <= limit);

  ParameterSet ps;
  const auto a = ps.add("a", 2, 3);
  const auto b = ps.add("b", 1, 2);
  CHECK(ps.size() == 8);
  CHECK(ps.slot(b).offset == 6);
  CHECK(ps.find("b") == b);
  ps.mat(a)(1, 2) = 7.0;
  CHECK(ps.values()[5] == 7.0);
  ps.values()[6] = 0.1;
  ps.round_to_f32();
  CHECK(ps.values()[6] == static_cast<double>(0.1f));
}

TEST_CASE("loss history numbers epochs from one") {
  LossHistory h;
  h.record(0.5);
  h.record(0.4, 0.45);
  CHECK(h.epochs[0].epoch == 1);
  CHECK_FALSE(h.epochs[0].has_valid);
  CHECK(h.epochs[1].epoch == 2);
  CHECK(h.epochs[1].valid_loss == 0.45);
}
