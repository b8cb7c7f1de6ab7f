#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace aidetect {

/// Non-owning row-major view. Kernels and layers work on these so that the
/// same code runs over a Tensor2 or a slice of a ParameterSet.
template <typename T>
struct BasicMatrixView {
  T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  BasicMatrixView() = default;
  BasicMatrixView(T* d, std::size_t r, std::size_t c) : data(d), rows(r), cols(c) {}
  /// Mutable views convert to const views.
  template <typename U>
    requires std::is_same_v<const U, T> && (!std::is_same_v<U, T>)
  BasicMatrixView(const BasicMatrixView<U>& other) : data(other.data), rows(other.rows), cols(other.cols) {}

  T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<T> row(std::size_t r) const { return {data + r * cols, cols}; }
  std::size_t size() const { return rows * cols; }
};

using MatrixView = BasicMatrixView<double>;
using ConstMatrixView = BasicMatrixView<const double>;

/// Dense row-major matrix of doubles.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  MatrixView view() noexcept { return {values_.data(), rows_, cols_}; }
  ConstMatrixView view() const noexcept { return {values_.data(), rows_, cols_}; }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// xorshift64* generator seeded through one round of splitmix64.
///
/// Stream consumption is part of the reproducibility contract: every draw
/// (`next_u64`, `uniform`, `uniform_index`, `normal`) consumes exactly the
/// number of 64-bit outputs documented on the method.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// One output.
  std::uint64_t next_u64();
  /// One output; uniform on [0, 1) with 53 bits of precision.
  double uniform();
  /// One or more outputs (rejection sampling); uniform on [0, n).
  std::size_t uniform_index(std::size_t n);
  /// Two outputs (Box-Muller, the second variate is discarded).
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

double sigmoid(double x);
double relu(double x);
Tensor2 softmax_rows(const Tensor2& logits);
void softmax_inplace(std::span<double> row);

/// Mean binary cross-entropy of probabilities (clamped to [1e-12, 1-1e-12]).
double bce_loss(std::span<const double> probs, std::span<const int> labels);
/// Mean BCE computed from logits: max(z,0) - z*y + log1p(exp(-|z|)).
double bce_with_logits(std::span<const double> logits, std::span<const int> labels);
double bce_with_logits(double logit, int label);
/// Mean -log p[true class] with probabilities clamped at 1e-12.
double cross_entropy(const Tensor2& probs, std::span<const int> labels);

void sgd_step(std::span<double> params, std::span<const double> grads, double lr);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t n_params, double learning_rate);
};

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

/// Inverted dropout mask: 0 with probability p, else 1/(1-p). One uniform per
/// entry, row-major order.
Tensor2 dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

/// Scales the global L2 norm of `grads` down to `max_norm` (no-op when
/// max_norm <= 0 or the norm is already smaller). Returns the pre-clip norm.
double clip_grad_norm(std::span<double> grads, double max_norm);

void glorot_uniform(std::span<double> weights, std::size_t fan_in, std::size_t fan_out, Rng& rng);
void normal_fill(std::span<double> weights, double stddev, Rng& rng);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

using LossFn = std::function<double(std::span<const double>)>;
using GradFn = std::function<std::vector<double>(std::span<const double>)>;

/// Central-difference check of `grad_fn` against `loss_fn` on every
/// coordinate; relative error is |a-n| / max(1e-8, |a|+|n|).
GradCheckResult grad_check(const LossFn& loss_fn, const GradFn& grad_fn, std::span<const double> params,
                           double eps);

/// Named, shaped slices of one flat parameter vector. Optimizers, gradient
/// checks and persistence all work on the flat vector.
class ParameterSet {
 public:
  struct Slot {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
    std::size_t size() const { return rows * cols; }
  };

  /// Returns the slot id.
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  std::size_t slot_count() const noexcept { return slots_.size(); }
  const Slot& slot(std::size_t id) const { return slots_.at(id); }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  std::size_t find(const std::string& name) const;

  std::size_t size() const noexcept { return values_.size(); }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  MatrixView mat(std::size_t id);
  ConstMatrixView mat(std::size_t id) const;
  std::span<double> span(std::size_t id);
  std::span<const double> span(std::size_t id) const;

  /// A zero-valued vector laid out like this set, for gradients.
  std::vector<double> zeros_like() const { return std::vector<double>(values_.size(), 0.0); }

  /// Rounds every value through 32-bit float, as persisted in containers.
  void round_to_f32();

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.values_ == b.values_ && a.slots_.size() == b.slots_.size();
  }

 private:
  std::vector<Slot> slots_;
  std::vector<double> values_;
};

/// Views into a gradient vector laid out like `params`.
inline MatrixView grad_mat(std::vector<double>& grads, const ParameterSet& params, std::size_t id) {
  const auto& s = params.slot(id);
  return {grads.data() + s.offset, s.rows, s.cols};
}

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;
  bool has_valid = false;
  double valid_loss = 0.0;

  friend bool operator==(const EpochLoss&, const EpochLoss&) = default;
};

/// Per-epoch loss records; epochs are 1, 2, 3, ...
struct LossHistory {
  std::vector<EpochLoss> epochs;

  void record(double train_loss);
  void record(double train_loss, double valid_loss);
  bool empty() const { return epochs.empty(); }
  friend bool operator==(const LossHistory&, const LossHistory&) = default;
};

/// FNV-1a over bytes; used for corpus fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t value);

}  // namespace aidetect
