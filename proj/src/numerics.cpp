#include "aidetect/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

#include "aidetect/error.hpp"

namespace aidetect {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw Error(ErrorKind::ShapeMismatch, "tensor data length does not match rows*cols");
  }
}

bool Tensor2::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
  // xorshift must never hold the all-zero state.
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::next_u64() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) {
  assert(n > 0);
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal(double mean, double stddev) {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------

double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

void softmax_inplace(std::span<double> row) {
  if (row.empty()) return;
  const double mx = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double& v : row) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

Tensor2 softmax_rows(const Tensor2& logits) {
  Tensor2 out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
  return out;
}

double bce_loss(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "bce_loss inputs differ in length");
  if (probs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], 1e-12, 1.0 - 1e-12);
    total += labels[i] == 1 ? -std::log(p) : -std::log1p(-p);
  }
  return total / static_cast<double>(probs.size());
}

double bce_with_logits(double z, int y) {
  return std::max(z, 0.0) - z * static_cast<double>(y) + std::log1p(std::exp(-std::abs(z)));
}

double bce_with_logits(std::span<const double> logits, std::span<const int> labels) {
  if (logits.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "bce_with_logits inputs differ in length");
  }
  if (logits.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += bce_with_logits(logits[i], labels[i]);
  return total / static_cast<double>(logits.size());
}

double cross_entropy(const Tensor2& probs, std::span<const int> labels) {
  if (probs.rows() != labels.size()) throw Error(ErrorKind::LengthMismatch, "cross_entropy row/label count");
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw Error(ErrorKind::IndexOutOfRange, "class index " + std::to_string(y) + " out of range");
    }
    total += -std::log(std::max(probs(r, static_cast<std::size_t>(y)), 1e-12));
  }
  return total / static_cast<double>(labels.size());
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw Error(ErrorKind::ShapeMismatch, "sgd_step params/grads size");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

AdamState::AdamState(std::size_t n_params, double learning_rate)
    : lr(learning_rate), m(n_params, 0.0), v(n_params, 0.0) {}

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
    throw Error(ErrorKind::ShapeMismatch, "adam_step state/params/grads size");
  }
  s.t += 1;
  const double t = static_cast<double>(s.t);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

Tensor2 dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  assert(p >= 0.0 && p < 1.0);
  Tensor2 mask(rows, cols, 1.0);
  if (p <= 0.0) return mask;
  const double keep = 1.0 / (1.0 - p);
  for (double& v : mask.values()) v = rng.uniform() < p ? 0.0 : keep;
  return mask;
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

void glorot_uniform(std::span<double> weights, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& w : weights) w = (2.0 * rng.uniform() - 1.0) * limit;
}

void normal_fill(std::span<double> weights, double stddev, Rng& rng) {
  for (double& w : weights) w = rng.normal(0.0, stddev);
}

GradCheckResult grad_check(const LossFn& loss_fn, const GradFn& grad_fn, std::span<const double> params,
                           double eps) {
  std::vector<double> p(params.begin(), params.end());
  const std::vector<double> analytic = grad_fn(p);
  if (analytic.size() != p.size()) throw Error(ErrorKind::ShapeMismatch, "gradient length differs from params");
  GradCheckResult result;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + eps;
    const double up = loss_fn(p);
    p[i] = saved - eps;
    const double down = loss_fn(p);
    p[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double rel = std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    if (i == 0 || rel > result.max_rel_error) result = {rel, i, analytic[i], numeric};
  }
  return result;
}

// ---------------------------------------------------------------------------

std::size_t ParameterSet::add(std::string name, std::size_t rows, std::size_t cols) {
  Slot s{std::move(name), rows, cols, values_.size()};
  values_.resize(values_.size() + rows * cols, 0.0);
  slots_.push_back(std::move(s));
  return slots_.size() - 1;
}

std::size_t ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == name) return i;
  }
  throw Error(ErrorKind::BadContainer, "no parameter named '" + name + "'");
}

MatrixView ParameterSet::mat(std::size_t id) {
  const auto& s = slots_.at(id);
  return {values_.data() + s.offset, s.rows, s.cols};
}

ConstMatrixView ParameterSet::mat(std::size_t id) const {
  const auto& s = slots_.at(id);
  return {values_.data() + s.offset, s.rows, s.cols};
}

std::span<double> ParameterSet::span(std::size_t id) {
  const auto& s = slots_.at(id);
  return {values_.data() + s.offset, s.size()};
}

std::span<const double> ParameterSet::span(std::size_t id) const {
  const auto& s = slots_.at(id);
  return {values_.data() + s.offset, s.size()};
}

void ParameterSet::round_to_f32() {
  for (double& v : values_) v = static_cast<double>(static_cast<float>(v));
}

void LossHistory::record(double train_loss) {
  epochs.push_back({static_cast<int>(epochs.size()) + 1, train_loss, false, 0.0});
}

void LossHistory::record(double train_loss, double valid_loss) {
  epochs.push_back({static_cast<int>(epochs.size()) + 1, train_loss, true, valid_loss});
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace aidetect
