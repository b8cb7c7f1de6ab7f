#include "aidetect/kernels.hpp"

#include <omp.h>

#include <string>

#include "aidetect/error.hpp"

namespace aidetect::kernels {

namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 14;

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": incompatible shapes");
}

}  // namespace

namespace serial {

void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::span<const double> bias) {
  check(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows && (bias.empty() || bias.size() == b.rows),
        "gemm_nt");
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double sum = bias.empty() ? 0.0 : bias[j];
      for (std::size_t k = 0; k < a.cols; ++k) sum += a(i, k) * b(j, k);
      c(i, j) = sum;
    }
  }
}

void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols, "gemm_nn");
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) sum += a(i, k) * b(k, j);
      c(i, j) = sum;
    }
  }
}

void gemm_tn_acc(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols, "gemm_tn_acc");
  for (std::size_t i = 0; i < a.cols; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double sum = c(i, j);
      for (std::size_t r = 0; r < a.rows; ++r) sum += a(r, i) * b(r, j);
      c(i, j) = sum;
    }
  }
}

void gemv(ConstMatrixView a, std::span<const double> x, std::span<double> y, double bias) {
  check(a.cols == x.size() && a.rows == y.size(), "gemv");
  for (std::size_t i = 0; i < a.rows; ++i) {
    double sum = bias;
    for (std::size_t k = 0; k < a.cols; ++k) sum += a(i, k) * x[k];
    y[i] = sum;
  }
}

}  // namespace serial

namespace omp {

// Same per-element accumulation order as the serial loops; only the
// distribution of output rows (and, for gemm_nn/gemm_tn, the loop nest used
// to stream memory) differs.

void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::span<const double> bias) {
  check(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows && (bias.empty() || bias.size() == b.rows),
        "gemm_nt");
  const auto m = static_cast<std::ptrdiff_t>(a.rows);
  const bool go = a.rows * b.rows * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (go)
  for (std::ptrdiff_t ii = 0; ii < m; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* arow = a.data + i * a.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.data + j * b.cols;
      double sum = bias.empty() ? 0.0 : bias[j];
      for (std::size_t k = 0; k < a.cols; ++k) sum += arow[k] * brow[k];
      c(i, j) = sum;
    }
  }
}

void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols, "gemm_nn");
  const auto m = static_cast<std::ptrdiff_t>(a.rows);
  const bool go = a.rows * b.cols * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (go)
  for (std::ptrdiff_t ii = 0; ii < m; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* crow = c.data + i * c.cols;
    for (std::size_t j = 0; j < c.cols; ++j) crow[j] = 0.0;
    // k-outer keeps each c(i, j) summed over k in ascending order.
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      const double* brow = b.data + k * b.cols;
      for (std::size_t j = 0; j < c.cols; ++j) crow[j] += aik * brow[j];
    }
  }
}

void gemm_tn_acc(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols, "gemm_tn_acc");
  const auto p = static_cast<std::ptrdiff_t>(a.cols);
  const bool go = a.rows * a.cols * b.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (go)
  for (std::ptrdiff_t ii = 0; ii < p; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* crow = c.data + i * c.cols;
    for (std::size_t r = 0; r < a.rows; ++r) {
      const double ari = a(r, i);
      const double* brow = b.data + r * b.cols;
      for (std::size_t j = 0; j < c.cols; ++j) crow[j] += ari * brow[j];
    }
  }
}

void gemv(ConstMatrixView a, std::span<const double> x, std::span<double> y, double bias) {
  check(a.cols == x.size() && a.rows == y.size(), "gemv");
  const auto m = static_cast<std::ptrdiff_t>(a.rows);
  const bool go = a.rows * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (go)
  for (std::ptrdiff_t ii = 0; ii < m; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* arow = a.data + i * a.cols;
    double sum = bias;
    for (std::size_t k = 0; k < a.cols; ++k) sum += arow[k] * x[k];
    y[i] = sum;
  }
}

}  // namespace omp

void gemm_nt(Exec exec, ConstMatrixView a, ConstMatrixView b, MatrixView c, std::span<const double> bias) {
  exec == Exec::Parallel ? omp::gemm_nt(a, b, c, bias) : serial::gemm_nt(a, b, c, bias);
}

void gemm_nn(Exec exec, ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  exec == Exec::Parallel ? omp::gemm_nn(a, b, c) : serial::gemm_nn(a, b, c);
}

void gemm_tn_acc(Exec exec, ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  exec == Exec::Parallel ? omp::gemm_tn_acc(a, b, c) : serial::gemm_tn_acc(a, b, c);
}

void gemv(Exec exec, ConstMatrixView a, std::span<const double> x, std::span<double> y, double bias) {
  exec == Exec::Parallel ? omp::gemv(a, x, y, bias) : serial::gemv(a, x, y, bias);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace aidetect::kernels
