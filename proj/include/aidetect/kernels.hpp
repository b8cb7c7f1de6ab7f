#pragma once

// Dense kernels used by the trainable detectors and the feature transforms.
//
// Every kernel exists twice: `serial::` is the straightforward reference loop
// and `omp::` distributes output rows over OpenMP threads. Both accumulate each
// output element in the same order, so their results are bitwise identical
// for any thread count. The unqualified functions dispatch on an Exec policy.

#include <cstddef>
#include <span>

#include "aidetect/numerics.hpp"

namespace aidetect {

enum class Exec { Serial, Parallel };

namespace kernels {

namespace serial {
/// C = A * B^T (+ bias broadcast over rows). A: m x k, B: n x k, C: m x n.
void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::span<const double> bias = {});
/// C = A * B. A: m x k, B: k x n, C: m x n.
void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c);
/// C += A^T * B. A: m x p, B: m x q, C: p x q.
void gemm_tn_acc(ConstMatrixView a, ConstMatrixView b, MatrixView c);
/// y = A * x (+ bias).
void gemv(ConstMatrixView a, std::span<const double> x, std::span<double> y, double bias = 0.0);
}  // namespace serial

namespace omp {
void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::span<const double> bias = {});
void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c);
void gemm_tn_acc(ConstMatrixView a, ConstMatrixView b, MatrixView c);
void gemv(ConstMatrixView a, std::span<const double> x, std::span<double> y, double bias = 0.0);
}  // namespace omp

void gemm_nt(Exec exec, ConstMatrixView a, ConstMatrixView b, MatrixView c, std::span<const double> bias = {});
void gemm_nn(Exec exec, ConstMatrixView a, ConstMatrixView b, MatrixView c);
void gemm_tn_acc(Exec exec, ConstMatrixView a, ConstMatrixView b, MatrixView c);
void gemv(Exec exec, ConstMatrixView a, std::span<const double> x, std::span<double> y, double bias = 0.0);

int max_threads();

}  // namespace kernels

/// Runs fn(i) for i in [0, n). The parallel form gives each index to exactly
/// one thread; callers write results to slot i so output order never depends
/// on scheduling. fn must not throw.
template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Parallel && n > 1) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace aidetect
