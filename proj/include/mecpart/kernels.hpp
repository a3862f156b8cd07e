#pragma once

#include <cstddef>
#include <string_view>

namespace mecpart::kernels {

struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

/// Dense double-precision kernels used by the policy network. Matrices are
/// row-major, `rows x cols`.
struct DenseKernels {
  std::string_view name;
  /// y = W x + b
  void (*gemv)(const double* w, const double* x, const double* b, double* y, std::size_t rows, std::size_t cols);
  /// x = W^T d
  void (*gemv_transposed)(const double* w, const double* d, double* x, std::size_t rows, std::size_t cols);
  /// G += d x^T
  void (*outer_accumulate)(double* g, const double* d, const double* x, std::size_t rows, std::size_t cols);
  /// One bias-corrected Adam step over n parameters.
  void (*adam_update)(double* param, double* m, double* v, const double* grad, std::size_t n,
                      const AdamCoefficients& c);
};

const DenseKernels& scalar_kernels();

/// nullptr when the build or the CPU lacks AVX2+FMA.
const DenseKernels* avx2_kernels();

/// AVX2 when available, else scalar. MECPART_KERNELS=scalar forces the
/// reference path. Resolved once per process.
const DenseKernels& active_kernels();

}  // namespace mecpart::kernels
