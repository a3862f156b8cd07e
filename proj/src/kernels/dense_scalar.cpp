#include <cmath>

#include "mecpart/kernels.hpp"

namespace mecpart::kernels {

namespace {

void gemv(const double* w, const double* x, const double* b, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc + b[r];
  }
}

void gemv_transposed(const double* w, const double* d, double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) x[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const double dr = d[r];
    for (std::size_t c = 0; c < cols; ++c) x[c] += row[c] * dr;
  }
}

void outer_accumulate(double* g, const double* d, const double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = g + r * cols;
    const double dr = d[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += dr * x[c];
  }
}

void adam_update(double* param, double* m, double* v, const double* grad, std::size_t n, const AdamCoefficients& k) {
  const double one_m_b1 = 1.0 - k.beta1;
  const double one_m_b2 = 1.0 - k.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = k.beta1 * m[i] + one_m_b1 * g;
    v[i] = k.beta2 * v[i] + one_m_b2 * (g * g);
    const double m_hat = m[i] / k.bias1;
    const double v_hat = v[i] / k.bias2;
    param[i] -= k.lr * m_hat / (std::sqrt(v_hat) + k.eps);
  }
}

}  // namespace

const DenseKernels& scalar_kernels() {
  static const DenseKernels k{"scalar", gemv, gemv_transposed, outer_accumulate, adam_update};
  return k;
}

}  // namespace mecpart::kernels
