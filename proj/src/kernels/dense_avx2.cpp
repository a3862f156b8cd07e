// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "mecpart/kernels.hpp"

namespace mecpart::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gemv(const double* w, const double* x, const double* b, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 8 <= cols; c += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c + 4), _mm256_loadu_pd(x + c + 4), acc1);
    }
    for (; c + 4 <= cols; c += 4)
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc + b[r];
  }
}

void gemv_transposed(const double* w, const double* d, double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) x[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const __m256d dr = _mm256_set1_pd(d[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(x + c, _mm256_fmadd_pd(_mm256_loadu_pd(row + c), dr, _mm256_loadu_pd(x + c)));
    for (; c < cols; ++c) x[c] += row[c] * d[r];
  }
}

void outer_accumulate(double* g, const double* d, const double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = g + r * cols;
    const __m256d dr = _mm256_set1_pd(d[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(row + c, _mm256_fmadd_pd(dr, _mm256_loadu_pd(x + c), _mm256_loadu_pd(row + c)));
    for (; c < cols; ++c) row[c] += d[r] * x[c];
  }
}

// No FMA here: the update matches the scalar reference bit for bit.
void adam_update(double* param, double* m, double* v, const double* grad, std::size_t n, const AdamCoefficients& k) {
  const __m256d b1 = _mm256_set1_pd(k.beta1);
  const __m256d b2 = _mm256_set1_pd(k.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - k.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - k.beta2);
  const __m256d bias1 = _mm256_set1_pd(k.bias1);
  const __m256d bias2 = _mm256_set1_pd(k.bias2);
  const __m256d lr = _mm256_set1_pd(k.lr);
  const __m256d eps = _mm256_set1_pd(k.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bias1);
    const __m256d v_hat = _mm256_div_pd(vi, bias2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = k.beta1 * m[i] + (1.0 - k.beta1) * g;
    v[i] = k.beta2 * v[i] + (1.0 - k.beta2) * (g * g);
    const double m_hat = m[i] / k.bias1;
    const double v_hat = v[i] / k.bias2;
    param[i] -= k.lr * m_hat / (std::sqrt(v_hat) + k.eps);
  }
}

}  // namespace

const DenseKernels& avx2_kernels_impl() {
  static const DenseKernels k{"avx2", gemv, gemv_transposed, outer_accumulate, adam_update};
  return k;
}

}  // namespace mecpart::kernels
