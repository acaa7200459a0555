// Compiled with -mavx2 -mfma -ffp-contract=off; only reached through the
// runtime dispatch in dispatch.cpp after a CPU feature check.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>

namespace loco::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void pbd_forward_step(const double* prev, double* next, std::size_t n, double p) {
  const double q = 1.0 - p;
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vp = _mm256_set1_pd(p);
  next[0] = q * prev[0];
  std::size_t k = 1;
  for (; k + 4 < n; k += 4) {
    const __m256d cur = _mm256_loadu_pd(prev + k);
    const __m256d lag = _mm256_loadu_pd(prev + k - 1);
    _mm256_storeu_pd(next + k, _mm256_add_pd(_mm256_mul_pd(vq, cur), _mm256_mul_pd(vp, lag)));
  }
  for (; k + 1 < n; ++k) next[k] = q * prev[k] + p * prev[k - 1];
  next[n - 1] = prev[n - 1] + p * prev[n - 2];
}

double pbd_backward_step(const double* prev, const double* grad_next, double* grad_prev,
                         std::size_t n, double p) {
  const double q = 1.0 - p;
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vp = _mm256_set1_pd(p);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 < n; k += 4) {
    const __m256d g = _mm256_loadu_pd(grad_next + k);
    const __m256d g1 = _mm256_loadu_pd(grad_next + k + 1);
    const __m256d u = _mm256_loadu_pd(prev + k);
    acc = _mm256_fmadd_pd(_mm256_sub_pd(g1, g), u, acc);
    _mm256_storeu_pd(grad_prev + k, _mm256_add_pd(_mm256_mul_pd(vq, g), _mm256_mul_pd(vp, g1)));
  }
  double dp = hsum(acc);
  for (; k + 1 < n; ++k) {
    dp += (grad_next[k + 1] - grad_next[k]) * prev[k];
    grad_prev[k] = q * grad_next[k] + p * grad_next[k + 1];
  }
  grad_prev[n - 1] = grad_next[n - 1];
  return dp;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot(w + r * cols, x, cols);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t(const double* w, const double* y, double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(y[r], w + r * cols, x, cols);
}

void ger(double* g, const double* y, const double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(y[r], x, g + r * cols, cols);
}

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoeffs& c) {
  const double one_m_b1 = 1.0 - c.beta1;
  const double one_m_b2 = 1.0 - c.beta2;
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d nb1 = _mm256_set1_pd(one_m_b1);
  const __m256d nb2 = _mm256_set1_pd(one_m_b2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi =
        _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(nb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(nb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    param[i] = param[i] - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace

const KernelTable kAvx2Table{
    "avx2", pbd_forward_step, pbd_backward_step, dot, gemv, gemv_t, ger, axpy, adam_update,
};

}  // namespace loco::kernels::detail
