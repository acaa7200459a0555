#include "kernels_impl.hpp"

#include <cmath>

namespace loco::kernels::detail {
namespace {

void pbd_forward_step(const double* prev, double* next, std::size_t n, double p) {
  const double q = 1.0 - p;
  next[0] = q * prev[0];
  for (std::size_t k = 1; k + 1 < n; ++k) next[k] = q * prev[k] + p * prev[k - 1];
  next[n - 1] = prev[n - 1] + p * prev[n - 2];
}

double pbd_backward_step(const double* prev, const double* grad_next, double* grad_prev,
                         std::size_t n, double p) {
  const double q = 1.0 - p;
  double dp = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    dp += (grad_next[k + 1] - grad_next[k]) * prev[k];
    grad_prev[k] = q * grad_next[k] + p * grad_next[k + 1];
  }
  grad_prev[n - 1] = grad_next[n - 1];
  return dp;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot(w + r * cols, x, cols);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    param[i] = param[i] - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace

const KernelTable kScalarTable{
    "scalar", pbd_forward_step, pbd_backward_step, dot, gemv, gemv_t, ger, axpy, adam_update,
};

}  // namespace loco::kernels::detail
