// NEON kernels for aarch64, where float64x2 is always available.

#if defined(__aarch64__)

#include <arm_neon.h>

#include "cmd/kernels.hpp"

namespace cmd::kern {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += a[i];
  return r;
}

void scale(double* a, double alpha, std::size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), va));
  for (; i < n; ++i) a[i] *= alpha;
}

double max_value(const double* a, std::size_t n) {
  double m = a[0];
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t vm = vld1q_f64(a);
    for (i = 2; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vld1q_f64(a + i));
    m = vmaxvq_f64(vm);
  }
  for (; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

void relu(const double* x, double* y, std::size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(const double* x, double* g, std::size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t keep = vcgtq_f64(vld1q_f64(x + i), zero);
    float64x2_t gi = vld1q_f64(g + i);
    vst1q_f64(g + i, vreinterpretq_f64_u64(vandq_u64(
                         vreinterpretq_u64_f64(gi), keep)));
  }
  for (; i < n; ++i)
    if (x[i] <= 0.0) g[i] = 0.0;
}

void sgd_update(double* p, double* v, const double* g, double lr, double mu,
                double wd, std::size_t n) {
  float64x2_t vmu = vdupq_n_f64(mu);
  float64x2_t vwd = vdupq_n_f64(wd);
  float64x2_t vlr = vdupq_n_f64(lr);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t pi = vld1q_f64(p + i);
    float64x2_t vi = vld1q_f64(v + i);
    vi = vfmaq_f64(vfmaq_f64(vld1q_f64(g + i), vwd, pi), vmu, vi);
    vst1q_f64(v + i, vi);
    vst1q_f64(p + i, vfmsq_f64(pi, vlr, vi));
  }
  for (; i < n; ++i) {
    v[i] = mu * v[i] + g[i] + wd * p[i];
    p[i] -= lr * v[i];
  }
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot(a + i * k, b + j * k, k);
}

void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t l = 0; l < k; ++l) axpy(a[i * k + l], b + l * n, ci, n);
  }
}

void matmul_tn_acc(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) axpy(a[i * k + l], b + i * n, c + l * n, n);
}

void col_sums(const double* a, double* out, std::size_t m, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < m; ++i) axpy(1.0, a + i * n, out, n);
}

}  // namespace

namespace detail {
const Ops neon_ops = {dot,       axpy,      sum,       scale,
                      max_value, relu,      relu_mask, sgd_update,
                      matmul_nt, matmul_nn, matmul_tn_acc, col_sums};
}  // namespace detail

}  // namespace cmd::kern

#endif
