// Scalar reference kernels. Every other ISA variant is tested against these.

#include "cmd/kernels.hpp"

namespace cmd::kern {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void scale(double* a, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= alpha;
}

double max_value(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

void relu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(const double* x, double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] <= 0.0) g[i] = 0.0;
}

void sgd_update(double* p, double* v, const double* g, double lr, double mu,
                double wd, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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
const Ops scalar_ops = {dot,       axpy,      sum,       scale,
                        max_value, relu,      relu_mask, sgd_update,
                        matmul_nt, matmul_nn, matmul_tn_acc, col_sums};
}  // namespace detail

}  // namespace cmd::kern
