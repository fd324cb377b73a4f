#include "cmd/ndmath.hpp"

#include <cmath>

#include "cmd/error.hpp"
#include "cmd/kernels.hpp"

namespace cmd::ndmath {

namespace {

void softmax_into(const double* logits, double* out, std::size_t n) {
  const auto& k = kern::ops();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(logits[i]))
      throw InvalidInput("softmax: non-finite logit");
  double m = k.max_value(logits, n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(logits[i] - m);
  double total = k.sum(out, n);
  k.scale(out, 1.0 / total, n);
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw InvalidInput("softmax: empty input");
  std::vector<double> out(logits.size());
  softmax_into(logits.data(), out.data(), logits.size());
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  if (logits.rows == 0 || logits.cols == 0)
    throw InvalidInput("softmax_rows: empty matrix");
  Matrix out(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i)
    softmax_into(logits.row(i), out.row(i), logits.cols);
  return out;
}

double entropy(const double* p, std::size_t n) {
  if (n == 0) throw InvalidInput("entropy: empty distribution");
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) h -= p[i] * std::log(p[i] + kLogGuard);
  return h > 0.0 ? h : 0.0;
}

double entropy(const std::vector<double>& p) { return entropy(p.data(), p.size()); }

double uniform_entropy(std::size_t num_classes) {
  if (num_classes < 2) throw InvalidInput("uniform_entropy: need >= 2 classes");
  return std::log(static_cast<double>(num_classes));
}

double cross_entropy(const double* q, const double* p, std::size_t n) {
  if (n == 0) throw InvalidInput("cross_entropy: empty distribution");
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) h -= q[i] * std::log(p[i] + kLogGuard);
  return h;
}

double cross_entropy(const std::vector<double>& q, const std::vector<double>& p) {
  if (q.size() != p.size())
    throw InvalidInput("cross_entropy: dimension mismatch");
  return cross_entropy(q.data(), p.data(), q.size());
}

double kl_divergence(const double* p, const double* q, std::size_t n) {
  if (n == 0) throw InvalidInput("kl_divergence: empty distribution");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    d += p[i] * (std::log(p[i] + kLogGuard) - std::log(q[i] + kLogGuard));
  return d;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw InvalidInput("kl_divergence: dimension mismatch");
  return kl_divergence(p.data(), q.data(), p.size());
}

std::size_t argmax(const double* p, std::size_t n) {
  if (n == 0) throw InvalidInput("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

std::size_t argmax(const std::vector<double>& p) { return argmax(p.data(), p.size()); }

}  // namespace cmd::ndmath
