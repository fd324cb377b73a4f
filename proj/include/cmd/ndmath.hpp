#pragma once

// Dense row-major matrices plus the information-theoretic primitives used
// throughout training: softmax, entropy, cross-entropy, KL divergence.
//
// Every log() in these routines takes a 1e-6 additive guard so that zero
// probabilities stay finite. Entropy is clamped at zero: near-one-hot
// distributions would otherwise come out as a tiny negative number through
// the guard. uniform_entropy() is the exact natural log of the class count,
// with no guard, because it serves as the normalizing constant.

#include <cstddef>
#include <vector>

namespace cmd {

inline constexpr double kLogGuard = 1e-6;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

namespace ndmath {

// Numerically stable softmax (max-subtraction). Throws InvalidInput on an
// empty vector.
std::vector<double> softmax(const std::vector<double>& logits);

// Row-wise softmax over a batch of logits.
Matrix softmax_rows(const Matrix& logits);

// H(p) = max(0, sum_i -p_i * log(p_i + guard)), natural log.
double entropy(const std::vector<double>& p);
double entropy(const double* p, std::size_t n);

// Exact ln(num_classes); throws InvalidInput when num_classes == 0.
double uniform_entropy(std::size_t num_classes);

// H(q, p) = sum_i -q_i * log(p_i + guard).
double cross_entropy(const std::vector<double>& q, const std::vector<double>& p);
double cross_entropy(const double* q, const double* p, std::size_t n);

// D_KL(p || q) = sum_i p_i * (log(p_i + guard) - log(q_i + guard)).
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);
double kl_divergence(const double* p, const double* q, std::size_t n);

// argmax index; first occurrence wins on ties. Throws InvalidInput on empty.
std::size_t argmax(const double* p, std::size_t n);
std::size_t argmax(const std::vector<double>& p);

}  // namespace ndmath

}  // namespace cmd
