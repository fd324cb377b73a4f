#pragma once

// Low-level numeric kernels behind the math layer. A scalar reference
// implementation always exists; on x86-64 an AVX2+FMA variant is selected at
// runtime when the CPU supports it, and on aarch64 a NEON variant is used.
// All variants are equivalence-tested against the scalar reference.
//
// The active ISA can be forced with set_active_isa() or the CMDISTILL_ISA
// environment variable ("scalar", "avx2", "neon"), checked once at startup.

#include <cstddef>
#include <string>

namespace cmd::kern {

enum class Isa { Scalar, Avx2, Neon };

std::string isa_name(Isa isa);

// Best ISA the current CPU supports.
Isa best_isa();

// Currently selected ISA (honours CMDISTILL_ISA on first call).
Isa active_isa();

// Force a specific ISA; throws InvalidInput if unsupported on this CPU.
void set_active_isa(Isa isa);

struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  void (*scale)(double* a, double alpha, std::size_t n);
  double (*max_value)(const double* a, std::size_t n);
  void (*relu)(const double* x, double* y, std::size_t n);
  // g *= (x > 0)
  void (*relu_mask)(const double* x, double* g, std::size_t n);
  // v = mu*v + g + wd*p; p -= lr*v
  void (*sgd_update)(double* p, double* v, const double* g, double lr,
                     double mu, double wd, std::size_t n);
  // c[m x n] = a[m x k] * b[n x k]^T
  void (*matmul_nt)(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n);
  // c[m x n] = a[m x k] * b[k x n]
  void (*matmul_nn)(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n);
  // c[k x n] += a[m x k]^T * b[m x n]
  void (*matmul_tn_acc)(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);
  // out[j] = sum_i a[i*n + j]
  void (*col_sums)(const double* a, double* out, std::size_t m, std::size_t n);
};

// Kernel table for the active ISA.
const Ops& ops();

// Kernel table for a specific ISA (for equivalence tests).
const Ops& ops_for(Isa isa);

namespace detail {
extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif
#if defined(__aarch64__)
extern const Ops neon_ops;
#endif
}  // namespace detail

}  // namespace cmd::kern
